#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsabr/params.hpp"

namespace fsabr {

// Lower-triangular matrix of cell-averaged kernel weights,
//   entries(i-1, j-1) = (1/dt) int_{t_{j-1}}^{t_j} K_H(t_i, s) ds,  j <= i.
struct DiscreteKernelMatrix {
    Eigen::MatrixXd entries;
    TimeGrid grid;
    double hurst;
};

// Vectors follow one convention throughout: b has n entries (b[j-1] acts on
// cell j), while x and y have n+1 entries indexed by grid node.
struct VariationalSolution {
    TimeGrid grid;
    Eigen::VectorXd b;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> energy_history;
};

DiscreteKernelMatrix discrete_kernel(const TimeGrid& grid, double hurst);

// y[i] = y0 exp(nu sum_{j<=i} K[i][j] b[j] dt), y[0] = y0.
Eigen::VectorXd y_from_b(const Eigen::VectorXd& b, const DiscreteKernelMatrix& k, const ModelParams& p);

// Forward substitution for ln(y/y0)/nu = K b dt. y[0] is ignored.
Eigen::VectorXd b_from_y(const Eigen::VectorXd& y, const DiscreteKernelMatrix& k, const ModelParams& p);

// Left-endpoint discretization of
//   1/2 int (xdot/y - rho b)^2/rho_bar^2 dt + 1/2 int b^2 dt
// with xdot_j = (x[j] - x[j-1])/dt and y evaluated at y[j-1].
double energy(const Eigen::VectorXd& x, const Eigen::VectorXd& b, const Eigen::VectorXd& y, const ModelParams& p,
              const TimeGrid& grid);

// 1/2 sum (xdot^2 - 2 rho xdot ydot/nu + ydot^2/nu^2)/(rho_bar^2 y^2) dt with
// ydot_j = y[j-1](ln y[j] - ln y[j-1])/dt, the hyperbolic form of `energy`
// when H = 1/2.
double hyperbolic_energy(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ModelParams& p,
                         const TimeGrid& grid);

// Minimizer of the first energy term over x with x[0] = x0, x[n] = k.
Eigen::VectorXd optimal_x_given_b(const Eigen::VectorXd& b, const Eigen::VectorXd& y, double k, const ModelParams& p,
                                  const TimeGrid& grid);

// BFGS over b with the inner x problem eliminated. Gradients by central
// differences. Stops when max|grad| < 1e-7 or after 500 iterations.
VariationalSolution minimize_rate(double k, double horizon, const ModelParams& p, std::size_t n);

// sigma = |k - x0| / sqrt(horizon * 2 I*).
double fsabr_smile_ldp(double k, double horizon, const ModelParams& p, std::size_t n);

}  // namespace fsabr
