#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fsabr/fbm_core.hpp"
#include "fsabr/params.hpp"

namespace fsabr {

// Full paths: B, W, B^H from the exact joint sampler, Y = y0 e^{nu B^H} and X
// by left-point Euler. Memory is 5 n_paths (n+1) doubles.
PathBundle simulate(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                    std::size_t workers = 0);

// Terminal values of the same paths as `simulate`, without storing them:
//   v = sum y_{k-1}^2 dt, zeta = sum y_{k-1} dB_k (left-point sums).
struct TerminalSamples {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> v;
    std::vector<double> zeta;
};
TerminalSamples simulate_terminal(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                                  std::uint64_t seed, std::size_t workers = 0);

// sigma_hat n^{-1/6}, the two-dimensional Silverman rule for one axis.
double silverman_bandwidth(const std::vector<double>& samples);

// Gaussian product-kernel estimate; entry (i, j) is the density at
// (eval_x[i], eval_y[j]).
Eigen::MatrixXd kde2d(const std::vector<double>& samples_x, const std::vector<double>& samples_y,
                      const std::vector<double>& eval_x, const std::vector<double>& eval_y);

struct McEstimate {
    double price = 0.0;
    double std_err = 0.0;
};

// Sample mean and standard error of (e^x - e^k)^+ (or the put) over terminal log prices.
McEstimate price_from_samples(const std::vector<double>& x_terminal, double k, bool is_call);

// E[(e^{X_t} - e^k)^+] (or the put) over n_steps Euler steps.
McEstimate mc_price(const ModelParams& p, double t, double k, bool is_call, std::size_t n_paths, std::uint64_t seed,
                    std::size_t n_steps = 256, std::size_t workers = 0);
McEstimate mc_call(const ModelParams& p, double t, double k, std::size_t n_paths, std::uint64_t seed,
                   std::size_t n_steps = 256, std::size_t workers = 0);

// Bump (1-u^2)^3 (1-w^2)^3 with u = (x-x0)/y0, w = (y-y0)/y0, zero outside.
double bump(const ModelParams& p, double x, double y);

struct ErrorStudyRow {
    double t;
    double mc_value;      // E f(X_t, Y_t), x integrated against the exact conditional law
    double approx_value;  // same functional under approx_joint_density
    double discrepancy;   // |mc_value - approx_value|
    double std_err;       // of the paired difference
};

struct ErrorStudy {
    std::vector<ErrorStudyRow> rows;
    double slope;  // least-squares slope of ln discrepancy against ln t
};

// Both expectations share the Y_t samples; for each, the x-integral of the
// bump is done against a Gaussian: N(x0 + rho zeta - v/2, rho_bar^2 v) given
// the simulated path, or the x-section of approx_joint_density given Y_t.
ErrorStudy error_order_study(const ModelParams& p, std::size_t n_steps, const std::vector<double>& t_list,
                             std::size_t n_paths, std::uint64_t seed, std::size_t workers = 0);

}  // namespace fsabr
