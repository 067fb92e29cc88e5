#pragma once

#include <memory>
#include <vector>

#include "fsabr/params.hpp"

namespace fsabr {

struct DensityConstants {
    double eta = 0.0;
    double c_rk = 0.0;
    double c_er = 0.0;
    double psi = 0.0;
};

// Quadrature of the bridge integrals for one Hurst exponent:
//   C_eR(eta) = int_0^1 exp(2 R(1,u) eta) du
//   C_RK(eta) = int_0^1 exp(R(1,u) eta) K_H(1,u) du
// The rule and the tabulated R(1,u_i), K_H(1,u_i) are built once.
class BridgeIntegrals {
public:
    explicit BridgeIntegrals(double hurst);

    double hurst() const { return hurst_; }
    double c_er(double eta) const;
    double c_rk(double eta) const;
    // C_eR - rho^2 C_RK^2; throws NumericalError if not positive.
    double psi(double eta, double rho) const;
    DensityConstants constants(double eta, double rho) const;

private:
    double hurst_;
    std::vector<double> weights_;
    std::vector<double> r_values_;
    std::vector<double> k_values_;
};

// Shared, lazily built instance for `hurst`.
std::shared_ptr<const BridgeIntegrals> bridge_integrals(double hurst);

double c_er(double eta, double hurst);
double c_rk(double eta, double hurst);
double psi(double eta, double rho, double hurst);

// Leading small-time term of the joint density of (X_t, Y_t).
double approx_joint_density(const ModelParams& p, double t, double x, double y);
// The exponent -(1/2t^{2H}) [eta^2/nu^2 + (...)^2/(y0^2 psi)] without the O(ln t) prefactor terms.
double approx_log_density(const ModelParams& p, double t, double x, double y);
// ln of the prefactor, so that ln approx_joint_density = approx_log_density + log_density_prefactor.
double log_density_prefactor(const ModelParams& p, double t, double y);

// For fixed y the density is Gaussian in x and its y-marginal is the exact
// lognormal law of Y_t. Mean and standard deviation of that x-section.
struct GaussianSection {
    double mean;
    double sd;
};
GaussianSection approx_conditional_x(const ModelParams& p, double t, double y);

// Mass of approx_joint_density over [x_lo, x_hi] x [y_lo, y_hi] by nested adaptive quadrature.
double density_box_mass(const ModelParams& p, double t, double x_lo, double x_hi, double y_lo, double y_hi,
                        double rel_tol = 1e-8);

// Reduction of the density at H = 1/2, nu = 1, rho = 0:
//   (1/2 pi t) exp(-dtilde^2 / 2t) e^{-(x-x0)/2} / (y y0 sqrt(C_eR)).
double hyperbolic_hk_approx(double t, double x, double y, double x0, double y0);

// McKean heat kernel on the hyperbolic plane at geodesic distance d.
double mckean_kernel(double t, double d);
double mckean_log_kernel(double t, double d);

double hyperbolic_distance(double x, double y, double x0, double y0);
// sqrt(eta^2 + 2 eta (x-x0)^2 / (y^2 - y0^2)), continuous across y = y0.
double approx_geodesic(double x, double y, double x0, double y0);

}  // namespace fsabr
