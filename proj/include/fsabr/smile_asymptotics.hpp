#pragma once

#include "fsabr/params.hpp"

namespace fsabr {

struct SmilePoint {
    double logmoneyness = 0.0;  // k - x0
    double expiry = 0.0;
    double implied_vol = 0.0;
    double eta_star = 0.0;
    double objective_value = 0.0;
};

struct EtaMinimum {
    double eta_star = 0.0;
    double value = 0.0;
};

// Phi(eta) = eta^2/nu^2 + (m - rho y0 C_RK(eta) eta/nu)^2 / (y0^2 psi(eta)),
// with m = (k - x0)/t^{1/2-H}.
double eta_objective(double eta, double m_scaled, const ModelParams& p);

// Global minimizer of eta_objective: grid scan on [-8, 8] (doubling the range
// while the minimum sits on the boundary, up to |eta| = 64), then
// golden-section refinement to 1e-8.
EtaMinimum minimize_eta(double m_scaled, const ModelParams& p);

// ln C(k,t) ~ -Phi(eta*)/(2 t^{2H}) for an out-of-money call (k > x0), H <= 1/2.
double log_call_asymptotic(double k, double t, const ModelParams& p);

// sigma^2 = m^2/Phi(eta*), both wings (k != x0), H <= 1/2.
SmilePoint implied_vol_fsabr(double k, double t, const ModelParams& p);

// Numeric at-the-money limit of implied_vol_fsabr: symmetric average of the
// two wings at |k - x0| = h.
double implied_vol_fsabr_atm(double t, const ModelParams& p, double h = 1e-4);

// Zeroth-order SABR formula nu ln(F/K)/D(zeta) with K = e^k. `t` does not
// enter at this order.
double sabr_formula(double k, double t, double forward, double alpha, double nu, double rho, double beta);

// Undiscounted Black-Scholes price.
double bs_price(double spot, double strike, double t, double sigma, bool is_call);
double bs_vega(double spot, double strike, double t, double sigma);

// Inverts bs_price by Newton iteration on the log of the out-of-money price,
// safeguarded by bisection. Throws DomainError outside the no-arbitrage bounds.
double bs_implied_vol(double price, double spot, double strike, double t, bool is_call);

// Leading-order conversion sigma = |k - x0| / sqrt(2 t |ln C|).
double iv_from_log_price(double k, double x0, double t, double log_call);

}  // namespace fsabr
