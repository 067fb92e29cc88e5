#include "fsabr/smile_asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "fsabr/density_asymptotics.hpp"
#include "fsabr/errors.hpp"

namespace fsabr {
namespace {

constexpr std::size_t kScanPoints = 1601;

void require_rough_or_brownian(const ModelParams& p) {
    if (p.hurst > 0.5) {
        throw UnsupportedRegime(
            "the Laplace-based smile formula needs H <= 1/2 (for H > 1/2 the minimum is not on the boundary); "
            "use the ldp method");
    }
}

double objective(const BridgeIntegrals& bridge, double eta, double m_scaled, const ModelParams& p) {
    const DensityConstants c = bridge.constants(eta, p.rho);
    const double q = m_scaled - p.rho * p.y0 * c.c_rk * eta / p.nu;
    return eta * eta / (p.nu * p.nu) + q * q / (p.y0 * p.y0 * c.psi);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double eta_objective(double eta, double m_scaled, const ModelParams& p) {
    p.validate();
    return objective(*bridge_integrals(p.hurst), eta, m_scaled, p);
}

EtaMinimum minimize_eta(double m_scaled, const ModelParams& p) {
    p.validate();
    if (!std::isfinite(m_scaled)) throw DomainError("scaled log-moneyness must be finite");
    if (m_scaled == 0.0) return {0.0, 0.0};
    const auto bridge = bridge_integrals(p.hurst);
    auto phi = [&](double eta) { return objective(*bridge, eta, m_scaled, p); };

    double range = 8.0;
    std::vector<double> values(kScanPoints);
    for (;;) {
        const double step = 2.0 * range / static_cast<double>(kScanPoints - 1);
        std::size_t best = 0;
        for (std::size_t i = 0; i < kScanPoints; ++i) {
            values[i] = phi(-range + step * static_cast<double>(i));
            if (values[i] < values[best]) best = i;
        }
        // Ties: prefer the smallest |eta| among equal minima.
        for (std::size_t i = 0; i < kScanPoints; ++i) {
            const double eta_i = -range + step * static_cast<double>(i);
            const double eta_b = -range + step * static_cast<double>(best);
            if (values[i] == values[best] && std::abs(eta_i) < std::abs(eta_b)) best = i;
        }
        if (best == 0 || best == kScanPoints - 1) {
            range *= 2.0;
            if (range > 64.0) {
                std::ostringstream msg;
                msg << "eta minimization: minimum not bracketed within |eta| <= 64 (m = " << m_scaled << ")";
                throw NumericalError(msg.str());
            }
            continue;
        }
        double lo = -range + step * static_cast<double>(best - 1);
        double hi = -range + step * static_cast<double>(best + 1);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo);
        double x2 = lo + g * (hi - lo);
        double f1 = phi(x1);
        double f2 = phi(x2);
        while (hi - lo > 1e-8) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = phi(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = phi(x2);
            }
        }
        EtaMinimum out{0.5 * (lo + hi), 0.0};
        out.value = phi(out.eta_star);
        const double eta_b = -range + step * static_cast<double>(best);
        if (values[best] < out.value) out = {eta_b, values[best]};
        return out;
    }
}

double log_call_asymptotic(double k, double t, const ModelParams& p) {
    p.validate();
    if (!(t > 0.0)) throw DomainError("t must be positive");
    if (!(k > p.x0)) throw DomainError("log_call_asymptotic needs an out-of-money call, k > x0");
    require_rough_or_brownian(p);
    const double m = (k - p.x0) / std::pow(t, 0.5 - p.hurst);
    return -minimize_eta(m, p).value / (2.0 * std::pow(t, 2.0 * p.hurst));
}

SmilePoint implied_vol_fsabr(double k, double t, const ModelParams& p) {
    p.validate();
    if (!(t > 0.0)) throw DomainError("t must be positive");
    if (k == p.x0) throw DomainError("implied_vol_fsabr is 0/0 at k = x0; use implied_vol_fsabr_atm");
    require_rough_or_brownian(p);
    const double m = (k - p.x0) / std::pow(t, 0.5 - p.hurst);
    const EtaMinimum best = minimize_eta(m, p);
    SmilePoint out;
    out.logmoneyness = k - p.x0;
    out.expiry = t;
    out.eta_star = best.eta_star;
    out.objective_value = best.value;
    out.implied_vol = std::abs(m) / std::sqrt(best.value);
    return out;
}

double implied_vol_fsabr_atm(double t, const ModelParams& p, double h) {
    if (!(h > 0.0)) throw DomainError("ATM offset must be positive");
    return 0.5 * (implied_vol_fsabr(p.x0 + h, t, p).implied_vol + implied_vol_fsabr(p.x0 - h, t, p).implied_vol);
}

double sabr_formula(double k, [[maybe_unused]] double t, double forward, double alpha, double nu, double rho,
                    double beta) {
    if (!(forward > 0.0) || !(alpha > 0.0) || !(nu > 0.0)) throw DomainError("SABR needs F, alpha, nu > 0");
    if (!(std::abs(rho) < 1.0)) throw DomainError("SABR needs |rho| < 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("SABR needs beta in [0, 1]");
    const double strike = std::exp(k);
    const double log_fk = std::log(forward) - k;
    double zeta;
    if (beta == 1.0) {
        zeta = nu / alpha * log_fk;
    } else {
        const double e = 1.0 - beta;
        zeta = nu / alpha * (std::pow(forward, e) - std::pow(strike, e)) / e;
    }
    if (zeta == 0.0) return alpha * std::pow(forward, beta - 1.0);
    const double a = 1.0 - 2.0 * rho * zeta + zeta * zeta;
    const double sa = std::sqrt(a);
    double d;
    if (zeta > -1.0) {
        // log1p form, accurate as zeta -> 0: sqrt(A) - 1 = (zeta^2 - 2 rho zeta)/(sqrt(A) + 1).
        d = std::log1p((zeta + (zeta * zeta - 2.0 * rho * zeta) / (sa + 1.0)) / (1.0 - rho));
    } else {
        // sqrt(A) + zeta - rho = (1 - rho^2)/(sqrt(A) - zeta + rho) avoids cancellation.
        d = std::log((1.0 - rho * rho) / ((sa - zeta + rho) * (1.0 - rho)));
    }
    // nu ln(F/K)/D = (nu ln(F/K)/zeta) (zeta/D); for beta = 1 the first factor is alpha.
    const double lead = beta == 1.0 ? alpha : nu * log_fk / zeta;
    return lead * zeta / d;
}

double bs_price(double spot, double strike, double t, double sigma, bool is_call) {
    if (!(spot > 0.0 && strike > 0.0 && t > 0.0 && sigma >= 0.0)) throw DomainError("bs_price needs positive inputs");
    const double s = sigma * std::sqrt(t);
    if (s == 0.0) return is_call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
    const double d1 = std::log(spot / strike) / s + 0.5 * s;
    const double d2 = d1 - s;
    if (is_call) return spot * norm_cdf(d1) - strike * norm_cdf(d2);
    return strike * norm_cdf(-d2) - spot * norm_cdf(-d1);
}

double bs_vega(double spot, double strike, double t, double sigma) {
    const double s = sigma * std::sqrt(t);
    const double d1 = std::log(spot / strike) / s + 0.5 * s;
    return spot * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * std::numbers::pi) * std::sqrt(t);
}

double bs_implied_vol(double price, double spot, double strike, double t, bool is_call) {
    if (!(spot > 0.0 && strike > 0.0 && t > 0.0)) throw DomainError("bs_implied_vol needs positive spot, strike, t");
    // Work with the out-of-money side.
    bool otm_call = spot <= strike;
    double target = price;
    if (is_call && !otm_call) target = price - (spot - strike);
    if (!is_call && otm_call) target = price - (strike - spot);
    const double upper = otm_call ? spot : strike;
    // Prices within rounding of intrinsic carry no volatility information.
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::max(spot, strike);
    if (!(target > floor) || !(target < upper) || !std::isfinite(price)) {
        std::ostringstream msg;
        msg << "option price " << price << " outside the no-arbitrage bounds";
        throw DomainError(msg.str());
    }
    const double log_target = std::log(target);
    auto f = [&](double sigma) { return std::log(bs_price(spot, strike, t, sigma, otm_call)) - log_target; };

    double lo = 0.0;
    double hi = 1.0;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("implied vol bracket exceeded 1e6");
    }
    const double moneyness = std::abs(std::log(spot / strike));
    double sigma = std::sqrt(2.0 * moneyness / t);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    for (int iter = 0; iter < 300; ++iter) {
        const double price_s = bs_price(spot, strike, t, sigma, otm_call);
        const double value = price_s > 0.0 ? std::log(price_s) - log_target : -std::numeric_limits<double>::infinity();
        if (value == 0.0) return sigma;
        if (value < 0.0) lo = sigma;
        else hi = sigma;
        double next;
        const double vega = bs_vega(spot, strike, t, sigma);
        if (price_s > 0.0 && vega > 0.0 && std::isfinite(value)) {
            next = sigma - value * price_s / vega;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        } else {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - sigma) <= 1e-15 * sigma || hi - lo <= 1e-15 * hi) return next;
        sigma = next;
    }
    throw NumericalError("implied vol iteration did not converge");
}

double iv_from_log_price(double k, double x0, double t, double log_call) {
    if (!(log_call < 0.0)) throw DomainError("log call price must be negative");
    if (k == x0) throw DomainError("iv_from_log_price needs k != x0");
    if (!(t > 0.0)) throw DomainError("t must be positive");
    return std::abs(k - x0) / std::sqrt(2.0 * t * std::abs(log_call));
}

}  // namespace fsabr
