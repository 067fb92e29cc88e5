#include "fsabr/density_asymptotics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fsabr/errors.hpp"
#include "fsabr/fbm_core.hpp"
#include "fsabr/quadrature.hpp"

namespace fsabr {
namespace {

void check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be positive");
}

void check_y(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("y must be positive");
}

// 2 eta / (y^2 - y0^2) written as 2 eta / (y0^2 expm1(2 eta)); equals 1/y0^2 at eta = 0.
double geodesic_factor(double eta, double y0) {
    if (eta == 0.0) return 1.0 / (y0 * y0);
    return 2.0 * eta / (y0 * y0 * std::expm1(2.0 * eta));
}

}  // namespace

BridgeIntegrals::BridgeIntegrals(double hurst) : hurst_(hurst) {
    const MolchanGolosovKernel kernel(hurst);
    const double h2 = 2.0 * hurst;
    auto add = [&](double u, double gap, double w) {
        weights_.push_back(w);
        r_values_.push_back(0.5 * (1.0 + std::pow(u, h2) - std::pow(gap, h2)));
        k_values_.push_back(kernel.with_gap(1.0, u, gap));
    };
    // Left half in u, right half in v = 1 - u so gaps near u = 1 stay exact.
    const double a0 = kernel.exponent_at_zero();
    const double a1 = std::min(0.0, kernel.exponent_at_t());
    const QuadratureRule left = composite_rule(0.0, 0.5, {{0.0, a0}, {1.0, a1}});
    for (std::size_t i = 0; i < left.size(); ++i) add(left.nodes[i], 1.0 - left.nodes[i], left.weights[i]);
    const QuadratureRule right = composite_rule(0.0, 0.5, {{0.0, a1}, {1.0, a0}});
    for (std::size_t i = 0; i < right.size(); ++i) add(1.0 - right.nodes[i], right.nodes[i], right.weights[i]);
}

double BridgeIntegrals::c_er(double eta) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double e = std::exp(r_values_[i] * eta);
        sum += weights_[i] * e * e;
    }
    return sum;
}

double BridgeIntegrals::c_rk(double eta) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        sum += weights_[i] * std::exp(r_values_[i] * eta) * k_values_[i];
    }
    return sum;
}

double BridgeIntegrals::psi(double eta, double rho) const { return constants(eta, rho).psi; }

DensityConstants BridgeIntegrals::constants(double eta, double rho) const {
    if (!(std::abs(rho) < 1.0)) throw DomainError("|rho| must be < 1");
    DensityConstants out;
    out.eta = eta;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double e = std::exp(r_values_[i] * eta);
        out.c_er += weights_[i] * e * e;
        out.c_rk += weights_[i] * e * k_values_[i];
    }
    out.psi = out.c_er - rho * rho * out.c_rk * out.c_rk;
    if (!(out.psi > 0.0)) {
        std::ostringstream msg;
        msg << "psi(" << eta << ") = " << out.psi << " is not positive (H = " << hurst_ << ", rho = " << rho << ")";
        throw NumericalError(msg.str());
    }
    return out;
}

std::shared_ptr<const BridgeIntegrals> bridge_integrals(double hurst) {
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const BridgeIntegrals>> cache;
    {
        std::lock_guard<std::mutex> lock(mutex);
        auto it = cache.find(hurst);
        if (it != cache.end()) return it->second;
    }
    auto built = std::make_shared<const BridgeIntegrals>(hurst);
    std::lock_guard<std::mutex> lock(mutex);
    if (cache.size() >= 64) cache.clear();
    return cache.emplace(hurst, std::move(built)).first->second;
}

double c_er(double eta, double hurst) { return bridge_integrals(hurst)->c_er(eta); }
double c_rk(double eta, double hurst) { return bridge_integrals(hurst)->c_rk(eta); }
double psi(double eta, double rho, double hurst) { return bridge_integrals(hurst)->psi(eta, rho); }

namespace {

// Both exponent pieces of the density for fixed y (constants already evaluated).
struct DensitySlice {
    double eta;
    double psi;
    double shift;       // (y0^2 t^{H+1/2}/2) C_eR - rho y0 C_RK eta / nu
    double t_2h;        // t^{2H}
    double t_half_m_h;  // t^{1/2-H}
    double log_prefactor;

    double exponent(const ModelParams& p, double x) const {
        const double q = (x - p.x0) / t_half_m_h + shift;
        return -(eta * eta / (p.nu * p.nu) + q * q / (p.y0 * p.y0 * psi)) / (2.0 * t_2h);
    }
};

DensitySlice make_slice(const ModelParams& p, double t, double y) {
    p.validate();
    check_time(t);
    check_y(y);
    const double h = p.hurst;
    DensitySlice s{};
    s.eta = std::log(y / p.y0);
    const DensityConstants k = bridge_integrals(h)->constants(s.eta, p.rho);
    s.psi = k.psi;
    s.t_2h = std::pow(t, 2.0 * h);
    s.t_half_m_h = std::pow(t, 0.5 - h);
    s.shift = 0.5 * p.y0 * p.y0 * std::pow(t, h + 0.5) * k.c_er - p.rho * p.y0 * k.c_rk * s.eta / p.nu;
    s.log_prefactor = -std::log(2.0 * std::numbers::pi) - std::log(y * p.nu * std::pow(t, h)) -
                      std::log(p.y0 * std::sqrt(t * s.psi));
    return s;
}

}  // namespace

double approx_log_density(const ModelParams& p, double t, double x, double y) {
    return make_slice(p, t, y).exponent(p, x);
}

double log_density_prefactor(const ModelParams& p, double t, double y) { return make_slice(p, t, y).log_prefactor; }

GaussianSection approx_conditional_x(const ModelParams& p, double t, double y) {
    const DensitySlice s = make_slice(p, t, y);
    return {p.x0 - s.shift * s.t_half_m_h, p.y0 * std::sqrt(s.psi * t)};
}

double approx_joint_density(const ModelParams& p, double t, double x, double y) {
    const DensitySlice s = make_slice(p, t, y);
    return std::exp(s.log_prefactor + s.exponent(p, x));
}

double density_box_mass(const ModelParams& p, double t, double x_lo, double x_hi, double y_lo, double y_hi,
                        double rel_tol) {
    if (!(x_hi > x_lo && y_hi > y_lo && y_lo > 0.0)) throw DomainError("invalid integration box");
    auto outer = [&](double y) {
        const DensitySlice s = make_slice(p, t, y);
        auto inner = [&](double x) { return std::exp(s.log_prefactor + s.exponent(p, x)); };
        // Split at the slice mode so the peak is never missed by the initial partition.
        const double mode = p.x0 - s.shift * s.t_half_m_h;
        return integrate_adaptive(inner, x_lo, x_hi, rel_tol * 0.1, 1e-300, 20000, {mode}).value;
    };
    std::vector<double> y_breaks;
    for (int k = -8; k <= 8; ++k) y_breaks.push_back(p.y0 * std::exp(p.nu * std::pow(t, p.hurst) * k));
    return integrate_adaptive(outer, y_lo, y_hi, rel_tol, 1e-300, 20000, y_breaks).value;
}

double hyperbolic_hk_approx(double t, double x, double y, double x0, double y0) {
    check_time(t);
    check_y(y);
    check_y(y0);
    const double eta = std::log(y / y0);
    const double dx = x - x0;
    const double d2 = eta * eta + geodesic_factor(eta, y0) * dx * dx;
    const double cer = eta == 0.0 ? 1.0 : std::expm1(2.0 * eta) / (2.0 * eta);
    return std::exp(-d2 / (2.0 * t) - 0.5 * dx) / (2.0 * std::numbers::pi * t * y * y0 * std::sqrt(cer));
}

double mckean_log_kernel(double t, double d) {
    check_time(t);
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("geodesic distance must be >= 0");
    // xi = d + v^2;  cosh xi - cosh d = 2 sinh(d + v^2/2) sinh(v^2/2), and the
    // factors e^{-d^2/2t}, e^{-d/2} are pulled out of the integral.
    auto g = [&](double v) {
        const double v2 = v * v;
        const double a = d + 0.5 * v2;
        const double s1 = -0.5 * std::expm1(-2.0 * a);  // sinh(a) e^{-a}
        const double denom = std::sqrt(2.0 * s1 * std::sinh(0.5 * v2));
        const double expo = -(2.0 * d * v2 + v2 * v2) / (2.0 * t) - 0.25 * v2;
        return (d + v2) * 2.0 * v * std::exp(expo) / denom;
    };
    // Truncate where the exponent drops below -60.
    double v_max = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double v2 = v_max * v_max;
        if ((2.0 * d * v2 + v2 * v2) / (2.0 * t) + 0.25 * v2 > 60.0) break;
        v_max *= 1.5;
    }
    const double scale = std::min(std::sqrt(t), d > 0.0 ? std::sqrt(t / d) : std::sqrt(t));
    std::vector<double> breaks;
    for (double b = scale * 0.25; b < v_max; b *= 2.0) breaks.push_back(b);
    const double integral = integrate_adaptive(g, 0.0, v_max, 1e-11, 0.0, 20000, breaks).value;
    return 0.5 * std::log(2.0) - t / 8.0 - 1.5 * std::log(2.0 * std::numbers::pi * t) - d * d / (2.0 * t) - 0.5 * d +
           std::log(integral);
}

double mckean_kernel(double t, double d) { return std::exp(mckean_log_kernel(t, d)); }

double hyperbolic_distance(double x, double y, double x0, double y0) {
    check_y(y);
    check_y(y0);
    const double dx = x - x0;
    const double dy = y - y0;
    const double q = (dx * dx + dy * dy) / (2.0 * y * y0);  // cosh d - 1
    return std::log1p(q + std::sqrt(q * (q + 2.0)));
}

double approx_geodesic(double x, double y, double x0, double y0) {
    check_y(y);
    check_y(y0);
    const double eta = std::log(y / y0);
    const double dx = x - x0;
    return std::sqrt(eta * eta + geodesic_factor(eta, y0) * dx * dx);
}

}  // namespace fsabr
