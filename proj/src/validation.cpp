#include "fsabr/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "fsabr/density_asymptotics.hpp"
#include "fsabr/errors.hpp"
#include "fsabr/fbm_core.hpp"
#include "fsabr/laplace_numerics.hpp"
#include "fsabr/ldp_variational.hpp"
#include "fsabr/mc_oracle.hpp"
#include "fsabr/smile_asymptotics.hpp"

namespace fsabr {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

CheckResult below(std::string name, double value, double tol) {
    return {std::move(name), value, "< " + format_number(tol), value < tol};
}

CheckResult within(std::string name, double value, double lo, double hi) {
    return {std::move(name), value, "[" + format_number(lo) + ", " + format_number(hi) + "]", value >= lo && value <= hi};
}

CheckResult positive(std::string name, double value) { return {std::move(name), value, "> 0", value > 0.0}; }

const ModelParams kMarketParams{0.0, 0.13927, 0.5778, -0.06867, 0.5};

}  // namespace

CheckResult check_kernel_identity(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = 1e-3 + 10.0 * u(gen);
        const double s = t * (1e-6 + (1.0 - 2e-6) * u(gen));
        worst = std::max(worst, std::abs(mg_kernel(t, s, 0.5) - 1.0));
    }
    return below("kernel_identity_h_half", worst, 1e-10);
}

CheckResult check_kernel_norm() {
    double worst = 0.0;
    for (double h : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        worst = std::max(worst, std::abs(MolchanGolosovKernel(h).product_integral(1.0, 1.0, 0.0, 1.0) - 1.0));
    }
    return below("kernel_l2_norm", worst, 1e-6);
}

CheckResult check_kernel_autocov(double hurst) {
    const MolchanGolosovKernel kernel(hurst);
    double worst = 0.0;
    for (double t : {0.3, 1.0, 2.5}) {
        for (double s : {0.1, 0.3, 1.7}) {
            const double lo = std::min(t, s);
            worst = std::max(worst, std::abs(kernel.product_integral(t, s, 0.0, lo) - autocov(t, s, hurst)));
        }
    }
    return below("kernel_product_equals_autocov", worst, 1e-8);
}

CheckResult check_cer_closed_form() {
    return below("c_er_closed_form_h_half", std::abs(c_er(1.0, 0.5) - 0.5 * std::expm1(2.0)), 1e-8);
}

CheckResult check_density_normalization(const ModelParams& p, double t) {
    const double sx = p.y0 * std::sqrt(t);
    const double sy = p.nu * std::pow(t, p.hurst);
    const double mass = density_box_mass(p, t, p.x0 - 10.0 * sx, p.x0 + 10.0 * sx, p.y0 * std::exp(-10.0 * sy),
                                         p.y0 * std::exp(10.0 * sy));
    return within("density_normalization", mass, 0.85, 1.15);
}

CheckResult check_hyperbolic_reduction() {
    const ModelParams p{0.0, 0.2, 1.0, 0.0, 0.5};
    const double t = 0.01;
    double worst = 0.0;
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            const double x = p.x0 + i * p.y0 * std::sqrt(t);
            const double y = p.y0 * std::exp(j * std::sqrt(t));
            const double ratio = approx_joint_density(p, t, x, y) / hyperbolic_hk_approx(t, x, y, p.x0, p.y0);
            worst = std::max(worst, std::abs(ratio - 1.0));
        }
    }
    return below("hyperbolic_reduction_ratio", worst, 0.05);
}

CheckResult check_sabr_difference() {
    double worst = 0.0;
    for (int i = -20; i <= 20; ++i) {
        const double k = 0.05 * i;
        const double fsabr = i == 0 ? implied_vol_fsabr_atm(1.0, kMarketParams) : implied_vol_fsabr(k, 1.0, kMarketParams).implied_vol;
        worst = std::max(worst, std::abs(fsabr - sabr_formula(k, 1.0, 1.0, kMarketParams.y0, kMarketParams.nu, kMarketParams.rho, 1.0)));
    }
    return within("sabr_max_abs_difference", worst, 0.005, 0.02);
}

CheckResult check_hurst_ordering() {
    auto sigma = [](double h, double t) {
        ModelParams p = kMarketParams;
        p.hurst = h;
        return implied_vol_fsabr(0.5, t, p).implied_vol;
    };
    const double a = sigma(0.1, 0.01), b = sigma(0.3, 0.01), c = sigma(0.5, 0.01);
    const double spread_long = std::abs(sigma(0.1, 1.0) - sigma(0.5, 1.0));
    // Smallest margin among: a > b, b > c, |a - c| > spread at t = 1.
    return positive("hurst_short_expiry_ordering", std::min({a - b, b - c, std::abs(a - c) - spread_long}));
}

CheckResult check_route_identity(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const ModelParams p{0.0, 0.1 + 0.5 * u(gen), 0.3 + u(gen), 1.6 * u(gen) - 0.8, 0.1 + 0.4 * u(gen)};
        const double k = 0.05 + 0.5 * u(gen), t = 0.01 + u(gen);
        const double direct = implied_vol_fsabr(k, t, p).implied_vol;
        const double via_log = iv_from_log_price(k, p.x0, t, log_call_asymptotic(k, t, p));
        worst = std::max(worst, std::abs(via_log / direct - 1.0));
    }
    return below("implied_vol_routes_agree", worst, 1e-10);
}

CheckResult check_bs_roundtrip(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double sigma = 0.05 + 0.95 * u(gen);
        const double t = 0.05 + 1.95 * u(gen);
        const double k = 0.6 * u(gen) - 0.3;
        const bool call = k >= 0.0;
        const double price = bs_price(1.0, std::exp(k), t, sigma, call);
        worst = std::max(worst, std::abs(bs_implied_vol(price, 1.0, std::exp(k), t, call) - sigma));
    }
    return below("black_scholes_roundtrip", worst, 1e-8);
}

CheckResult check_ldp_hyperbolic(std::uint64_t seed) {
    const ModelParams p{0.0, 0.2, 1.0, 0.3, 0.5};
    const TimeGrid grid(1.0, 128);
    const DiscreteKernelMatrix kernel = discrete_kernel(grid, 0.5);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n01;
    double worst = 0.0;
    for (int path = 0; path < 50; ++path) {
        Eigen::VectorXd x(129), y(129);
        x[0] = p.x0;
        y[0] = p.y0;
        for (int i = 1; i <= 128; ++i) {
            x[i] = x[i - 1] + 0.05 * n01(gen);
            y[i] = y[i - 1] * std::exp(0.1 * n01(gen));
        }
        const Eigen::VectorXd b = b_from_y(y, kernel, p);
        const double hyp = hyperbolic_energy(x, y, p, grid);
        worst = std::max(worst, std::abs(energy(x, b, y, p, grid) - hyp) / hyp);
    }
    return below("ldp_hyperbolic_energy", worst, 1e-8);
}

CheckResult check_ldp_sabr() {
    double worst = 0.0;
    for (double k : {-0.5, -0.3, -0.1, 0.1, 0.3, 0.5}) {
        const double ldp = fsabr_smile_ldp(k, 1.0, kMarketParams, 128);
        const double sabr = sabr_formula(k, 1.0, 1.0, kMarketParams.y0, kMarketParams.nu, kMarketParams.rho, 1.0);
        worst = std::max(worst, std::abs(ldp / sabr - 1.0));
    }
    return below("ldp_recovers_sabr", worst, 1e-2);
}

CheckResult check_ldp_roundtrip(double hurst, std::uint64_t seed) {
    const ModelParams p{0.0, 0.3, 1.0, 0.0, hurst};
    const TimeGrid grid(1.0, 64);
    const DiscreteKernelMatrix kernel = discrete_kernel(grid, hurst);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    Eigen::VectorXd y(65);
    y[0] = p.y0;
    for (int i = 1; i <= 64; ++i) y[i] = u(gen);
    const Eigen::VectorXd back = y_from_b(b_from_y(y, kernel, p), kernel, p);
    return below("ldp_kernel_roundtrip", ((back - y).array() / y.array()).abs().maxCoeff(), 1e-10);
}

namespace {

double lemma_integrand(const Point2& x, double t) {
    return x[0] * std::exp(-x.squaredNorm()) * std::exp(-(x[0] + x[1] * x[1]) / t);
}

}  // namespace

CheckResult check_laplace_lemma() {
    const double t = 1e-3;
    const ScalarField2 theta{[](const Point2& x) { return x[0] + x[1] * x[1]; },
                             [](const Point2& x) { return Point2(1.0, 2.0 * x[1]); },
                             [](const Point2&) { return Eigen::Matrix2d{{0.0, 0.0}, {0.0, 2.0}}; }};
    const ScalarField2 f = fd_field([](const Point2& x) { return x[0] * std::exp(-x.squaredNorm()); });
    const double lead = laplace_leading_term(theta, f, Point2::Zero(), t);
    const double quad = adaptive_quad_2d([t](const Point2& x) { return lemma_integrand(x, t); },
                                         PlaneDomain::half_plane(Point2::Zero(), Point2(1.0, 0.0)), t);
    const double exact = std::sqrt(std::numbers::pi) * std::pow(t, 2.5);
    CheckResult r = within("laplace_leading_term_ratio", lead / quad, 0.95, 1.05);
    if (std::abs(lead / exact - 1.0) > 1e-6) r.pass = false;
    return r;
}

CheckResult check_laplace_gaussian() {
    const double t = 0.01;
    const double quad = adaptive_quad_2d([t](const Point2& x) { return std::exp(-x.squaredNorm() / t); },
                                         PlaneDomain::plane(Point2::Zero()), t);
    return below("quad_2d_gaussian", std::abs(quad / (std::numbers::pi * t) - 1.0), 1e-6);
}

CheckResult check_mc_kde(std::uint64_t seed, std::size_t workers) {
    const ModelParams p{0.0, 0.2, 1.0, 0.0, 0.5};
    const double t = 0.05;
    const TerminalSamples term = simulate_terminal(p, TimeGrid(t, 256), 100000, seed, workers);
    const double sx = p.y0 * std::sqrt(t), sy = p.nu * std::sqrt(t);
    std::vector<double> ex, ey;
    for (int i = -20; i <= 20; ++i) ex.push_back(p.x0 - 0.5 * p.y0 * p.y0 * t + 0.15 * i * sx);
    for (int j = -20; j <= 20; ++j) ey.push_back(p.y0 * std::exp(0.15 * j * sy));
    const Eigen::MatrixXd kde = kde2d(term.x, term.y, ex, ey);
    Eigen::MatrixXd approx(ex.size(), ey.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
        for (std::size_t j = 0; j < ey.size(); ++j) approx(i, j) = approx_joint_density(p, t, ex[i], ey[j]);
    }
    const double mode = approx.maxCoeff();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < approx.rows(); ++i) {
        for (Eigen::Index j = 0; j < approx.cols(); ++j) {
            if (approx(i, j) > 0.1 * mode) worst = std::max(worst, std::abs(kde(i, j) / approx(i, j) - 1.0));
        }
    }
    return below("mc_kde_relative_error", worst, 0.15);
}

CheckResult check_error_order(std::uint64_t seed, std::size_t workers) {
    const ModelParams p{0.0, 0.2, 1.0, 0.0, 0.5};
    const ErrorStudy study = error_order_study(p, 64, {0.2, 0.1, 0.05, 0.025}, 100000, seed, workers);
    CheckResult r{"error_order_slope", study.slope, ">= 0.4", study.slope >= 0.4};
    return r;
}

std::vector<CheckResult> run_suite(const std::string& suite, const ModelParams& p, double t, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "kernel") {
        known = true;
        out.push_back(check_kernel_identity(seed));
        out.push_back(check_kernel_norm());
        out.push_back(check_kernel_autocov(p.hurst));
    }
    if (all || suite == "density") {
        known = true;
        out.push_back(check_cer_closed_form());
        out.push_back(check_density_normalization(p, t));
        out.push_back(check_hyperbolic_reduction());
    }
    if (all || suite == "smile") {
        known = true;
        out.push_back(check_sabr_difference());
        out.push_back(check_hurst_ordering());
        out.push_back(check_route_identity(seed));
        out.push_back(check_bs_roundtrip(seed));
    }
    if (all || suite == "ldp") {
        known = true;
        out.push_back(check_ldp_hyperbolic(seed));
        out.push_back(check_ldp_sabr());
        out.push_back(check_ldp_roundtrip(p.hurst, seed));
    }
    if (all || suite == "laplace") {
        known = true;
        out.push_back(check_laplace_lemma());
        out.push_back(check_laplace_gaussian());
    }
    if (!known) throw ConfigError("unknown suite '" + suite + "'");
    return out;
}

}  // namespace fsabr
