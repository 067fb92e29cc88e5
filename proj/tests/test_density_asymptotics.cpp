#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "fsabr/density_asymptotics.hpp"
#include "fsabr/errors.hpp"
#include "oracles.hpp"

using namespace fsabr;

TEST_CASE("c_er") {
    for (double h : {0.1, 0.3, 0.5, 0.8}) CHECK(c_er(0.0, h) == doctest::Approx(1.0).scale(0.0).epsilon(1e-14));
    CHECK(std::abs(c_er(1.0, 0.5) - (std::exp(2.0) - 1.0) / 2.0) < 1e-12);
    const double riemann = oracle::c_er_riemann(-0.5, 0.3, 100000);
    CHECK(std::abs(c_er(-0.5, 0.3) - riemann) < 1e-8);
    CHECK(c_er(-0.5, 0.3) == doctest::Approx(oracle::c_er(-0.5, 0.3)).scale(0.0).epsilon(1e-12));
    CHECK(c_er(2.5, 0.1) == doctest::Approx(oracle::c_er(2.5, 0.1)).scale(0.0).epsilon(1e-12));
}

TEST_CASE("c_rk") {
    CHECK(c_rk(0.0, 0.5) == doctest::Approx(1.0).scale(0.0).epsilon(1e-14));
    CHECK(c_rk(1.0, 0.5) == doctest::Approx(std::numbers::e - 1.0).scale(0.0).epsilon(1e-13));
    for (double h : {0.1, 0.25, 0.75, 0.9}) {
        CAPTURE(h);
        const double v = c_rk(0.0, h);
        CHECK(v == doctest::Approx(oracle::kernel_integral(1.0, 0.0, 1.0, h)).scale(0.0).epsilon(1e-10));
        CHECK(v * v <= 1.0);
        CHECK(c_rk(-1.3, h) == doctest::Approx(oracle::c_rk(-1.3, h)).scale(0.0).epsilon(1e-10));
    }
}

TEST_CASE("psi") {
    CHECK(psi(0.4, 0.0, 0.3) == c_er(0.4, 0.3));
    for (double rho : {-0.9, -0.3, 0.6}) CHECK(psi(0.0, rho, 0.5) == doctest::Approx(1.0 - rho * rho).scale(0.0).epsilon(1e-13));
    const double cer = oracle::c_er(0.7, 0.25);
    const double crk = oracle::c_rk(0.7, 0.25);
    CHECK(psi(0.7, -0.7, 0.25) == doctest::Approx(cer - 0.49 * crk * crk).scale(0.0).epsilon(1e-10));
}

TEST_CASE("psi is positive and C_eR >= 1 for eta >= 0") {
    for (double h : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
            for (double eta = -3.0; eta <= 3.0; eta += 0.25) {
                CAPTURE(h);
                CAPTURE(rho);
                CAPTURE(eta);
                CHECK(psi(eta, rho, h) > 0.0);
                if (eta >= 0.0) CHECK(c_er(eta, h) >= 1.0);
            }
        }
    }
}

namespace {

// Direct transcription of the leading-order density with oracle constants.
double reference_log_density(const ModelParams& p, double t, double x, double y) {
    const double h = p.hurst;
    const double eta = std::log(y / p.y0);
    const double cer = oracle::c_er(eta, h);
    const double crk = h == 0.5 ? std::expm1(eta) / eta : oracle::c_rk(eta, h);
    const double ps = cer - p.rho * p.rho * crk * crk;
    // Conditional Gaussian of X_t given Y_t = y.
    const double mean = p.x0 - 0.5 * p.y0 * p.y0 * t * cer + p.rho * p.y0 * std::pow(t, 0.5 - h) * crk * eta / p.nu;
    const double var = p.y0 * p.y0 * t * ps;
    const double var_eta = p.nu * p.nu * std::pow(t, 2 * h);
    return -eta * eta / (2 * var_eta) - std::log(y * std::sqrt(2 * std::numbers::pi * var_eta)) -
           (x - mean) * (x - mean) / (2 * var) - 0.5 * std::log(2 * std::numbers::pi * var);
}

}  // namespace

TEST_CASE("approx_joint_density against a rederivation") {
    ModelParams p{0.1, 0.8, 1.3, -0.4, 0.3};
    for (double t : {0.01, 0.2}) {
        for (double dx : {-0.1, 0.0, 0.05}) {
            for (double fy : {0.9, 1.0, 1.2}) {
                const double x = p.x0 + dx, y = p.y0 * fy;
                CHECK(std::log(approx_joint_density(p, t, x, y)) ==
                      doctest::Approx(reference_log_density(p, t, x, y)).scale(0.0).epsilon(1e-10));
            }
        }
    }
    // y = y0, x = x0 substitution.
    ModelParams q{0.0, 0.5, 1.0, 0.3, 0.5};
    const double t = 0.04;
    const double ps0 = 1.0 - 0.09;
    const double expected = 1.0 / (2 * std::numbers::pi) / (q.y0 * q.nu * std::sqrt(t)) / (q.y0 * std::sqrt(t * ps0)) *
                            std::exp(-q.y0 * q.y0 * t / (8.0 * ps0));
    CHECK(approx_joint_density(q, t, 0.0, 0.5) == doctest::Approx(expected).scale(0.0).epsilon(1e-12));
}

TEST_CASE("approx_log_density equals ln density minus the prefactor") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        ModelParams p{u(gen) - 0.5, 0.1 + u(gen), 0.2 + 2 * u(gen), 1.8 * u(gen) - 0.9, 0.05 + 0.9 * u(gen)};
        const double t = 0.001 + 0.5 * u(gen);
        const double x = p.x0 + 0.4 * (u(gen) - 0.5);
        const double y = p.y0 * std::exp(u(gen) - 0.5);
        const double lhs = std::log(approx_joint_density(p, t, x, y));
        const double rhs = approx_log_density(p, t, x, y) + log_density_prefactor(p, t, y);
        CHECK(lhs == doctest::Approx(rhs).scale(0.0).epsilon(1e-9));
        CHECK(approx_joint_density(p, t, x, y) > 0.0);
    }
}

TEST_CASE("approx_log_density values") {
    ModelParams p{0.0, 1.0, 1.0, 0.0, 0.5};
    // rho = 0, eta = 0: -(dx + y0^2 t C/2)^2 / (2 y0^2 C t)
    const double t = 0.05;
    CHECK(approx_log_density(p, t, 0.2, 1.0) == doctest::Approx(-std::pow(0.2 + t / 2, 2) / (2 * t)).scale(0.0).epsilon(1e-13));
    CHECK(approx_log_density(p, t, -0.3, 1.0) <= 0.0);

    ModelParams r{0.0, 1.0, 1.0, -0.7, 0.1};
    const double y = std::exp(0.2);
    const double ref = reference_log_density(r, 0.01, 0.1, y) + std::log(y * 2 * std::numbers::pi * std::pow(0.01, 0.1)) +
                       0.5 * std::log(0.01 * (oracle::c_er(0.2, 0.1) - 0.49 * std::pow(oracle::c_rk(0.2, 0.1), 2)));
    CHECK(approx_log_density(r, 0.01, 0.1, y) == doctest::Approx(ref).scale(0.0).epsilon(1e-9));
}

TEST_CASE("density domain errors") {
    ModelParams p;
    CHECK_THROWS_AS(approx_joint_density(p, 0.0, 0.0, 0.2), DomainError);
    CHECK_THROWS_AS(approx_joint_density(p, 0.1, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(approx_log_density(p, -1.0, 0.0, 0.2), DomainError);
}

TEST_CASE("density normalization over the 10-sigma box") {
    ModelParams p{0.0, 1.0, 1.0, -0.3, 0.3};
    const double t = 0.005;
    const double sx = p.y0 * std::sqrt(t);
    const double sy = p.nu * std::pow(t, p.hurst);
    const double mass = density_box_mass(p, t, p.x0 - 10 * sx, p.x0 + 10 * sx, p.y0 * std::exp(-10 * sy),
                                         p.y0 * std::exp(10 * sy));
    CHECK(mass >= 0.85);
    CHECK(mass <= 1.15);
}

TEST_CASE("hyperbolic reduction") {
    const double x0 = 0.0, y0 = 1.0, t = 0.01;
    ModelParams p{x0, y0, 1.0, 0.0, 0.5};
    for (double dx : {-0.1, -0.05, 0.0, 0.05, 0.1}) {
        for (double fy : {0.9, 0.95, 1.0, 1.05, 1.1}) {
            const double x = x0 + dx, y = y0 * fy;
            const double ratio = approx_joint_density(p, t, x, y) / hyperbolic_hk_approx(t, x, y, x0, y0);
            CHECK(ratio >= 0.95);
            CHECK(ratio <= 1.05);
            // The exact relation is exp(-y0^2 t C_eR / 8).
            CHECK(ratio == doctest::Approx(std::exp(-y0 * y0 * t * c_er(std::log(fy), 0.5) / 8.0)).scale(0.0).epsilon(1e-11));
        }
    }
}

namespace {

double mckean_oracle(double t, double d) {
    boost::math::quadrature::exp_sinh<double> es;
    auto f = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double xi = d + s;
        return xi * std::exp(-xi * xi / (2 * t)) / (std::sqrt(2.0 * std::sinh(d + 0.5 * s)) * std::sqrt(std::sinh(0.5 * s)));
    };
    const double integral = es.integrate(f, 0.0, std::numeric_limits<double>::infinity());
    return std::sqrt(2.0) * std::exp(-t / 8) / std::pow(2 * std::numbers::pi * t, 1.5) * integral;
}

}  // namespace

TEST_CASE("mckean kernel") {
    CHECK(mckean_kernel(1.0, 0.0) == doctest::Approx(mckean_oracle(1.0, 0.0)).scale(0.0).epsilon(1e-9));
    CHECK(mckean_kernel(0.5, 1.0) == doctest::Approx(mckean_oracle(0.5, 1.0)).scale(0.0).epsilon(1e-9));
    double prev = mckean_kernel(0.3, 0.0);
    for (double d = 0.1; d <= 3.0; d += 0.1) {
        const double cur = mckean_kernel(0.3, d);
        CHECK(cur < prev);
        prev = cur;
    }
    const double t = 1e-3;
    CHECK(-2 * t * mckean_log_kernel(t, 1.0) == doctest::Approx(1.0).scale(0.0).epsilon(0.1));
    CHECK_THROWS_AS(mckean_kernel(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(mckean_kernel(0.0, 0.1), DomainError);
}

TEST_CASE("hyperbolic distance") {
    CHECK(hyperbolic_distance(0.3, 2.0, 0.3, 2.0) == 0.0);
    CHECK(hyperbolic_distance(0.0, std::numbers::e * 0.7, 0.0, 0.7) == doctest::Approx(1.0).scale(0.0).epsilon(1e-14));
    CHECK(hyperbolic_distance(1.0, 1.0, 0.0, 1.0) == doctest::Approx(std::acosh(1.5)).scale(0.0).epsilon(1e-14));
    CHECK(hyperbolic_distance(1e-9, 1.0, 0.0, 1.0) == doctest::Approx(1e-9).scale(0.0).epsilon(1e-6));
}

TEST_CASE("approx_geodesic") {
    CHECK(approx_geodesic(0.2, 1.7, 0.2, 1.0) == doctest::Approx(std::log(1.7)).scale(0.0).epsilon(1e-15));
    CHECK(approx_geodesic(0.2, 0.6, 0.2, 1.0) == doctest::Approx(hyperbolic_distance(0.2, 0.6, 0.2, 1.0)).scale(0.0).epsilon(1e-14));
    CHECK(approx_geodesic(0.5, 2.0, 0.2, 2.0) == doctest::Approx(0.15).scale(0.0).epsilon(1e-14));
    CHECK(approx_geodesic(0.5, 1.3, 0.0, 1.0) == doctest::Approx(hyperbolic_distance(0.5, 1.3, 0.0, 1.0)).scale(0.0).epsilon(0.1));
    CHECK_THROWS_AS(approx_geodesic(0.0, 0.0, 0.0, 1.0), DomainError);
}
