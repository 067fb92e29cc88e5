#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fsabr/errors.hpp"
#include "fsabr/fbm_core.hpp"
#include "fsabr/ldp_variational.hpp"
#include "fsabr/smile_asymptotics.hpp"
#include "oracles.hpp"

using namespace fsabr;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = u(gen);
    return v;
}

}  // namespace

TEST_CASE("discrete_kernel") {
    TimeGrid grid(1.0, 16);
    const DiscreteKernelMatrix half = discrete_kernel(grid, 0.5);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) CHECK(half.entries(i, j) == (j <= i ? 1.0 : 0.0));
    }
    for (double h : {0.1, 0.3, 0.7}) {
        const DiscreteKernelMatrix k = discrete_kernel(grid, h);
        CHECK(k.hurst == h);
        for (int i = 0; i < 16; ++i) {
            for (int j = i + 1; j < 16; ++j) CHECK(k.entries(i, j) == 0.0);
            CHECK(k.entries(i, i) != 0.0);
            const double t = grid.node(i + 1);
            CHECK(k.entries.row(i).sum() * grid.dt() == doctest::Approx(kernel_integral(t, 0.0, t, h)).scale(0.0).epsilon(1e-6));
            CHECK(k.entries.row(i).sum() * grid.dt() == doctest::Approx(oracle::kernel_integral(t, 0.0, t, h)).scale(0.0).epsilon(1e-6));
        }
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(16);
        const Eigen::VectorXd kb = k.entries * ones * grid.dt();
        CHECK(kb[15] == doctest::Approx(oracle::kernel_integral(1.0, 0.0, 1.0, h)).scale(0.0).epsilon(1e-6));
    }
}

TEST_CASE("y_from_b") {
    const ModelParams p{0.0, 0.3, 0.8, -0.2, 0.3};
    TimeGrid grid(1.0, 64);
    const DiscreteKernelMatrix k = discrete_kernel(grid, 0.3);
    const Eigen::VectorXd y0 = y_from_b(Eigen::VectorXd::Zero(64), k, p);
    CHECK(y0.size() == 65);
    for (int i = 0; i <= 64; ++i) CHECK(y0[i] == p.y0);

    ModelParams q = p;
    q.hurst = 0.5;
    const DiscreteKernelMatrix half = discrete_kernel(grid, 0.5);
    const Eigen::VectorXd yc = y_from_b(Eigen::VectorXd::Constant(64, 1.7), half, q);
    for (int i = 0; i <= 64; ++i) CHECK(yc[i] == doctest::Approx(q.y0 * std::exp(q.nu * 1.7 * grid.node(i))).scale(0.0).epsilon(1e-13));

    std::mt19937_64 gen(3);
    const Eigen::VectorXd b = random_vector(64, gen, -2.0, 2.0);
    const Eigen::VectorXd y = y_from_b(b, k, p);
    for (int i : {1, 2, 17, 40, 64}) {
        double integral = 0.0;
        for (int j = 1; j <= i; ++j) integral += b[j - 1] * oracle::kernel_integral(grid.node(i), grid.node(j - 1), grid.node(j), 0.3);
        CAPTURE(i);
        CHECK(y[i] == doctest::Approx(p.y0 * std::exp(p.nu * integral)).scale(0.0).epsilon(1e-9));
        CHECK(y[i] > 0.0);
    }
}

TEST_CASE("b_from_y") {
    const ModelParams p{0.0, 0.4, 1.3, 0.5, 0.25};
    TimeGrid grid(0.5, 32);
    const DiscreteKernelMatrix k = discrete_kernel(grid, 0.25);
    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(33, p.y0);
    CHECK(b_from_y(flat, k, p).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 gen(11);
    Eigen::VectorXd y = random_vector(33, gen, 0.1, 2.0);
    y[0] = p.y0;
    const Eigen::VectorXd back = y_from_b(b_from_y(y, k, p), k, p);
    CHECK((back - y).cwiseAbs().maxCoeff() < 1e-10 * y.maxCoeff());

    const Eigen::VectorXd b = random_vector(32, gen, -1.0, 1.0);
    CHECK((b_from_y(y_from_b(b, k, p), k, p) - b).cwiseAbs().maxCoeff() < 1e-10);

    ModelParams q = p;
    q.hurst = 0.5;
    const DiscreteKernelMatrix half = discrete_kernel(grid, 0.5);
    const Eigen::VectorXd derivative = b_from_y(y, half, q);
    for (int i = 1; i <= 32; ++i) {
        CHECK(derivative[i - 1] == doctest::Approx((std::log(y[i]) - std::log(y[i - 1])) / (q.nu * grid.dt())).scale(0.0).epsilon(1e-10));
    }

    DiscreteKernelMatrix singular = k;
    singular.entries(5, 5) = 0.0;
    CHECK_THROWS_AS(b_from_y(y, singular, p), NumericalError);
    Eigen::VectorXd bad = y;
    bad[3] = -1.0;
    CHECK_THROWS_AS(b_from_y(bad, k, p), DomainError);
}

TEST_CASE("energy") {
    const ModelParams p{0.1, 0.3, 0.9, -0.4, 0.3};
    TimeGrid grid(2.0, 20);
    const Eigen::VectorXd zero_b = Eigen::VectorXd::Zero(20);
    const Eigen::VectorXd flat_y = Eigen::VectorXd::Constant(21, p.y0);
    const double delta = 0.35;
    Eigen::VectorXd x(21);
    for (int i = 0; i <= 20; ++i) x[i] = p.x0 + delta * i / 20.0;
    const double rb2 = 1 - p.rho * p.rho;
    CHECK(energy(x, zero_b, flat_y, p, grid) == doctest::Approx(delta * delta / (2 * rb2 * p.y0 * p.y0 * 2.0)).scale(0.0).epsilon(1e-13));
    CHECK(energy(Eigen::VectorXd::Constant(21, p.x0), zero_b, flat_y, p, grid) == 0.0);
    CHECK_THROWS_AS(energy(x, Eigen::VectorXd::Zero(19), flat_y, p, grid), DomainError);
}

TEST_CASE("H = 1/2 energy equals the discrete hyperbolic energy") {
    std::mt19937_64 gen(7);
    TimeGrid grid(1.0, 50);
    const DiscreteKernelMatrix half = discrete_kernel(grid, 0.5);
    for (double nu : {1.0, 0.4, 2.5}) {
        for (double rho : {0.0, -0.6, 0.3}) {
            const ModelParams p{0.0, 0.25, nu, rho, 0.5};
            Eigen::VectorXd y = random_vector(51, gen, 0.1, 0.6);
            y[0] = p.y0;
            Eigen::VectorXd x = random_vector(51, gen, -0.3, 0.3);
            x[0] = p.x0;
            const Eigen::VectorXd b = b_from_y(y, half, p);
            CHECK(energy(x, b, y, p, grid) == doctest::Approx(hyperbolic_energy(x, y, p, grid)).scale(0.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("optimal_x_given_b") {
    const ModelParams p{0.05, 0.3, 0.9, -0.5, 0.3};
    TimeGrid grid(0.8, 24);
    const DiscreteKernelMatrix k = discrete_kernel(grid, p.hurst);
    std::mt19937_64 gen(23);
    const Eigen::VectorXd b = random_vector(24, gen, -1.0, 1.0);
    const Eigen::VectorXd y = y_from_b(b, k, p);
    const double dt = grid.dt();

    // Target reachable without the multiplier.
    double s1 = 0.0;
    for (int j = 0; j < 24; ++j) s1 += y[j] * b[j] * dt;
    const Eigen::VectorXd free_x = optimal_x_given_b(b, y, p.x0 + p.rho * s1, p, grid);
    for (int j = 0; j < 24; ++j) CHECK((free_x[j + 1] - free_x[j]) / dt == doctest::Approx(p.rho * y[j] * b[j]).scale(0.0).epsilon(1e-9));
    CHECK(energy(free_x, b, y, p, grid) == doctest::Approx(0.5 * b.squaredNorm() * dt).scale(0.0).epsilon(1e-12));

    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(25, p.y0);
    const Eigen::VectorXd lin = optimal_x_given_b(Eigen::VectorXd::Zero(24), flat, 0.45, p, grid);
    for (int i = 0; i <= 24; ++i) CHECK(lin[i] == doctest::Approx(p.x0 + 0.4 * i / 24.0).scale(0.0).epsilon(1e-13));
    const double rb2 = 1 - p.rho * p.rho;
    CHECK(energy(lin, Eigen::VectorXd::Zero(24), flat, p, grid) == doctest::Approx(0.16 / (2 * rb2 * p.y0 * p.y0 * 0.8)).scale(0.0).epsilon(1e-12));

    // KKT system of the discretized quadratic in xdot.
    const double target = 0.4;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(25, 25);
    Eigen::VectorXd rhs(25);
    for (int j = 0; j < 24; ++j) {
        kkt(j, j) = dt / (rb2 * y[j] * y[j]);
        kkt(j, 24) = kkt(24, j) = dt;
        rhs[j] = p.rho * b[j] * dt / (rb2 * y[j]);
    }
    rhs[24] = target - p.x0;
    const Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
    const Eigen::VectorXd x = optimal_x_given_b(b, y, target, p, grid);
    CHECK(x[0] == p.x0);
    CHECK(std::abs(x[24] - target) < 1e-10);
    for (int j = 0; j < 24; ++j) CHECK(std::abs((x[j + 1] - x[j]) / dt - sol[j]) < 1e-9);
}

TEST_CASE("minimize_rate recovers SABR at H = 1/2") {
    const ModelParams zero_corr{0.0, 0.2, 0.8, 0.0, 0.5};
    for (double k : {-0.4, -0.1, 0.2, 0.5}) {
        const double sigma = fsabr_smile_ldp(k, 1.0, zero_corr, 128);
        CHECK(sigma == doctest::Approx(sabr_formula(k, 1.0, 1.0, 0.2, 0.8, 0.0, 1.0)).scale(0.0).epsilon(1e-2));
    }
    const ModelParams p{0.0, 0.13927, 0.5778, -0.06867, 0.5};
    for (int i = -10; i <= 10; ++i) {
        if (i == 0) continue;
        const double k = 0.05 * i;
        CAPTURE(k);
        CHECK(fsabr_smile_ldp(k, 1.0, p, 128) == doctest::Approx(sabr_formula(k, 1.0, 1.0, p.y0, p.nu, p.rho, 1.0)).scale(0.0).epsilon(1e-2));
    }
}

TEST_CASE("minimize_rate solution structure") {
    const ModelParams p{0.1, 0.25, 1.1, -0.5, 0.3};
    const VariationalSolution sol = minimize_rate(0.4, 0.5, p, 64);
    CHECK(sol.converged);
    CHECK(sol.iterations > 0);
    CHECK(sol.b.size() == 64);
    CHECK(sol.x.size() == 65);
    CHECK(sol.x[0] == p.x0);
    CHECK(std::abs(sol.x[64] - 0.4) < 1e-10);
    CHECK(sol.energy >= 0.0);
    const DiscreteKernelMatrix k = discrete_kernel(sol.grid, p.hurst);
    const Eigen::VectorXd kb = k.entries * sol.b * sol.grid.dt();
    CHECK(sol.y[0] == p.y0);
    for (int i = 1; i <= 64; ++i) CHECK(sol.y[i] == doctest::Approx(p.y0 * std::exp(p.nu * kb[i - 1])).scale(0.0).epsilon(1e-14));
    for (std::size_t i = 1; i < sol.energy_history.size(); ++i) CHECK(sol.energy_history[i] <= sol.energy_history[i - 1]);
    CHECK(sol.energy_history.back() == doctest::Approx(sol.energy).scale(0.0).epsilon(1e-12));

    // Minimality against perturbed feasible candidates.
    std::mt19937_64 gen(99);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 100; ++trial) {
        const double scale = trial < 50 ? 1e-2 : 1e-1;
        Eigen::VectorXd b = sol.b;
        for (int j = 0; j < 64; ++j) b[j] += scale * n01(gen);
        const Eigen::VectorXd y = y_from_b(b, k, p);
        Eigen::VectorXd x = optimal_x_given_b(b, y, 0.4, p, sol.grid);
        for (int j = 1; j < 64; ++j) x[j] += 0.1 * scale * n01(gen);
        CHECK(energy(x, b, y, p, sol.grid) >= sol.energy);
    }

    CHECK_THROWS_AS(minimize_rate(0.4, 0.5, p, 8), DomainError);
    CHECK_THROWS_AS(minimize_rate(p.x0, 0.5, p, 32), DomainError);
}

TEST_CASE("rate is quadratic near the money") {
    for (double h : {0.3, 0.5}) {
        const ModelParams p{0.0, 1.0, 1.0, -0.3, h};
        const double full = minimize_rate(0.02, 1.0, p, 64).energy;
        const double half = minimize_rate(0.01, 1.0, p, 64).energy;
        CHECK(full / half == doctest::Approx(4.0).scale(0.0).epsilon(0.05));
    }
}

TEST_CASE("rate converges under grid refinement") {
    const ModelParams p{0.0, 0.3, 1.0, -0.4, 0.3};
    const double i64 = minimize_rate(0.3, 0.5, p, 64).energy;
    const double i128 = minimize_rate(0.3, 0.5, p, 128).energy;
    const double i256 = minimize_rate(0.3, 0.5, p, 256).energy;
    CHECK(std::abs(i256 - i128) < 0.02 * i256);
    CHECK(std::abs(i256 - i128) < std::abs(i128 - i64));
}

TEST_CASE("hyperbolic scaling symmetry") {
    const ModelParams base{0.0, 0.2, 0.7, 0.0, 0.5};
    const double reference = minimize_rate(0.3, 1.0, base, 64).energy;
    for (double c : {0.5, 3.0}) {
        ModelParams scaled = base;
        scaled.y0 *= c;
        CHECK(minimize_rate(0.3 * c, 1.0, scaled, 64).energy == doctest::Approx(reference).scale(0.0).epsilon(1e-6));
    }
}

TEST_CASE("fsabr_smile_ldp") {
    const ModelParams p{0.0, 0.15, 0.9, 0.0, 0.5};
    CHECK(fsabr_smile_ldp(1e-4, 1.0, p, 64) == doctest::Approx(p.y0).scale(0.0).epsilon(1e-4));
    CHECK(fsabr_smile_ldp(-1e-4, 1.0, p, 64) == doctest::Approx(p.y0).scale(0.0).epsilon(1e-4));

    const ModelParams rough{0.0, 0.13927, 0.5778, -0.06867, 0.3};
    const double ratio = fsabr_smile_ldp(0.2, 0.1, rough, 128) / implied_vol_fsabr(0.2, 0.1, rough).implied_vol;
    CHECK(ratio >= 0.7);
    CHECK(ratio <= 1.3);
    CHECK_THROWS_AS(fsabr_smile_ldp(0.0, 1.0, p, 64), DomainError);
}
