#include "fsabr/ldp_variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fsabr/errors.hpp"
#include "fsabr/fbm_core.hpp"

namespace fsabr {

namespace {

void check_sizes(const Eigen::VectorXd& b, const Eigen::VectorXd& y, const TimeGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.n_steps());
    if (b.size() != n || y.size() != n + 1) {
        std::ostringstream msg;
        msg << "expected b of size " << n << " and y of size " << n + 1 << ", got " << b.size() << " and " << y.size();
        throw DomainError(msg.str());
    }
}

// Reduced objective E(b) = (dk - rho S1)^2/(2 rho_bar^2 S2) + 1/2 sum b^2 dt with
// S1 = sum y_{j-1} b_j dt, S2 = sum y_{j-1}^2 dt.
class RateObjective {
public:
    RateObjective(const DiscreteKernelMatrix& kernel, const ModelParams& p, double dk)
        : k_(kernel.entries), p_(p), dk_(dk), dt_(kernel.grid.dt()), n_(k_.rows()),
          rho_bar2_(p.rho_bar() * p.rho_bar()) {}

    double value(const Eigen::VectorXd& b) const { return from_log_path(b, log_path(b)); }

    // Central differences. Bumping b_m shifts ln y_i by nu K[i][m] h dt for
    // i >= m, so each bumped value is recomputed in O(n).
    Eigen::VectorXd gradient(const Eigen::VectorXd& b) const {
        const Eigen::VectorXd base = log_path(b);
        Eigen::VectorXd g(n_);
        Eigen::VectorXd bumped_b = b;
        Eigen::VectorXd bumped = base;
        const double step0 = std::cbrt(std::numeric_limits<double>::epsilon());
        for (Eigen::Index m = 0; m < n_; ++m) {
            const double h = step0 * std::max(1.0, std::abs(b[m]));
            double f[2];
            for (int side = 0; side < 2; ++side) {
                const double delta = side == 0 ? h : -h;
                bumped_b[m] = b[m] + delta;
                for (Eigen::Index i = m; i < n_; ++i) bumped[i + 1] = base[i + 1] + p_.nu * k_(i, m) * delta * dt_;
                f[side] = from_log_path(bumped_b, bumped);
            }
            g[m] = (f[0] - f[1]) / (2.0 * h);
            bumped_b[m] = b[m];
            for (Eigen::Index i = m; i < n_; ++i) bumped[i + 1] = base[i + 1];
        }
        return g;
    }

private:
    Eigen::VectorXd log_path(const Eigen::VectorXd& b) const {
        Eigen::VectorXd out(n_ + 1);
        out[0] = std::log(p_.y0);
        out.tail(n_).noalias() = k_.triangularView<Eigen::Lower>() * b;
        out.tail(n_) *= p_.nu * dt_;
        out.tail(n_).array() += out[0];
        return out;
    }

    double from_log_path(const Eigen::VectorXd& b, const Eigen::VectorXd& log_y) const {
        double s1 = 0.0, s2 = 0.0, sb = 0.0;
        for (Eigen::Index j = 0; j < n_; ++j) {
            const double y = std::exp(log_y[j]);
            s1 += y * b[j];
            s2 += y * y;
            sb += b[j] * b[j];
        }
        const double r = dk_ - p_.rho * s1 * dt_;
        return r * r / (2.0 * rho_bar2_ * s2 * dt_) + 0.5 * sb * dt_;
    }

    const Eigen::MatrixXd& k_;
    ModelParams p_;
    double dk_;
    double dt_;
    Eigen::Index n_;
    double rho_bar2_;
};

}  // namespace

DiscreteKernelMatrix discrete_kernel(const TimeGrid& grid, double hurst) {
    Eigen::MatrixXd cells = kernel_cell_integrals(grid, hurst) / grid.dt();
    if (hurst == 0.5) cells = Eigen::MatrixXd(Eigen::MatrixXd::Ones(cells.rows(), cells.cols()).triangularView<Eigen::Lower>());
    return {std::move(cells), grid, hurst};
}

Eigen::VectorXd y_from_b(const Eigen::VectorXd& b, const DiscreteKernelMatrix& k, const ModelParams& p) {
    const auto n = k.entries.rows();
    if (b.size() != n) throw DomainError("b and kernel sizes differ");
    Eigen::VectorXd y(n + 1);
    y[0] = p.y0;
    Eigen::VectorXd integral = k.entries.triangularView<Eigen::Lower>() * b;
    integral *= k.grid.dt();
    for (Eigen::Index i = 0; i < n; ++i) y[i + 1] = p.y0 * std::exp(p.nu * integral[i]);
    return y;
}

Eigen::VectorXd b_from_y(const Eigen::VectorXd& y, const DiscreteKernelMatrix& k, const ModelParams& p) {
    const auto n = k.entries.rows();
    if (y.size() != n + 1) throw DomainError("y must have one entry per grid node");
    if ((y.array() <= 0.0).any()) throw DomainError("y must be positive");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (k.entries(i, i) == 0.0) throw NumericalError("singular kernel matrix: zero diagonal entry");
    }
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] = std::log(y[i + 1] / p.y0) / (p.nu * k.grid.dt());
    return k.entries.triangularView<Eigen::Lower>().solve(rhs);
}

double energy(const Eigen::VectorXd& x, const Eigen::VectorXd& b, const Eigen::VectorXd& y, const ModelParams& p,
              const TimeGrid& grid) {
    check_sizes(b, y, grid);
    if (x.size() != y.size()) throw DomainError("x must have one entry per grid node");
    const double dt = grid.dt();
    const double rho_bar2 = p.rho_bar() * p.rho_bar();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        const double xdot = (x[j + 1] - x[j]) / dt;
        const double r = xdot / y[j] - p.rho * b[j];
        sum += r * r / rho_bar2 + b[j] * b[j];
    }
    return 0.5 * sum * dt;
}

double hyperbolic_energy(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ModelParams& p,
                         const TimeGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.n_steps());
    if (x.size() != n + 1 || y.size() != n + 1) throw DomainError("x and y must have one entry per grid node");
    const double dt = grid.dt();
    const double rho_bar2 = p.rho_bar() * p.rho_bar();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double xdot = (x[j + 1] - x[j]) / dt;
        const double ydot = y[j] * std::log(y[j + 1] / y[j]) / dt / p.nu;
        sum += (xdot * xdot - 2.0 * p.rho * xdot * ydot + ydot * ydot) / (rho_bar2 * y[j] * y[j]);
    }
    return 0.5 * sum * dt;
}

Eigen::VectorXd optimal_x_given_b(const Eigen::VectorXd& b, const Eigen::VectorXd& y, double k, const ModelParams& p,
                                  const TimeGrid& grid) {
    check_sizes(b, y, grid);
    if (!std::isfinite(k)) throw DomainError("terminal value must be finite");
    const double dt = grid.dt();
    const double rho_bar2 = p.rho_bar() * p.rho_bar();
    const auto n = b.size();
    double s1 = 0.0, s2 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        s1 += y[j] * b[j];
        s2 += y[j] * y[j];
    }
    const double mu = (k - p.x0 - p.rho * s1 * dt) / (rho_bar2 * s2 * dt);
    Eigen::VectorXd x(n + 1);
    x[0] = p.x0;
    for (Eigen::Index j = 0; j < n; ++j) x[j + 1] = x[j] + (p.rho * y[j] * b[j] + mu * rho_bar2 * y[j] * y[j]) * dt;
    x[n] = k;  // exact by construction up to rounding
    return x;
}

VariationalSolution minimize_rate(double k, double horizon, const ModelParams& p, std::size_t n) {
    p.validate();
    if (n < 16) throw DomainError("minimize_rate needs n >= 16");
    if (k == p.x0) throw DomainError("minimize_rate needs k != x0");
    if (p.hurst >= 1.0 || p.hurst <= 0.0) throw DomainError("hurst must lie in (0, 1)");
    TimeGrid grid(horizon, n);
    const DiscreteKernelMatrix kernel = discrete_kernel(grid, p.hurst);
    const RateObjective objective(kernel, p, k - p.x0);
    const auto dim = static_cast<Eigen::Index>(n);
    const double dt = grid.dt();

    constexpr double kGradTol = 1e-7;
    constexpr int kMaxIter = 500;

    VariationalSolution out{grid, Eigen::VectorXd::Zero(dim), {}, {}, 0.0, 0, false, {}};
    Eigen::VectorXd& b = out.b;
    double f = objective.value(b);
    Eigen::VectorXd g = objective.gradient(b);
    // The Hessian of the b^2 dt/2 term is dt I.
    Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(dim, dim) / dt;
    out.energy_history.push_back(f);

    for (int iter = 0; iter < kMaxIter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < kGradTol) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd dir = -inv_h * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            inv_h = Eigen::MatrixXd::Identity(dim, dim) / dt;
            dir = -inv_h * g;
            slope = g.dot(dir);
        }
        double step = 1.0;
        double f_new = f;
        Eigen::VectorXd b_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            b_new = b + step * dir;
            f_new = objective.value(b_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        out.iterations = iter + 1;
        if (!accepted) break;
        const Eigen::VectorXd g_new = objective.gradient(b_new);
        const Eigen::VectorXd s = b_new - b;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const Eigen::VectorXd hy = inv_h * yv;
            const double yhy = yv.dot(hy);
            inv_h += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) - (hy * s.transpose() + s * hy.transpose()) / sy;
        }
        b = b_new;
        f = f_new;
        g = g_new;
        out.energy_history.push_back(f);
    }
    if (!out.converged && g.lpNorm<Eigen::Infinity>() < kGradTol) out.converged = true;

    out.y = y_from_b(b, kernel, p);
    out.x = optimal_x_given_b(b, out.y, k, p, grid);
    out.energy = energy(out.x, b, out.y, p, grid);
    return out;
}

double fsabr_smile_ldp(double k, double horizon, const ModelParams& p, std::size_t n) {
    const VariationalSolution sol = minimize_rate(k, horizon, p, n);
    return std::abs(k - p.x0) / std::sqrt(horizon * 2.0 * sol.energy);
}

}  // namespace fsabr
