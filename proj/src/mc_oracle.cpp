#include "fsabr/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fsabr/density_asymptotics.hpp"
#include "fsabr/errors.hpp"
#include "fsabr/parallel.hpp"
#include "fsabr/quadrature.hpp"

namespace fsabr {

namespace {

// Order-fixed pairwise summation.
double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

struct Terminal {
    double x, y, v, zeta;
};

// Left-point Euler along column `col` of a sampled block. When x_row is
// non-null the whole X path is written there.
Terminal euler_column(const ModelParams& p, double dt, const Eigen::MatrixXd& b, const Eigen::MatrixXd& bh,
                      const Eigen::MatrixXd& w, Eigen::Index col, double* x_row) {
    const double rho_bar = p.rho_bar();
    const Eigen::Index n = b.rows() - 1;
    double x = p.x0, v = 0.0, zeta = 0.0;
    if (x_row) x_row[0] = x;
    for (Eigen::Index r = 1; r <= n; ++r) {
        const double y_prev = p.y0 * std::exp(p.nu * bh(r - 1, col));
        const double db = b(r, col) - b(r - 1, col);
        const double dw = w(r, col) - w(r - 1, col);
        x += y_prev * (p.rho * db + rho_bar * dw) - 0.5 * y_prev * y_prev * dt;
        v += y_prev * y_prev * dt;
        zeta += y_prev * db;
        if (x_row) x_row[r] = x;
    }
    return {x, p.y0 * std::exp(p.nu * bh(n, col)), v, zeta};
}

void check_paths(std::size_t n_paths) {
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
}

double bump1(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return q * q * q;
}

// int bump1((x - x0)/a) N(x; mean, sd^2) dx by Gauss-Legendre on the overlap
// of the bump support with mean +- 12 sd.
double gaussian_bump_integral(double x0, double a, double mean, double sd) {
    const double lo = std::max(x0 - a, mean - 12.0 * sd);
    const double hi = std::min(x0 + a, mean + 12.0 * sd);
    if (!(hi > lo)) return 0.0;
    const QuadratureRule& gl = gauss_legendre(64);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) {
        const double x = mid + half * gl.nodes[i];
        const double z = (x - mean) / sd;
        sum += gl.weights[i] * bump1((x - x0) / a) * std::exp(-0.5 * z * z);
    }
    return sum * half / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

PathBundle simulate(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                    std::size_t workers) {
    p.validate();
    check_paths(n_paths);
    const JointFbmSampler sampler(grid, p.hurst);
    const auto cols = static_cast<Eigen::Index>(grid.n_steps() + 1);
    const auto rows = static_cast<Eigen::Index>(n_paths);
    PathBundle bundle{grid,
                      PathMatrix(rows, cols),
                      PathMatrix(rows, cols),
                      PathMatrix(rows, cols),
                      PathMatrix(rows, cols),
                      PathMatrix(rows, cols)};
    parallel_for(JointFbmSampler::block_count(n_paths), workers, [&](std::size_t block) {
        Eigen::MatrixXd b, bh, w;
        sampler.sample_block(seed, n_paths, block, b, bh, w);
        const auto first = static_cast<Eigen::Index>(block * JointFbmSampler::kBlockSize);
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            const Eigen::Index row = first + c;
            bundle.b_paths.row(row) = b.col(c).transpose();
            bundle.bh_paths.row(row) = bh.col(c).transpose();
            bundle.w_paths.row(row) = w.col(c).transpose();
            for (Eigen::Index k = 0; k < b.rows(); ++k) bundle.y_paths(row, k) = p.y0 * std::exp(p.nu * bh(k, c));
            euler_column(p, grid.dt(), b, bh, w, c, bundle.x_paths.row(row).data());
        }
    });
    return bundle;
}

TerminalSamples simulate_terminal(const ModelParams& p, const TimeGrid& grid, std::size_t n_paths,
                                  std::uint64_t seed, std::size_t workers) {
    p.validate();
    check_paths(n_paths);
    const JointFbmSampler sampler(grid, p.hurst);
    TerminalSamples out;
    out.x.resize(n_paths);
    out.y.resize(n_paths);
    out.v.resize(n_paths);
    out.zeta.resize(n_paths);
    parallel_for(JointFbmSampler::block_count(n_paths), workers, [&](std::size_t block) {
        Eigen::MatrixXd b, bh, w;
        sampler.sample_block(seed, n_paths, block, b, bh, w);
        const std::size_t first = block * JointFbmSampler::kBlockSize;
        for (Eigen::Index c = 0; c < b.cols(); ++c) {
            const Terminal term = euler_column(p, grid.dt(), b, bh, w, c, nullptr);
            const std::size_t i = first + static_cast<std::size_t>(c);
            out.x[i] = term.x;
            out.y[i] = term.y;
            out.v[i] = term.v;
            out.zeta[i] = term.zeta;
        }
    });
    return out;
}

double silverman_bandwidth(const std::vector<double>& samples) {
    const double n = static_cast<double>(samples.size());
    const double mean = pairwise_sum(samples) / n;
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
    const double sd = std::sqrt(pairwise_sum(sq) / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw DomainError("degenerate sample: zero variance");
    return sd * std::pow(n, -1.0 / 6.0);
}

Eigen::MatrixXd kde2d(const std::vector<double>& samples_x, const std::vector<double>& samples_y,
                      const std::vector<double>& eval_x, const std::vector<double>& eval_y) {
    if (samples_x.size() != samples_y.size()) throw DomainError("kde2d sample vectors differ in length");
    if (samples_x.size() < 1000) throw DomainError("kde2d needs at least 1000 samples");
    const double hx = silverman_bandwidth(samples_x);
    const double hy = silverman_bandwidth(samples_y);
    const auto nx = static_cast<Eigen::Index>(eval_x.size());
    const auto ny = static_cast<Eigen::Index>(eval_y.size());
    const std::size_t n = samples_x.size();
    // Product kernel: sum_s Kx(x_i - xs) Ky(y_j - ys) is a matrix product.
    constexpr std::size_t kChunk = 2048;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nx, ny);
    Eigen::MatrixXd a, b;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t m = std::min(kChunk, n - start);
        a.resize(nx, static_cast<Eigen::Index>(m));
        b.resize(ny, static_cast<Eigen::Index>(m));
        for (std::size_t s = 0; s < m; ++s) {
            const auto c = static_cast<Eigen::Index>(s);
            for (Eigen::Index i = 0; i < nx; ++i) {
                const double u = (eval_x[i] - samples_x[start + s]) / hx;
                a(i, c) = std::exp(-0.5 * u * u);
            }
            for (Eigen::Index j = 0; j < ny; ++j) {
                const double u = (eval_y[j] - samples_y[start + s]) / hy;
                b(j, c) = std::exp(-0.5 * u * u);
            }
        }
        out.noalias() += a * b.transpose();
    }
    return out / (2.0 * std::numbers::pi * hx * hy * static_cast<double>(n));
}

McEstimate price_from_samples(const std::vector<double>& x_terminal, double k, bool is_call) {
    const std::size_t count = x_terminal.size();
    if (count < 2) throw DomainError("pricing needs at least 2 samples");
    const double strike = std::exp(k);
    std::vector<double> payoff(count), sq(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = std::exp(x_terminal[i]);
        payoff[i] = is_call ? std::max(s - strike, 0.0) : std::max(strike - s, 0.0);
    }
    const double n = static_cast<double>(count);
    const double mean = pairwise_sum(payoff) / n;
    for (std::size_t i = 0; i < count; ++i) sq[i] = (payoff[i] - mean) * (payoff[i] - mean);
    return {mean, std::sqrt(pairwise_sum(sq) / (n - 1.0) / n)};
}

McEstimate mc_price(const ModelParams& p, double t, double k, bool is_call, std::size_t n_paths, std::uint64_t seed,
                    std::size_t n_steps, std::size_t workers) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    if (n_paths < 2) throw DomainError("mc_price needs at least 2 paths");
    return price_from_samples(simulate_terminal(p, TimeGrid(t, n_steps), n_paths, seed, workers).x, k, is_call);
}

McEstimate mc_call(const ModelParams& p, double t, double k, std::size_t n_paths, std::uint64_t seed,
                   std::size_t n_steps, std::size_t workers) {
    return mc_price(p, t, k, true, n_paths, seed, n_steps, workers);
}

double bump(const ModelParams& p, double x, double y) {
    return bump1((x - p.x0) / p.y0) * bump1((y - p.y0) / p.y0);
}

ErrorStudy error_order_study(const ModelParams& p, std::size_t n_steps, const std::vector<double>& t_list,
                             std::size_t n_paths, std::uint64_t seed, std::size_t workers) {
    p.validate();
    if (t_list.size() < 3) throw DomainError("error_order_study needs at least 3 times");
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (!(t_list[i] > 0.0) || (i > 0 && !(t_list[i] < t_list[i - 1]))) {
            throw DomainError("t_list must be positive and strictly decreasing");
        }
    }
    if (n_paths < 2) throw DomainError("error_order_study needs at least 2 paths");
    const double rho_bar = p.rho_bar();
    const double n = static_cast<double>(n_paths);
    ErrorStudy study;
    for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
        const double t = t_list[ti];
        const TerminalSamples paths = simulate_terminal(p, TimeGrid(t, n_steps), n_paths, seed + ti, workers);
        std::vector<double> exact(n_paths), approx(n_paths);
        constexpr std::size_t kChunk = 1024;
        parallel_for((n_paths + kChunk - 1) / kChunk, workers, [&](std::size_t chunk) {
            const std::size_t end = std::min(n_paths, (chunk + 1) * kChunk);
            for (std::size_t i = chunk * kChunk; i < end; ++i) {
                const double fy = bump1((paths.y[i] - p.y0) / p.y0);
                if (fy == 0.0) {
                    exact[i] = approx[i] = 0.0;
                    continue;
                }
                const double mean = p.x0 + p.rho * paths.zeta[i] - 0.5 * paths.v[i];
                exact[i] = fy * gaussian_bump_integral(p.x0, p.y0, mean, rho_bar * std::sqrt(paths.v[i]));
                const GaussianSection sec = approx_conditional_x(p, t, paths.y[i]);
                approx[i] = fy * gaussian_bump_integral(p.x0, p.y0, sec.mean, sec.sd);
            }
        });
        std::vector<double> diff(n_paths), sq(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) diff[i] = exact[i] - approx[i];
        const double mean_diff = pairwise_sum(diff) / n;
        for (std::size_t i = 0; i < n_paths; ++i) sq[i] = (diff[i] - mean_diff) * (diff[i] - mean_diff);
        ErrorStudyRow row;
        row.t = t;
        row.mc_value = pairwise_sum(exact) / n;
        row.approx_value = pairwise_sum(approx) / n;
        row.discrepancy = std::abs(mean_diff);
        row.std_err = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
        study.rows.push_back(row);
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(study.rows.size());
    for (const auto& row : study.rows) {
        const double lx = std::log(row.t), ly = std::log(row.discrepancy);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    study.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return study;
}

}  // namespace fsabr
