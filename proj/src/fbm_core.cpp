#include "fsabr/fbm_core.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsabr/errors.hpp"
#include "fsabr/parallel.hpp"

namespace fsabr {
namespace {

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst exponent must lie in (0, 1)");
}

}  // namespace

double mg_constant(double hurst) {
    check_hurst(hurst);
    const double num = 2.0 * hurst * std::tgamma(1.5 - hurst);
    const double den = std::tgamma(2.0 - 2.0 * hurst) * std::tgamma(hurst + 0.5);
    return std::sqrt(num / den);
}

MolchanGolosovKernel::MolchanGolosovKernel(double hurst)
    : hurst_(hurst),
      c_h_(mg_constant(hurst)),
      brownian_(hurst == 0.5),
      f_(hurst - 0.5, 2.0 * hurst, hurst + 0.5) {}

double MolchanGolosovKernel::exponent_at_zero() const { return -std::abs(hurst_ - 0.5); }

double MolchanGolosovKernel::operator()(double t, double s) const {
    if (!(s > 0.0 && s < t)) {
        std::ostringstream msg;
        msg << "Molchan-Golosov kernel needs 0 < s < t, got t = " << t << ", s = " << s;
        throw DomainError(msg.str());
    }
    return with_gap(t, s, t - s);
}

double MolchanGolosovKernel::with_gap(double t, double s, double gap) const {
    if (brownian_) return 1.0;
    return c_h_ * std::pow(gap * s / t, hurst_ - 0.5) * f_.evaluate(gap / t, s / t);
}

namespace {

// Integrates g(s, gaps...) over [a, b] where the integrand is singular at 0
// and at `end` (>= b). The half near `end` is parametrized by v = end - u so
// that nodes close to `end` keep full relative precision in the gap.
template <class G>
double split_integral(double a, double b, double end, double alpha_zero, double alpha_end,
                      const std::vector<Singularity>& extra_right, G&& g) {
    const double m = 0.5 * (a + b);
    const std::vector<Singularity> left_sing{{0.0, alpha_zero}, {end, alpha_end}};
    const QuadratureRule left = composite_rule(a, m, left_sing);
    double sum = left.integrate([&](double u) { return g(u, end - u); });
    std::vector<Singularity> right_sing{{0.0, alpha_end}, {end, alpha_zero}};
    right_sing.insert(right_sing.end(), extra_right.begin(), extra_right.end());
    const QuadratureRule right = composite_rule(end - b, end - m, right_sing);
    sum += right.integrate([&](double v) { return g(end - v, v); });
    return sum;
}

}  // namespace

double MolchanGolosovKernel::integral(double t, double a, double b) const {
    if (!(a >= 0.0 && b > a && b <= t)) throw DomainError("kernel integral needs 0 <= a < b <= t");
    if (brownian_) return b - a;
    return split_integral(a, b, t, exponent_at_zero(), exponent_at_t(), {},
                          [&](double s, double gap) { return with_gap(t, s, gap); });
}

double MolchanGolosovKernel::product_integral(double t1, double t2, double a, double b) const {
    const double lo_t = std::min(t1, t2);
    const double hi_t = std::max(t1, t2);
    if (!(a >= 0.0 && b > a && b <= lo_t)) throw DomainError("kernel product integral needs 0 <= a < b <= min(t1, t2)");
    if (brownian_) return b - a;
    const double offset = hi_t - lo_t;
    if (offset == 0.0) {
        return split_integral(a, b, lo_t, 2.0 * exponent_at_zero(), 2.0 * exponent_at_t(), {},
                              [&](double s, double gap) {
                                  const double k = with_gap(lo_t, s, gap);
                                  return k * k;
                              });
    }
    // In the right-half variable v = lo_t - u, the second singularity sits at v = -offset.
    return split_integral(a, b, lo_t, 2.0 * exponent_at_zero(), exponent_at_t(), {{-offset, exponent_at_t()}},
                          [&](double s, double gap) {
                              return with_gap(lo_t, s, gap) * with_gap(hi_t, s, gap + offset);
                          });
}

double mg_kernel(double t, double s, double hurst) { return MolchanGolosovKernel(hurst)(t, s); }

double autocov(double t, double s, double hurst) {
    check_hurst(hurst);
    if (t < 0.0 || s < 0.0) throw DomainError("autocov needs t, s >= 0");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double kernel_integral(double t, double a, double b, double hurst) {
    return MolchanGolosovKernel(hurst).integral(t, a, b);
}

Eigen::MatrixXd kernel_cell_integrals(const TimeGrid& grid, double hurst) {
    const MolchanGolosovKernel kernel(hurst);
    const std::size_t n = grid.n_steps();
    Eigen::MatrixXd cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t l = 1; l <= i; ++l) {
            try {
                cells(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(l - 1)) =
                    kernel.integral(grid.node(i), grid.node(l - 1), grid.node(l));
            } catch (const std::exception& e) {
                std::ostringstream msg;
                msg << "kernel cell integral (" << i << ", " << l << ") failed: " << e.what();
                throw NumericalError(msg.str());
            }
        }
    }
    return cells;
}

Eigen::MatrixXd joint_covariance(const TimeGrid& grid, double hurst) {
    check_hurst(hurst);
    const auto n = static_cast<Eigen::Index>(grid.n_steps());
    const Eigen::MatrixXd cells = kernel_cell_integrals(grid, hurst);
    // prefix(i, j) = sum_{l <= j} cells(i, l) = cov(B^H_{t_{i+1}}, B_{t_{j+1}}) for j <= i.
    Eigen::MatrixXd prefix = cells;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 1; j <= i; ++j) prefix(i, j) += prefix(i, j - 1);
    }
    Eigen::MatrixXd cov(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = grid.node(static_cast<std::size_t>(i + 1));
        for (Eigen::Index j = 0; j < n; ++j) {
            const double tj = grid.node(static_cast<std::size_t>(j + 1));
            cov(i, j) = std::min(ti, tj);
            cov(n + i, n + j) = autocov(ti, tj, hurst);
            const double cross = prefix(i, std::min(i, j));
            cov(n + i, j) = cross;
            cov(j, n + i) = cross;
        }
    }
    return cov;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
    return std::mt19937_64(seq);
}

JointFbmSampler::JointFbmSampler(const TimeGrid& grid, double hurst) : grid_(grid), hurst_(hurst) {
    const Eigen::MatrixXd cov = joint_covariance(grid, hurst);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        const double scale = cov.diagonal().maxCoeff();
        bool ok = false;
        for (double eps : {1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
            Eigen::MatrixXd jittered = cov;
            jittered.diagonal().array() += eps * scale;
            llt.compute(jittered);
            if (llt.info() == Eigen::Success) {
                jitter_ = eps * scale;
                ok = true;
                break;
            }
        }
        if (!ok) throw NumericalError("joint covariance is not positive definite even with 1e-10 diagonal jitter");
    }
    chol_ = llt.matrixL();
}

void JointFbmSampler::sample_block(std::uint64_t seed, std::size_t n_paths, std::size_t block, Eigen::MatrixXd& b,
                                   Eigen::MatrixXd& bh, Eigen::MatrixXd& w) const {
    const std::size_t first = block * kBlockSize;
    if (first >= n_paths) throw DomainError("sample block index out of range");
    const std::size_t count = std::min(kBlockSize, n_paths - first);
    const auto n = static_cast<Eigen::Index>(grid_.n_steps());
    const auto m = static_cast<Eigen::Index>(count);
    const double sqrt_dt = std::sqrt(grid_.dt());

    Eigen::MatrixXd z(2 * n, m);
    w.resize(n + 1, m);
    std::normal_distribution<double> normal;
    for (Eigen::Index p = 0; p < m; ++p) {
        auto gen = path_rng(seed, first + static_cast<std::size_t>(p));
        for (Eigen::Index r = 0; r < 2 * n; ++r) z(r, p) = normal(gen);
        w(0, p) = 0.0;
        for (Eigen::Index r = 1; r <= n; ++r) w(r, p) = w(r - 1, p) + sqrt_dt * normal(gen);
    }
    const Eigen::MatrixXd y = chol_.triangularView<Eigen::Lower>() * z;
    b.resize(n + 1, m);
    bh.resize(n + 1, m);
    b.row(0).setZero();
    bh.row(0).setZero();
    b.bottomRows(n) = y.topRows(n);
    bh.bottomRows(n) = y.bottomRows(n);
}

PathBundle sample_fbm_joint(const TimeGrid& grid, double hurst, std::size_t n_paths, std::uint64_t seed,
                            std::size_t workers) {
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    const JointFbmSampler sampler(grid, hurst);
    const auto cols = static_cast<Eigen::Index>(grid.n_steps() + 1);
    const auto rows = static_cast<Eigen::Index>(n_paths);
    PathBundle bundle{grid, PathMatrix(rows, cols), PathMatrix(rows, cols), PathMatrix(rows, cols), {}, {}};
    parallel_for(JointFbmSampler::block_count(n_paths), workers, [&](std::size_t block) {
        Eigen::MatrixXd b, bh, w;
        sampler.sample_block(seed, n_paths, block, b, bh, w);
        const auto first = static_cast<Eigen::Index>(block * JointFbmSampler::kBlockSize);
        const Eigen::Index m = b.cols();
        bundle.b_paths.middleRows(first, m) = b.transpose();
        bundle.bh_paths.middleRows(first, m) = bh.transpose();
        bundle.w_paths.middleRows(first, m) = w.transpose();
    });
    return bundle;
}

}  // namespace fsabr
