#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fsabr/hypergeometric.hpp"
#include "fsabr/params.hpp"
#include "fsabr/quadrature.hpp"

namespace fsabr {

double mg_constant(double hurst);

// Molchan-Golosov kernel
//   K_H(t,s) = c_H (t-s)^{H-1/2} 2F1(H-1/2, 1/2-H; H+1/2; 1-t/s),  0 < s < t,
// evaluated through the Pfaff form c_H ((t-s) s / t)^{H-1/2} 2F1(H-1/2, 2H; H+1/2; (t-s)/t).
class MolchanGolosovKernel {
public:
    explicit MolchanGolosovKernel(double hurst);

    // Throws DomainError unless 0 < s < t.
    double operator()(double t, double s) const;
    // K(t, s) with gap = t - s supplied separately, for s within rounding of t.
    double with_gap(double t, double s, double gap) const;

    double hurst() const { return hurst_; }
    double constant() const { return c_h_; }
    bool brownian() const { return brownian_; }

    // Algebraic behaviour of s -> K(t, s) at s = 0 and s = t.
    double exponent_at_zero() const;
    double exponent_at_t() const { return hurst_ - 0.5; }

    // int_a^b K(t,u) du for 0 <= a < b <= t.
    double integral(double t, double a, double b) const;
    // int_a^b K(t1,u) K(t2,u) du for 0 <= a < b <= min(t1, t2).
    double product_integral(double t1, double t2, double a, double b) const;

private:
    double hurst_;
    double c_h_;
    bool brownian_;
    Hyp2F1 f_;
};

double mg_kernel(double t, double s, double hurst);

// R(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double autocov(double t, double s, double hurst);

double kernel_integral(double t, double a, double b, double hurst);

// cells(i-1, l-1) = int_{t_{l-1}}^{t_l} K_H(t_i, u) du for 1 <= l <= i <= n,
// zero above the diagonal.
Eigen::MatrixXd kernel_cell_integrals(const TimeGrid& grid, double hurst);

// Covariance of (B_{t_1..t_n}, B^H_{t_1..t_n}), a 2n x 2n matrix.
Eigen::MatrixXd joint_covariance(const TimeGrid& grid, double hurst);

// Paths are stored one per row, with column k holding the value at node t_k
// (column 0 is the initial value).
using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PathBundle {
    TimeGrid grid;
    PathMatrix b_paths;
    PathMatrix w_paths;
    PathMatrix bh_paths;
    PathMatrix x_paths;  // empty unless filled by the simulator
    PathMatrix y_paths;
};

// Per-path generator: the stream of path i depends only on (seed, i).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index);

// Exact joint sampler of (B, W, B^H) on a grid via the Cholesky factor of
// joint_covariance. Paths are produced in fixed blocks of kBlockSize so that
// every output value is independent of how blocks are spread over threads.
class JointFbmSampler {
public:
    static constexpr std::size_t kBlockSize = 64;

    JointFbmSampler(const TimeGrid& grid, double hurst);

    const TimeGrid& grid() const { return grid_; }
    double hurst() const { return hurst_; }
    // Diagonal jitter that was needed for the factorization (0 if none).
    double jitter() const { return jitter_; }

    // Block `block` holds paths [block*kBlockSize, min(n_paths, ...)).
    // Outputs are (n+1) x count, one column per path, row 0 zero.
    void sample_block(std::uint64_t seed, std::size_t n_paths, std::size_t block, Eigen::MatrixXd& b,
                      Eigen::MatrixXd& bh, Eigen::MatrixXd& w) const;

    static std::size_t block_count(std::size_t n_paths) { return (n_paths + kBlockSize - 1) / kBlockSize; }

private:
    TimeGrid grid_;
    double hurst_;
    double jitter_ = 0.0;
    Eigen::MatrixXd chol_;  // lower triangular
};

// B, W and B^H filled; X and Y left empty. workers = 0 uses all cores.
PathBundle sample_fbm_joint(const TimeGrid& grid, double hurst, std::size_t n_paths, std::uint64_t seed,
                            std::size_t workers = 0);

}  // namespace fsabr
