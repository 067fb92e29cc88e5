#pragma once

#include <cstddef>
#include <vector>

namespace fsabr {

// Parameters of the lognormal fractional SABR dynamics
//   X_t = x0 + y0 int e^{nu B^H} (rho dB + rho_bar dW) - y0^2/2 int e^{2 nu B^H} ds
//   Y_t = y0 e^{nu B^H_t}
struct ModelParams {
    double x0 = 0.0;     // log spot
    double y0 = 0.2;     // initial volatility alpha_0
    double nu = 1.0;     // vol-of-vol
    double rho = 0.0;    // spot/vol correlation
    double hurst = 0.5;  // Hurst exponent of B^H

    static constexpr double kMaxAbsRho = 1.0 - 1e-6;

    // Throws DomainError when an invariant is violated.
    void validate() const;
    double rho_bar() const;
};

// Uniform discretization t_0 = 0 < t_1 < ... < t_n = horizon.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const { return horizon_; }
    std::size_t n_steps() const { return n_steps_; }
    double dt() const { return horizon_ / static_cast<double>(n_steps_); }
    double node(std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    double horizon_;
    std::size_t n_steps_;
    std::vector<double> nodes_;
};

}  // namespace fsabr
