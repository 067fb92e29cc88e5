#include "fsabr/params.hpp"

#include <cmath>
#include <string>

#include "fsabr/errors.hpp"

namespace fsabr {

void ModelParams::validate() const {
    if (!std::isfinite(x0)) throw DomainError("x0 must be finite");
    if (!(y0 > 0.0) || !std::isfinite(y0)) throw DomainError("y0 must be positive, got " + std::to_string(y0));
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive, got " + std::to_string(nu));
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must lie in (0, 1), got " + std::to_string(hurst));
    if (!(std::abs(rho) <= kMaxAbsRho)) {
        throw DomainError("|rho| must not exceed 1 - 1e-6, got " + std::to_string(rho));
    }
}

double ModelParams::rho_bar() const { return std::sqrt((1.0 - rho) * (1.0 + rho)); }

TimeGrid::TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("time grid horizon must be positive");
    if (n_steps < 2) throw DomainError("time grid needs at least 2 steps");
    nodes_.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        nodes_[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
    }
    nodes_.back() = horizon;
}

}  // namespace fsabr
