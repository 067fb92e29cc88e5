#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace fsabr {

// Nodes and weights of an interpolatory rule; integrate() returns sum w_i f(x_i).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double integrate(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }
};

// n-point Gauss-Legendre rule on [-1, 1], 1 <= n <= 64. Cached, thread-safe.
const QuadratureRule& gauss_legendre(std::size_t n);

// An algebraic endpoint behaviour |u - position|^alpha of the integrand.
struct Singularity {
    double position;
    double alpha;
};

struct CompositeRuleOptions {
    std::size_t order = 16;         // Gauss-Legendre points per panel
    double grading = 0.2;           // geometric ratio of successive panels
    double min_relative_width = 1e-14;
    std::size_t base_panels = 2;
};

// Composite Gauss-Legendre rule on [a, b] whose panels are refined
// geometrically toward the given singular points, so that every panel is at
// least grading/(1-grading) of its width away from each singularity. A panel
// that touches a singular endpoint and has shrunk below min_relative_width is
// integrated with the substitution u = s +- delta * w^{1/(1+alpha)}, which
// absorbs the leading |u - s|^alpha factor exactly.
QuadratureRule composite_rule(double a, double b, const std::vector<Singularity>& singularities,
                              const CompositeRuleOptions& options = {});

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
};

// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. The optional
// breakpoints seed the initial partition. Throws NumericalError when the
// tolerance max(abs_tol, rel_tol*|I|) is not met within max_intervals.
AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_tol = 0.0,
                                  std::size_t max_intervals = 4000,
                                  const std::vector<double>& breakpoints = {});

}  // namespace fsabr
