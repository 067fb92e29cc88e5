#include "fsabr/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "fsabr/errors.hpp"

namespace fsabr {
namespace {

constexpr std::size_t kMaxGaussOrder = 64;

QuadratureRule build_gauss_legendre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi's initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

void append_panel(QuadratureRule& out, const QuadratureRule& gl, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < gl.size(); ++i) {
        out.nodes.push_back(mid + half * gl.nodes[i]);
        out.weights.push_back(half * gl.weights[i]);
    }
}

// Panel [s, s + delta] (direction +1) or [s - delta, s] (direction -1) with
// the power substitution u = s + direction * delta * w^p, p = 1/(1 + alpha).
void append_power_panel(QuadratureRule& out, const QuadratureRule& gl, double s, double delta, int direction,
                        double alpha) {
    const double p = 1.0 / (1.0 + alpha);
    for (std::size_t i = 0; i < gl.size(); ++i) {
        const double w = 0.5 * (gl.nodes[i] + 1.0);
        const double wp = std::pow(w, p);
        out.nodes.push_back(s + direction * delta * wp);
        out.weights.push_back(0.5 * gl.weights[i] * delta * p * wp / w);
    }
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
    static const std::array<QuadratureRule, kMaxGaussOrder + 1> table = [] {
        std::array<QuadratureRule, kMaxGaussOrder + 1> t{};
        for (std::size_t k = 1; k <= kMaxGaussOrder; ++k) t[k] = build_gauss_legendre(k);
        return t;
    }();
    if (n < 1 || n > kMaxGaussOrder) throw DomainError("Gauss-Legendre order must be in [1, 64]");
    return table[n];
}

QuadratureRule composite_rule(double a, double b, const std::vector<Singularity>& singularities,
                              const CompositeRuleOptions& options) {
    if (!(b > a)) throw DomainError("composite_rule needs a < b");
    const QuadratureRule& gl = gauss_legendre(options.order);
    const double sigma = options.grading;
    const double ratio = sigma / (1.0 - sigma);
    const double min_width = (b - a) * options.min_relative_width;
    const double touch_tol = (b - a) * 1e-15;

    QuadratureRule out;
    struct Panel {
        double lo, hi;
    };
    std::vector<Panel> stack;
    const double base = (b - a) / static_cast<double>(options.base_panels);
    for (std::size_t k = options.base_panels; k-- > 0;) {
        const double lo = a + base * static_cast<double>(k);
        const double hi = (k + 1 == options.base_panels) ? b : a + base * static_cast<double>(k + 1);
        stack.push_back({lo, hi});
    }

    while (!stack.empty()) {
        const Panel panel = stack.back();
        stack.pop_back();
        const double width = panel.hi - panel.lo;

        // Pick the singularity that most constrains this panel.
        const Singularity* worst = nullptr;
        double worst_dist = 0.0;
        for (const auto& s : singularities) {
            double dist;
            if (s.position <= panel.lo) dist = panel.lo - s.position;
            else if (s.position >= panel.hi) dist = s.position - panel.hi;
            else dist = -1.0;  // interior singularity: split at it
            if (dist >= 0.0 && dist >= ratio * width * (1.0 - 1e-12)) continue;
            if (worst == nullptr || dist < worst_dist) {
                worst = &s;
                worst_dist = dist;
            }
        }
        if (worst == nullptr) {
            append_panel(out, gl, panel.lo, panel.hi);
            continue;
        }
        const double s = worst->position;
        if (worst_dist < 0.0) {
            stack.push_back({s, panel.hi});
            stack.push_back({panel.lo, s});
            continue;
        }
        const bool left = s <= panel.lo;
        const bool touching = worst_dist <= touch_tol;
        if (touching && width <= min_width) {
            if (worst->alpha <= -1.0) throw DomainError("non-integrable endpoint singularity");
            append_power_panel(out, gl, left ? panel.lo : panel.hi, width, left ? +1 : -1, worst->alpha);
            continue;
        }
        // Largest panel next to the singularity satisfying the distance rule,
        // or a geometric fraction of the panel if it touches the singularity.
        double near_width = touching ? sigma * width : worst_dist / ratio;
        near_width = std::clamp(near_width, 0.0, width);
        if (!touching && near_width >= width) {
            append_panel(out, gl, panel.lo, panel.hi);
            continue;
        }
        if (left) {
            const double cut = panel.lo + near_width;
            stack.push_back({cut, panel.hi});
            stack.push_back({panel.lo, cut});
        } else {
            const double cut = panel.hi - near_width;
            stack.push_back({cut, panel.hi});
            stack.push_back({panel.lo, cut});
        }
    }
    return out;
}

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod_15(const std::function<double(double)>& f, double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const double fc = f(mid);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double f1 = f(mid - dx);
        const double f2 = f(mid + dx);
        kronrod += kKronrodWeights[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                  double abs_tol, std::size_t max_intervals,
                                  const std::vector<double>& breakpoints) {
    if (a == b) return {};
    if (!(b > a)) throw DomainError("integrate_adaptive needs a < b");
    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Segment> heap;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Segment s = gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
        total += s.value;
        total_error += s.error;
        heap.push(s);
    }
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (heap.size() >= max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge: estimate " << total
                << ", error " << total_error;
            throw NumericalError(msg.str());
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Interval cannot be split further in floating point; accept it.
            total_error -= worst.error;
            heap.push({worst.lo, worst.hi, worst.value, 0.0});
            continue;
        }
        const Segment left = gauss_kronrod_15(f, worst.lo, mid);
        const Segment right = gauss_kronrod_15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to limit drift from the incremental updates.
    double value = 0.0;
    double error = 0.0;
    std::size_t count = heap.size();
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error, count};
}

}  // namespace fsabr
