#include "fsabr/laplace_numerics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "fsabr/errors.hpp"
#include "fsabr/quadrature.hpp"

namespace fsabr {

namespace {

constexpr double kPeakFraction = 1e-16;

// Walks from `start` in direction `dir` through start + dir*step*2^k until
// |g| falls below kPeakFraction of the larger of `reference` and the largest
// value seen. Returns the visited points, the last one being the truncation
// point.
std::vector<double> outward_points(const std::function<double(double)>& g, double start, double step, double dir,
                                   double reference, double& peak) {
    std::vector<double> pts;
    double local_peak = std::abs(g(start));
    for (int k = 0; k < 64; ++k) {
        const double u = start + dir * step * std::ldexp(1.0, k);
        const double v = std::abs(g(u));
        if (!std::isfinite(v)) throw NumericalError("adaptive_quad_2d: non-finite integrand value");
        pts.push_back(u);
        local_peak = std::max(local_peak, v);
        const double level = std::max(local_peak, reference);
        if (level > 0.0 && v < kPeakFraction * level) break;
        if (k == 63) throw NumericalError("adaptive_quad_2d: integrand does not decay");
    }
    peak = std::max(peak, local_peak);
    return pts;
}

// Integral of g over [start, truncation] (dir = +1) or [truncation, start].
double one_side(const std::function<double(double)>& g, double start, double step, double dir, double rel_tol,
                double reference = 0.0, double* peak_out = nullptr) {
    double peak = 0.0;
    const std::vector<double> pts = outward_points(g, start, step, dir, reference, peak);
    if (peak_out) *peak_out = std::max(*peak_out, peak);
    if (peak == 0.0) return 0.0;
    const double end = pts.back();
    std::vector<double> breaks(pts.begin(), pts.end() - 1);
    const double lo = dir > 0 ? start : end, hi = dir > 0 ? end : start;
    const double abs_tol = rel_tol * peak * 1e-12 * (hi - lo);
    return integrate_adaptive(g, lo, hi, rel_tol, abs_tol, 20000, breaks).value;
}

double whole_line(const std::function<double(double)>& g, double start, double step, double rel_tol,
                  double reference = 0.0, double* peak_out = nullptr) {
    return one_side(g, start, step, -1.0, rel_tol, reference, peak_out) +
           one_side(g, start, step, 1.0, rel_tol, reference, peak_out);
}

double tangential_second(const Eigen::Matrix2d& h, const Point2& tau) { return tau.dot(h * tau); }

}  // namespace

Point2 fd_gradient(const std::function<double(const Point2&)>& f, const Point2& x, double scale) {
    const double h = 1e-5 * scale;
    Point2 g;
    for (int i = 0; i < 2; ++i) {
        Point2 up = x, down = x;
        up[i] += h;
        down[i] -= h;
        g[i] = (f(up) - f(down)) / (2.0 * h);
    }
    return g;
}

Eigen::Matrix2d fd_hessian(const std::function<double(const Point2&)>& f, const Point2& x, double scale) {
    const double h = 1e-5 * scale;
    Eigen::Matrix2d out;
    const double f0 = f(x);
    for (int i = 0; i < 2; ++i) {
        Point2 up = x, down = x;
        up[i] += h;
        down[i] -= h;
        out(i, i) = (f(up) - 2.0 * f0 + f(down)) / (h * h);
    }
    Point2 pp = x, pm = x, mp = x, mm = x;
    pp += Point2(h, h);
    pm += Point2(h, -h);
    mp += Point2(-h, h);
    mm += Point2(-h, -h);
    out(0, 1) = out(1, 0) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    return out;
}

ScalarField2 fd_field(std::function<double(const Point2&)> f, double scale) {
    ScalarField2 field;
    field.value = f;
    field.gradient = [f, scale](const Point2& x) { return fd_gradient(f, x, scale); };
    field.hessian = [f, scale](const Point2& x) { return fd_hessian(f, x, scale); };
    return field;
}

double laplace_leading_term(const ScalarField2& theta, const ScalarField2& f, const Point2& boundary_point, double t) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const Point2 g = theta.gradient(boundary_point);
    const double norm = g.norm();
    if (!(norm >= 1e-12)) throw DomainError("laplace_leading_term: gradient of theta vanishes at the boundary point");
    const Point2 tau(-g[1] / norm, g[0] / norm);
    const double theta_tt = tangential_second(theta.hessian(boundary_point), tau);
    if (!(theta_tt > 0.0)) {
        throw DomainError("laplace_leading_term: tangential second derivative of theta must be positive");
    }
    const double f_tt = tangential_second(f.hessian(boundary_point), tau);
    const double bracket = f.gradient(boundary_point).dot(g) / (norm * norm) + 0.5 * f_tt / theta_tt;
    const double prefactor = std::sqrt(2.0 * std::numbers::pi) * std::pow(t, 2.5) *
                             std::exp(-theta.value(boundary_point) / t) / (std::sqrt(theta_tt) * norm);
    return prefactor * bracket;
}

double adaptive_quad_2d(const std::function<double(const Point2&)>& integrand, const PlaneDomain& domain, double t) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    const Point2 n = domain.inward_normal.normalized();
    const Point2 tau(-n[1], n[0]);
    const double normal_step = domain.whole_plane ? std::sqrt(t) : t;
    const double tangent_step = std::sqrt(t);
    auto at = [&](double a, double s) { return integrand(domain.point + a * n + s * tau); };
    // Lines away from `point` are truncated relative to the peak found on the
    // line through it.
    double reference = 0.0;
    auto line = [&](double s, double* peak) {
        auto g = [&](double a) { return at(a, s); };
        return domain.whole_plane ? whole_line(g, 0.0, normal_step, 1e-10, reference, peak)
                                  : one_side(g, 0.0, normal_step, 1.0, 1e-10, reference, peak);
    };
    line(0.0, &reference);
    return whole_line([&](double s) { return line(s, nullptr); }, 0.0, tangent_step, 1e-8);
}

}  // namespace fsabr
