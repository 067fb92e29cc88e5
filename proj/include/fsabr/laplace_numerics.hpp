#pragma once

#include <Eigen/Dense>
#include <functional>

namespace fsabr {

using Point2 = Eigen::Vector2d;

struct ScalarField2 {
    std::function<double(const Point2&)> value;
    std::function<Point2(const Point2&)> gradient;
    std::function<Eigen::Matrix2d(const Point2&)> hessian;
};

// Central-difference derivatives with step 1e-5 * scale.
Point2 fd_gradient(const std::function<double(const Point2&)>& f, const Point2& x, double scale = 1.0);
Eigen::Matrix2d fd_hessian(const std::function<double(const Point2&)>& f, const Point2& x, double scale = 1.0);
ScalarField2 fd_field(std::function<double(const Point2&)> f, double scale = 1.0);

// Leading term of int_D f e^{-theta/t} dx when theta attains its minimum over
// the half-plane D at the boundary point x*, f = 0 on the boundary:
//   sqrt(2 pi) t^{5/2} e^{-theta(x*)/t} / (sqrt(theta_tt) |grad theta|)
//     * [grad f . grad theta / |grad theta|^2 + f_tt / (2 theta_tt)]
// with tangential second derivatives along the unit vector orthogonal to
// grad theta(x*).
double laplace_leading_term(const ScalarField2& theta, const ScalarField2& f, const Point2& boundary_point, double t);

// {x : inward_normal . (x - point) >= 0}, or the whole plane. Truncation
// searches start from `point`, which should sit near the integrand's peak.
struct PlaneDomain {
    Point2 point = Point2::Zero();
    Point2 inward_normal = Point2(1.0, 0.0);
    bool whole_plane = false;

    static PlaneDomain half_plane(const Point2& point, const Point2& inward_normal) {
        return {point, inward_normal.normalized(), false};
    }
    static PlaneDomain plane(const Point2& center) { return {center, Point2(1.0, 0.0), true}; }
};

// Nested adaptive Gauss-Kronrod in (normal, tangential) coordinates to relative
// tolerance 1e-8. `t` sets the length scales (t normal, sqrt t tangential) of
// the outward search that truncates each direction where the integrand drops
// below 1e-16 of its peak along that line.
double adaptive_quad_2d(const std::function<double(const Point2&)>& integrand, const PlaneDomain& domain, double t);

}  // namespace fsabr
