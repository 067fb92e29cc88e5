#include "fsabr/hypergeometric.hpp"

#include <cmath>
#include <sstream>

#include "fsabr/errors.hpp"

namespace fsabr {
namespace {

constexpr int kMaxTerms = 5000;
constexpr double kSeriesTol = 1e-17;
constexpr double kIntegerGuard = 0.01;

[[noreturn]] void fail(double a, double b, double c, double z, const char* what) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "hyp2f1(" << a << ", " << b << ", " << c << ", " << z << "): " << what;
    throw NumericalError(msg.str());
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

double rgamma(double x) { return is_nonpositive_integer(x) ? 0.0 : 1.0 / std::tgamma(x); }

// Plain series; `report_z` is the caller's argument, used for diagnostics only.
double series(double a, double b, double c, double z, double ra, double rb, double rc, double report_z) {
    if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        const double nn = static_cast<double>(n);
        term *= (a + nn) * (b + nn) / ((c + nn) * (nn + 1.0)) * z;
        sum += term;
        if (term == 0.0) return sum;
        if (std::abs(term) <= kSeriesTol * std::abs(sum) && n > 2) return sum;
    }
    fail(ra, rb, rc, report_z, "series did not converge");
}

// Taylor continuation of the hypergeometric ODE
//   w(1-w) F'' + [c - (a+b+1) w] F' - ab F = 0
// from w0 = 0.5 to the target w in (0.5, 1). The distance r = 1 - w0 is
// tracked exactly so that targets very close to 1 stay resolvable.
double ode_continue(double a, double b, double c, double one_minus_target, double ra, double rb, double rc,
                    double report_z) {
    double r = 0.5;
    double f = series(a, b, c, 0.5, ra, rb, rc, report_z);
    double fp = a * b / c * series(a + 1.0, b + 1.0, c + 1.0, 0.5, ra, rb, rc, report_z);
    const double ab = a * b;
    const double q1 = -(a + b + 1.0);
    for (int step = 0; step < 2000; ++step) {
        const double w0 = 1.0 - r;
        const double max_h = 0.5 * r;
        const double remaining = r - one_minus_target;
        const bool last = remaining <= max_h;
        const double h = last ? remaining : max_h;
        const double p0 = w0 * r;
        const double p1 = 2.0 * r - 1.0;
        const double q0 = c + q1 * w0;
        // Scaled Taylor terms d_n = c_n h^n keep the magnitudes bounded as r -> 0.
        double dn = f;
        double dn1 = fp * h;
        double value = dn + dn1;
        double deriv_h = dn1;  // h * F'(w0 + h)
        bool converged = false;
        for (int n = 0; n < kMaxTerms; ++n) {
            const double nn = static_cast<double>(n);
            const double dn2 = -((p1 * nn + q0) * (nn + 1.0) * dn1 * h + (-nn * (nn - 1.0) + q1 * nn - ab) * dn * h * h) /
                               (p0 * (nn + 2.0) * (nn + 1.0));
            const double t_der = (nn + 2.0) * dn2;
            value += dn2;
            deriv_h += t_der;
            dn = dn1;
            dn1 = dn2;
            if (std::abs(dn2) <= kSeriesTol * std::abs(value) && std::abs(t_der) <= 1e-16 * std::abs(deriv_h) &&
                n > 4) {
                converged = true;
                break;
            }
        }
        const double deriv = deriv_h / h;
        if (!converged) fail(ra, rb, rc, report_z, "ODE continuation did not converge");
        f = value;
        fp = deriv;
        if (last) return f;
        r -= h;
    }
    fail(ra, rb, rc, report_z, "ODE continuation exceeded step limit");
}

}  // namespace

Hyp2F1::Connection Hyp2F1::make_connection(double a, double b, double c) {
    Connection conn{a, b, c, c - a - b, false, 0.0, 0.0};
    const double frac = std::abs(conn.d - std::round(conn.d));
    if (frac < kIntegerGuard) {
        conn.use_ode = true;
        return conn;
    }
    const double gc = std::tgamma(c);
    conn.coef1 = gc * std::tgamma(conn.d) * rgamma(c - a) * rgamma(c - b);
    conn.coef2 = gc * std::tgamma(-conn.d) * rgamma(a) * rgamma(b);
    return conn;
}

Hyp2F1::Hyp2F1(double a, double b, double c) : a_(a), b_(b), c_(c) {
    if (is_nonpositive_integer(c)) {
        std::ostringstream msg;
        msg << "hyp2f1: c = " << c << " is a nonpositive integer";
        throw DomainError(msg.str());
    }
    trivial_ = (a == 0.0 || b == 0.0);
    if (!trivial_) {
        direct_ = make_connection(a, b, c);
        pfaff_ = make_connection(a, c - b, c);
    }
}

double Hyp2F1::near_one(const Connection& conn, double one_minus_w, double z_for_errors) const {
    if (conn.use_ode) return ode_continue(conn.a, conn.b, conn.c, one_minus_w, a_, b_, c_, z_for_errors);
    const double s1 = series(conn.a, conn.b, conn.a + conn.b - conn.c + 1.0, one_minus_w, a_, b_, c_, z_for_errors);
    double result = conn.coef1 * s1;
    if (conn.coef2 != 0.0) {
        const double s2 = series(conn.c - conn.a, conn.c - conn.b, conn.d + 1.0, one_minus_w, a_, b_, c_, z_for_errors);
        result += conn.coef2 * std::pow(one_minus_w, conn.d) * s2;
    }
    return result;
}

double Hyp2F1::operator()(double z) const { return evaluate(z, 1.0 - z); }

double Hyp2F1::evaluate(double z, double one_minus_z) const {
    if (!(one_minus_z > 0.0) || std::isnan(z)) {
        std::ostringstream msg;
        msg << "hyp2f1: argument z = " << z << " outside (-inf, 1)";
        throw DomainError(msg.str());
    }
    if (trivial_ || z == 0.0) return 1.0;
    if (std::abs(z) <= 0.5) return series(a_, b_, c_, z, a_, b_, c_, z);
    if (z > 0.5) return near_one(direct_, one_minus_z, z);
    // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)).
    const double w = z / (z - 1.0);
    const double one_minus_w = 1.0 / one_minus_z;
    const double scale = std::pow(one_minus_z, -a_);
    if (w <= 0.5) return scale * series(pfaff_.a, pfaff_.b, pfaff_.c, w, a_, b_, c_, z);
    return scale * near_one(pfaff_, one_minus_w, z);
}

double hyp2f1(double a, double b, double c, double z) { return Hyp2F1(a, b, c)(z); }

}  // namespace fsabr
