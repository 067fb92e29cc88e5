#pragma once

namespace fsabr {

// Gauss hypergeometric function 2F1(a, b; c; z) for real z < 1.
//
// |z| <= 0.5 sums the series directly. For z < -0.5 the Pfaff transformation
// maps to w = z/(z-1); when w > 0.5 the 1-w connection formula is used, or,
// if c-a-b' is close to an integer, the ODE is continued by Taylor steps from
// w = 0.5. Coefficients depending only on (a, b, c) are precomputed.
class Hyp2F1 {
public:
    Hyp2F1(double a, double b, double c);

    double operator()(double z) const;
    // Same value, with 1 - z supplied by the caller when it is known more
    // accurately than the rounded difference (z close to 1).
    double evaluate(double z, double one_minus_z) const;

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }

private:
    struct Connection {
        double a, b, c;  // parameters of the function continued to w -> 1
        double d;        // c - a - b
        bool use_ode;    // d too close to an integer for the gamma formula
        double coef1, coef2;
    };

    static Connection make_connection(double a, double b, double c);
    double near_one(const Connection& conn, double one_minus_w, double z_for_errors) const;

    double a_, b_, c_;
    bool trivial_;
    Connection direct_;  // for 0.5 < z < 1
    Connection pfaff_;   // F(a, c-b; c; w) for z < -0.5
};

double hyp2f1(double a, double b, double c, double z);

}  // namespace fsabr
