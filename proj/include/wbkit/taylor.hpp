#pragma once

// Truncated second-order Taylor arithmetic in two variables. Lets analytic
// charts and metrics be written once as ordinary formulas and still hand out
// exact first and second partials.

#include <cmath>

namespace wb {

struct Taylor2 {
    double v = 0.0;
    double d[2] = {0.0, 0.0};
    double h[3] = {0.0, 0.0, 0.0};  // xx, xy, yy

    Taylor2() = default;
    Taylor2(double c) : v(c) {}  // NOLINT: constants mix freely

    static Taylor2 var(double value, int which) {
        Taylor2 t(value);
        t.d[which] = 1.0;
        return t;
    }
};

namespace detail {
// apply a scalar function with derivatives f0, f1, f2 at a.v
inline Taylor2 chain(const Taylor2& a, double f0, double f1, double f2) {
    Taylor2 r;
    r.v = f0;
    r.d[0] = f1 * a.d[0];
    r.d[1] = f1 * a.d[1];
    r.h[0] = f2 * a.d[0] * a.d[0] + f1 * a.h[0];
    r.h[1] = f2 * a.d[0] * a.d[1] + f1 * a.h[1];
    r.h[2] = f2 * a.d[1] * a.d[1] + f1 * a.h[2];
    return r;
}
}  // namespace detail

inline Taylor2 operator+(const Taylor2& a, const Taylor2& b) {
    Taylor2 r;
    r.v = a.v + b.v;
    for (int i = 0; i < 2; ++i) r.d[i] = a.d[i] + b.d[i];
    for (int i = 0; i < 3; ++i) r.h[i] = a.h[i] + b.h[i];
    return r;
}
inline Taylor2 operator-(const Taylor2& a) {
    Taylor2 r;
    r.v = -a.v;
    for (int i = 0; i < 2; ++i) r.d[i] = -a.d[i];
    for (int i = 0; i < 3; ++i) r.h[i] = -a.h[i];
    return r;
}
inline Taylor2 operator-(const Taylor2& a, const Taylor2& b) { return a + (-b); }
inline Taylor2 operator*(const Taylor2& a, const Taylor2& b) {
    Taylor2 r;
    r.v = a.v * b.v;
    r.d[0] = a.d[0] * b.v + a.v * b.d[0];
    r.d[1] = a.d[1] * b.v + a.v * b.d[1];
    r.h[0] = a.h[0] * b.v + 2.0 * a.d[0] * b.d[0] + a.v * b.h[0];
    r.h[1] = a.h[1] * b.v + a.d[0] * b.d[1] + a.d[1] * b.d[0] + a.v * b.h[1];
    r.h[2] = a.h[2] * b.v + 2.0 * a.d[1] * b.d[1] + a.v * b.h[2];
    return r;
}
inline Taylor2 inv(const Taylor2& a) {
    const double i = 1.0 / a.v;
    return detail::chain(a, i, -i * i, 2.0 * i * i * i);
}
inline Taylor2 operator/(const Taylor2& a, const Taylor2& b) { return a * inv(b); }
inline Taylor2& operator+=(Taylor2& a, const Taylor2& b) { return a = a + b; }
inline Taylor2& operator-=(Taylor2& a, const Taylor2& b) { return a = a - b; }
inline Taylor2& operator*=(Taylor2& a, const Taylor2& b) { return a = a * b; }

inline Taylor2 sqrt(const Taylor2& a) {
    const double s = std::sqrt(a.v);
    return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Taylor2 sin(const Taylor2& a) {
    return detail::chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}
inline Taylor2 cos(const Taylor2& a) {
    return detail::chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}
inline Taylor2 exp(const Taylor2& a) {
    const double e = std::exp(a.v);
    return detail::chain(a, e, e, e);
}
inline Taylor2 log(const Taylor2& a) {
    return detail::chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
inline Taylor2 atan(const Taylor2& a) {
    const double q = 1.0 / (1.0 + a.v * a.v);
    return detail::chain(a, std::atan(a.v), q, -2.0 * a.v * q * q);
}
inline Taylor2 pow(const Taylor2& a, double p) {
    const double f0 = std::pow(a.v, p);
    return detail::chain(a, f0, p * f0 / a.v, p * (p - 1.0) * f0 / (a.v * a.v));
}

// polar angle of (x, y); derivatives only, the branch of the value is atan2's
inline Taylor2 atan2(const Taylor2& y, const Taylor2& x) {
    // dθ = (x dy − y dx)/(x²+y²), second order by the quotient rule
    const Taylor2 r2 = x * x + y * y;
    Taylor2 out;
    out.v = std::atan2(y.v, x.v);
    const double iv = 1.0 / r2.v;
    for (int i = 0; i < 2; ++i) out.d[i] = (x.v * y.d[i] - y.v * x.d[i]) * iv;
    // differentiate d_i θ = (x y_i − y x_i)/r2 once more
    const int ij[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    for (int k = 0; k < 3; ++k) {
        const int i = ij[k][0], j = ij[k][1];
        const double n = x.v * y.d[i] - y.v * x.d[i];
        const double dn = x.d[j] * y.d[i] + x.v * y.h[k] - y.d[j] * x.d[i] - y.v * x.h[k];
        out.h[k] = dn * iv - n * r2.d[j] * iv * iv;
    }
    return out;
}

}  // namespace wb
