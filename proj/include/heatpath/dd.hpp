#pragma once

// Double-double arithmetic: an unevaluated sum hi + lo with |lo| <= ulp(hi)/2,
// giving roughly 106 bits of precision. Used where fourth differences of
// covariance kernels cancel past what IEEE doubles can resolve.

#include <cmath>
#include <cstdint>
#include <limits>

namespace heatpath::dd {

struct DD {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
};

namespace detail {

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DD quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

} // namespace detail

inline DD add(const DD& a, const DD& b) {
    DD s = detail::two_sum(a.hi, b.hi);
    DD t = detail::two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = detail::quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return detail::quick_two_sum(s.hi, s.lo);
}

inline DD neg(const DD& a) { return {-a.hi, -a.lo}; }

inline DD sub(const DD& a, const DD& b) { return add(a, neg(b)); }

inline DD mul(const DD& a, const DD& b) {
    DD p = detail::two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return detail::quick_two_sum(p.hi, p.lo);
}

inline DD div(const DD& a, const DD& b) {
    const double q1 = a.hi / b.hi;
    DD r = sub(a, mul(DD(q1), b));
    const double q2 = r.hi / b.hi;
    r = sub(r, mul(DD(q2), b));
    const double q3 = r.hi / b.hi;
    DD q = detail::quick_two_sum(q1, q2);
    return add(q, DD(q3));
}

inline DD sqrt(const DD& a) {
    if (a.hi == 0.0) return DD(0.0);
    const double x = 1.0 / std::sqrt(a.hi);
    const double y = a.hi * x;
    DD r = sub(a, mul(DD(y), DD(y)));
    return detail::quick_two_sum(y, r.hi * (x * 0.5));
}

inline DD ldexp(const DD& a, int n) {
    return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)};
}

// high/low splits of the constants this library needs
inline constexpr DD k_pi{3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr DD k_ln2{6.931471805599452862e-01, 2.319046813846299558e-17};

inline DD exp(const DD& a) {
    if (a.hi < -745.0) return DD(0.0);
    if (a.hi > 709.0) return DD(std::numeric_limits<double>::infinity());
    const double n = std::nearbyint(a.hi / k_ln2.hi);
    DD r = sub(a, mul(DD(n), k_ln2));
    // Taylor on |r| <= ln(2)/2 + eps
    DD sum(1.0);
    DD term(1.0);
    for (int k = 1; k <= 26; ++k) {
        term = div(mul(term, r), DD(static_cast<double>(k)));
        sum = add(sum, term);
    }
    return ldexp(sum, static_cast<int>(n));
}

// erf Taylor series; adequate for |z| <= 3 at double-double precision
inline DD erf_series(const DD& z) {
    const DD z2 = mul(z, z);
    DD term = z;              // z^{2n+1} / n!
    DD sum = z;
    double sign = -1.0;
    for (int n = 1; n <= 90; ++n) {
        term = div(mul(term, z2), DD(static_cast<double>(n)));
        sum = add(sum, div(mul(DD(sign), term), DD(2.0 * n + 1.0)));
        sign = -sign;
        if (std::fabs(term.hi) < 1e-40 * std::fabs(sum.hi)) break;
    }
    // 2/sqrt(pi)
    const DD two_over_sqrt_pi = div(DD(2.0), sqrt(k_pi));
    return mul(two_over_sqrt_pi, sum);
}

// complementary error function for z >= 0
inline DD erfc(const DD& z) {
    if (z.hi < 0.0) return sub(DD(2.0), erfc(neg(z)));
    if (z.hi <= 3.0) return sub(DD(1.0), erf_series(z));
    if (z.hi > 27.2) return DD(0.0);
    // Legendre continued fraction: erfc(z) = e^{-z^2}/sqrt(pi) *
    //   1/(z + (1/2)/(z + (2/2)/(z + (3/2)/(z + ...))))
    DD f = z;
    for (int k = 160; k >= 1; --k) {
        f = add(z, div(DD(k * 0.5), f));
    }
    const DD e = exp(neg(mul(z, z)));
    return div(e, mul(sqrt(k_pi), f));
}

} // namespace heatpath::dd
