#pragma once

// Adaptive Simpson quadrature with interval bisection, shared by the oracle
// layer and the Berman integral classifier.

#include <cmath>
#include <functional>

#include "heatpath/errors.hpp"

namespace heatpath::quadrature {

namespace detail {

template <typename F>
double simpson(const F& f, double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt(const F& f, double a, double fa, double b, double fb, double fm,
             double whole, double tol, int depth, int max_depth, bool* converged) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth >= max_depth) {
        *converged = false;
        return left + right + delta / 15.0;
    }
    if (std::fabs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adapt(f, a, fa, m, fm, flm, left, 0.5 * tol, depth + 1, max_depth, converged) +
           adapt(f, m, fm, b, fb, frm, right, 0.5 * tol, depth + 1, max_depth, converged);
}

} // namespace detail

/// Integrate f over [a,b] to absolute tolerance tol. Throws NumericalError if
/// the subdivision depth cap is hit before the tolerance is met.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 60) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = detail::simpson(f, a, fa, b, fb, fm);
    bool converged = true;
    const double v =
        detail::adapt(f, a, fa, b, fb, fm, whole, tol, 0, max_depth, &converged);
    if (!converged) throw NumericalError("adaptive_simpson: tolerance not reached at max depth");
    return v;
}

} // namespace heatpath::quadrature
