#pragma once

#include <cmath>
#include <utility>

#include "canweyl/errors.hpp"

namespace canweyl {

namespace detail {

// Two-point Gauss rule on (a, b).  Open rule: never evaluates the endpoints,
// so integrable endpoint singularities stay finite.
template <class F>
double gauss2(F&& f, double a, double b) {
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    const double u = h * 0.5773502691896257645; // 1/sqrt(3)
    return h * (f(m - u) + f(m + u));
}

template <class F>
double quad_rec(F&& f, double a, double b, double whole, double tol, int depth, int max_depth) {
    const double m = 0.5 * (a + b);
    const double left = gauss2(f, a, m);
    const double right = gauss2(f, m, b);
    const double err = std::fabs(left + right - whole);
    if (err <= tol || !(b - a > 0.0))
        return left + right;
    if (depth >= max_depth) {
        if (err > 64.0 * tol)
            throw QuadratureFailure("adaptive quadrature: max depth exceeded");
        return left + right;
    }
    return quad_rec(f, a, m, left, 0.5 * tol, depth + 1, max_depth) +
           quad_rec(f, m, b, right, 0.5 * tol, depth + 1, max_depth);
}

} // namespace detail

// Adaptive bisection with the fourth-order two-point Gauss rule; absolute
// tolerance, max depth 60.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_depth = 60) {
    if (!(b > a)) return 0.0;
    const double whole = detail::gauss2(f, a, b);
    return detail::quad_rec(f, a, b, whole, abs_tol, 0, max_depth);
}

// Integral over (0, b) of a function that may be singular (but integrable)
// at 0: geometric presplit toward the origin, then adaptive on each piece.
template <class F>
double integrate_from_zero(F&& f, double b, double abs_tol, int max_depth = 60) {
    if (!(b > 0.0)) return 0.0;
    double total = 0.0;
    double hi = b;
    for (int k = 0; k < 1100 && hi > 0.0; ++k) {
        const double lo = hi * 0.5;
        const double piece = integrate_adaptive(f, lo, hi, abs_tol * 0.25, max_depth);
        total += piece;
        // remaining mass below lo is bounded by the last piece for a
        // monotone-tail integrand; stop once negligible
        if (std::fabs(piece) < abs_tol * 0.25 && k > 8) break;
        hi = lo;
    }
    return total;
}

} // namespace canweyl
