#pragma once

#include <cmath>

#include "canweyl/errors.hpp"

namespace canweyl {

// Solve f(t) = target for a (not necessarily strictly) increasing f on
// (0, inf).  Geometric bracket expansion from [lo0, hi0], then bisection on
// log t.  Throws BracketFailure when no sign change is found.
template <class F>
double solve_increasing(F&& f, double target, double lo0 = 1e-3, double hi0 = 1.0,
                        int max_iter = 200) {
    double lo = lo0, hi = hi0;
    if (!(lo > 0.0) || !(hi > lo)) throw BracketFailure("solve_increasing: bad initial bracket");

    double flo = f(lo), fhi = f(hi);
    for (int k = 0; k < 420 && flo > target; ++k) {
        hi = lo;
        fhi = flo;
        lo *= 0.125;
        if (lo < 1e-320) throw BracketFailure("solve_increasing: lower bracket underflow");
        flo = f(lo);
    }
    for (int k = 0; k < 420 && fhi < target; ++k) {
        lo = hi;
        flo = fhi;
        hi *= 8.0;
        if (hi > 1e300) throw BracketFailure("solve_increasing: upper bracket overflow");
        fhi = f(hi);
    }
    if (flo > target || fhi < target)
        throw BracketFailure("solve_increasing: target not bracketed");

    for (int i = 0; i < max_iter; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo && mid < hi)) break;
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return std::sqrt(lo * hi);
}

} // namespace canweyl
