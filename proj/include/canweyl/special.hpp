#pragma once

#include <cmath>
#include <limits>

#include "canweyl/errors.hpp"

namespace canweyl {

// Upper incomplete gamma Gamma(a, x) for a > 0, x >= 0.  Series for the lower
// part when x < a + 1, Lentz continued fraction otherwise.
inline double upper_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || !std::isfinite(x))
        throw RangeError("upper_incomplete_gamma: need a > 0, x >= 0");
    if (x == 0.0) return std::tgamma(a);

    // exp(a ln x - x); underflow to 0 is the honest answer at extreme x
    const double front = std::exp(a * std::log(x) - x);

    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
        }
        return std::tgamma(a) - sum * front; // Gamma(a) - gamma(a, x)
    }

    // Lentz continued fraction for Gamma(a, x) / (x^a e^-x)
    const double fpmin = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-17) break;
    }
    return front * h;
}

} // namespace canweyl
