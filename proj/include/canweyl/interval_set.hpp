#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace canweyl {

// Half-open-by-default interval on the extended real line.  The open/closed
// flags are carried for API completeness; Lebesgue measure ignores them.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool closed_lo = false;
    bool closed_hi = false;

    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool empty() const { return !(hi > lo); }
};

// Sorted union of disjoint intervals.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) { normalize(); }

    static IntervalSet whole() {
        return IntervalSet({Interval{-std::numeric_limits<double>::infinity(),
                                     std::numeric_limits<double>::infinity()}});
    }

    void add(double lo, double hi, bool closed_lo = false, bool closed_hi = false) {
        if (hi > lo) parts_.push_back(Interval{lo, hi, closed_lo, closed_hi});
    }

    void normalize() {
        std::sort(parts_.begin(), parts_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        for (const auto& p : parts_) {
            if (p.empty()) continue;
            if (!merged.empty() && p.lo <= merged.back().hi) {
                merged.back().hi = std::max(merged.back().hi, p.hi);
            } else {
                merged.push_back(p);
            }
        }
        parts_ = std::move(merged);
    }

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

    double measure() const {
        double m = 0.0;
        for (const auto& p : parts_) m += p.length();
        return m;
    }

    IntervalSet clipped(double lo, double hi) const {
        IntervalSet out;
        for (const auto& p : parts_) {
            double a = std::max(p.lo, lo), b = std::min(p.hi, hi);
            if (b > a) out.add(a, b);
        }
        return out;
    }

    // Image under a strictly increasing map applied to the endpoints.
    template <class F>
    IntervalSet mapped(F&& f) const {
        IntervalSet out;
        for (const auto& p : parts_) {
            double a = f(p.lo), b = f(p.hi);
            if (b > a) out.add(a, b);
        }
        out.normalize();
        return out;
    }

private:
    std::vector<Interval> parts_;
};

} // namespace canweyl
