#include "canweyl/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canweyl/quadrature.hpp"
#include "canweyl/roots.hpp"

namespace canweyl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

enum class SKind { Sigma, Pi, Phi };

double scalar_value(SKind k, const Triple& h) {
    switch (k) {
        case SKind::Sigma: {
            if (h.h3 == 0.0) return 0.0;
            const double p = h.h1 * h.h2;
            return p > 0.0 ? std::min(1.0, std::fabs(h.h3) / std::sqrt(p)) : 1.0;
        }
        case SKind::Pi: {
            if (h.h3 == 0.0) return 0.0;
            if (!(h.h1 > 0.0)) return 0.0;
            return (h.h3 > 0.0 ? 1.0 : -1.0) * h.h2 / h.h1;
        }
        case SKind::Phi: {
            if (h.h2 == 0.0) return 0.0;
            const double base = std::atan2(std::sqrt(std::max(h.h2, 0.0)),
                                           std::sqrt(std::max(h.h1, 0.0)));
            return h.h3 >= 0.0 ? base : kPi - base;
        }
    }
    return 0.0;
}

// phi intervals inside [0, pi) whose double angle lies on the arc
// {e^{i theta} : theta in [t1, t2]}.
std::vector<std::pair<double, double>> arc_to_phi_intervals(double t1, double t2) {
    std::vector<std::pair<double, double>> out;
    if (!(t2 > t1)) return out;
    if (t2 - t1 >= 2 * kPi) {
        out.push_back({0.0, kPi});
        return out;
    }
    double a = std::fmod(t1, 2 * kPi);
    if (a < 0) a += 2 * kPi;
    const double b = a + (t2 - t1);
    out.push_back({a / 2, std::min(b, 2 * kPi) / 2});
    if (b > 2 * kPi) out.push_back({0.0, (b - 2 * kPi) / 2});
    return out;
}

} // namespace

// ---- scalar diagnostics ----------------------------------------------------------

DetRatio d_of(const HamiltonianModel& H, double t, double tol) {
    if (!(t > 0.0)) throw NonPositiveTime("d_of needs t > 0");
    const PrimitiveMatrix m = H.primitive(t, tol);
    if (!(m.m1 > 0.0) || !(m.m2 > 0.0))
        throw ZeroDiagonalPrimitive("d(H,t) needs m1(t), m2(t) > 0");
    double v = 1.0 - (m.m3 * m.m3) / (m.m1 * m.m2);
    v = std::min(1.0, std::max(0.0, v));
    return DetRatio{t, v};
}

double t_hat(const HamiltonianModel& H, double r, double tol) {
    if (!(r > 0.0)) throw ModelDomainError("t_hat needs r > 0");
    if (H.vanishing_start_h1() > 0.0 || H.vanishing_start_h2() > 0.0)
        throw ZeroDiagonalPrimitive("t_hat needs both diagonal primitives positive near 0");
    const double target = 1.0 / (64.0 * r * r);
    auto f = [&](double t) {
        const PrimitiveMatrix m = H.primitive(t, tol * target);
        return m.m1 * m.m2;
    };
    return solve_increasing(f, target);
}

AsymptoticsRow a_l(const HamiltonianModel& H, double r, double tol) {
    AsymptoticsRow row;
    row.r = r;
    row.t_hat = t_hat(H, r, tol);
    const PrimitiveMatrix m = H.primitive(row.t_hat);
    if (!(m.m1 > 0.0) || !(m.m2 > 0.0))
        throw ZeroDiagonalPrimitive("A_H needs m1, m2 > 0 at t-hat");
    row.A = std::sqrt(m.m1 / m.m2);
    row.d_at_t_hat = std::min(1.0, std::max(0.0, 1.0 - m.m3 * m.m3 / (m.m1 * m.m2)));
    row.L = row.A * row.d_at_t_hat;
    return row;
}

ScalarRep scalar_rep(const Triple& h, double t) {
    ScalarRep r;
    r.t = t;
    r.sigma = scalar_value(SKind::Sigma, h);
    r.phi = scalar_value(SKind::Phi, h);
    r.zeta = std::exp(std::complex<double>(0.0, 2.0 * r.phi));
    r.pi_val = scalar_value(SKind::Pi, h);
    return r;
}

ScalarRep scalar_rep(const HamiltonianModel& H, double t) { return scalar_rep(H.eval(t), t); }

double pi_weighted(const HamiltonianModel& H, double s, double t) {
    if (!(s > 0.0) || !(t > 0.0)) throw NonPositiveTime("pi_weighted needs s, t > 0");
    const PrimitiveMatrix m = H.primitive(s);
    if (!(m.m1 > 0.0) || !(m.m2 > 0.0))
        throw ZeroDiagonalPrimitive("pi_weighted needs m1(s), m2(s) > 0");
    const double base = scalar_value(SKind::Pi, H.eval(s * t));
    return base == 0.0 ? 0.0 : base * (m.m1 / m.m2);
}

double frak_t(const HamiltonianModel& H, double s, double t) {
    if (!(s > 0.0) || !(t > 0.0)) throw NonPositiveTime("frak_t needs s, t > 0");
    const PrimitiveMatrix ms = H.primitive(s);
    if (!(ms.m1 > 0.0) || !(ms.m2 > 0.0))
        throw ZeroDiagonalPrimitive("frak_t needs m1(s), m2(s) > 0");
    const PrimitiveMatrix mt = H.primitive(s * t);
    return mt.m1 / ms.m1 + mt.m2 / ms.m2;
}

double frak_t_inv(const HamiltonianModel& H, double s, double x) {
    if (!(x > 0.0)) throw NonPositiveTime("frak_t_inv needs x > 0");
    return solve_increasing([&](double t) { return frak_t(H, s, t); }, x);
}

HamiltonianModel gamma_map(const GammaForm& tables) { return HamiltonianModel(tables); }

std::pair<double, std::complex<double>> xi_map(const HamiltonianModel& H, double t) {
    const Triple h = H.eval(t);
    if (std::fabs(h.trace() - 1.0) > 1e-9)
        throw NotTraceNormalized("xi_map needs tr H(t) = 1");
    const ScalarRep r = scalar_rep(h, t);
    return {r.sigma, r.zeta};
}

// ---- preimage machinery -----------------------------------------------------------

namespace {

// exact preimage over monotone branches of a smooth scalar
IntervalSet preimage_smooth(const HamiltonianModel& H, SKind kind, double lo, double hi,
                            double t_max) {
    auto v = [&](double t) { return scalar_value(kind, H.eval(t)); };

    std::vector<double> knots = H.scalar_branch_knots();
    knots.erase(std::remove_if(knots.begin(), knots.end(),
                               [&](double k) { return !(k > 0.0) || k >= t_max; }),
                knots.end());
    knots.push_back(t_max);
    std::sort(knots.begin(), knots.end());

    IntervalSet out;
    double a = 0.0;
    for (double b : knots) {
        if (!(b > a)) continue;
        const double a_probe = a > 0.0 ? a + (b - a) * 1e-12 : std::max(b * 1e-14, 1e-290);
        const double b_probe = b - (b - a) * 1e-12;
        const double va = v(a_probe), vb = v(b_probe);

        if (va == vb) { // constant branch
            if (va >= lo && va <= hi) out.add(a, b);
            a = b;
            continue;
        }
        const bool inc = vb > va;
        const double vmin = std::min(va, vb), vmax = std::max(va, vb);
        if (vmax < lo || vmin > hi) {
            a = b;
            continue;
        }

        auto solve = [&](double level) {
            double x0 = a_probe, x1 = b_probe;
            for (int i = 0; i < 200 && x1 - x0 > 1e-15 * x1; ++i) {
                const double mid = x0 > 0 ? std::sqrt(x0 * x1) : 0.5 * (x0 + x1);
                if ((v(mid) < level) == inc)
                    x0 = mid;
                else
                    x1 = mid;
            }
            return 0.5 * (x0 + x1);
        };

        double start, end;
        if (inc) {
            start = lo <= vmin ? a : solve(lo);
            end = hi >= vmax ? b : solve(hi);
        } else {
            start = hi >= vmax ? a : solve(hi);
            end = lo <= vmin ? b : solve(lo);
        }
        if (end > start) out.add(start, end);
        a = b;
    }
    out.normalize();
    return out;
}

IntervalSet preimage_piecewise(const HamiltonianModel& H, SKind kind, double lo, double hi,
                               double t_max) {
    IntervalSet out;
    H.for_each_scalar_piece(0.0, t_max, [&](double a, double b, const Triple& rep) {
        const double v = scalar_value(kind, rep);
        if (v >= lo && v <= hi) out.add(a, b);
    });
    out.normalize();
    return out;
}

IntervalSet preimage_one(const HamiltonianModel& H, SKind kind, double lo, double hi,
                         double t_max) {
    if (H.scalar_piecewise()) return preimage_piecewise(H, kind, lo, hi, t_max);
    return preimage_smooth(H, kind, lo, hi, t_max);
}

} // namespace

IntervalSet scalar_preimage(const HamiltonianModel& H, Quantity q, LevelSet level, double t_max) {
    switch (q) {
        case Quantity::Sigma:
            return preimage_one(H, SKind::Sigma, level.lo, level.hi, t_max);
        case Quantity::Pi:
        case Quantity::PiWeighted:
            return preimage_one(H, SKind::Pi, level.lo, level.hi, t_max);
        case Quantity::ZetaArc: {
            IntervalSet out;
            for (const auto& [plo, phi_hi] : arc_to_phi_intervals(level.lo, level.hi)) {
                for (const auto& part : preimage_one(H, SKind::Phi, plo, phi_hi, t_max).parts())
                    out.add(part.lo, part.hi);
            }
            out.normalize();
            return out;
        }
    }
    return {};
}

namespace {

struct SampledMeasure {
    double value = 0.0;
};

// Stratified log-midpoint estimate of integral over {x in (0, X): v(x) in level}
// of weight(x) dx.
template <class V, class W>
double sampled_measure(V&& in_level, W&& weight, double X, int n) {
    const double x_lo = X * 1e-12;
    double acc = 0.0;
    const double ratio = std::pow(X / x_lo, 1.0 / n);
    double a = x_lo;
    for (int i = 0; i < n; ++i) {
        const double b = (i + 1 == n) ? X : a * ratio;
        const double mid = std::sqrt(a * b);
        if (in_level(mid)) acc += weight(mid) * (b - a);
        a = b;
    }
    return acc;
}

} // namespace

PreimageResult preimage_measure(const HamiltonianModel& H, Quantity q, LevelSet level,
                                double window, std::optional<double> s, Transport transport,
                                const PreimageOptions& opts) {
    if (!(window > 0.0)) throw NonPositiveTime("preimage_measure needs a positive window");
    if (transport == Transport::FrakT && !s)
        throw ModelDomainError("frak_t transport needs the rescaling parameter s");
    if (q == Quantity::PiWeighted && !s)
        throw ModelDomainError("pi_weighted preimages need the rescaling parameter s");

    // weighted level for pi_{H,s}
    LevelSet base_level = level;
    double weight_ratio = 1.0;
    if (q == Quantity::PiWeighted) {
        const PrimitiveMatrix ms = H.primitive(*s);
        if (!(ms.m1 > 0.0) || !(ms.m2 > 0.0))
            throw ZeroDiagonalPrimitive("pi_weighted needs m1(s), m2(s) > 0");
        weight_ratio = ms.m1 / ms.m2;
        base_level = LevelSet{level.lo / weight_ratio, level.hi / weight_ratio};
    }

    const double scale = s ? *s : 1.0;
    // base-time horizon needed to cover the window after scaling / transport
    double t_max_base;
    if (transport == Transport::FrakT)
        t_max_base = scale * frak_t_inv(H, *s, window);
    else
        t_max_base = scale * window;

    PreimageResult out;

    // exact path: piecewise interval arithmetic, monotone-branch solving for
    // the smooth catalog kinds
    if (!opts.force_sampling) {
        Quantity qq = q == Quantity::PiWeighted ? Quantity::Pi : q;
        out.set = scalar_preimage(H, qq, base_level, t_max_base);
        double m = 0.0;
        for (const auto& part : out.set.parts()) {
            double a = part.lo / scale, b = part.hi / scale;
            if (transport == Transport::FrakT) {
                a = a > 0.0 ? frak_t(H, *s, a) : 0.0;
                b = frak_t(H, *s, b);
            }
            m += std::max(0.0, std::min(b, window) - std::min(a, window));
        }
        out.measure = out.measure_refined = m;
        return out;
    }

    // sampled fallback: stratified log midpoints with one doubling check
    out.sampled = true;
    SKind kind = q == Quantity::Sigma ? SKind::Sigma
                 : q == Quantity::ZetaArc ? SKind::Phi
                                          : SKind::Pi;
    auto in_level = [&](double x_scaled) {
        const double t = x_scaled * scale;
        const double v = scalar_value(kind, H.eval(t));
        if (q == Quantity::ZetaArc) {
            for (const auto& [plo, phi_hi] : arc_to_phi_intervals(level.lo, level.hi))
                if (v >= plo && v <= phi_hi) return true;
            return false;
        }
        return v >= base_level.lo && v <= base_level.hi;
    };
    double X;
    std::function<double(double)> weight;
    if (transport == Transport::FrakT) {
        X = frak_t_inv(H, *s, window);
        const PrimitiveMatrix ms = H.primitive(*s);
        weight = [&H, s, ms](double x) {
            const Triple h = H.eval(*s * x);
            return *s * (h.h1 / ms.m1 + h.h2 / ms.m2);
        };
    } else {
        X = window;
        weight = [](double) { return 1.0; };
    }
    out.measure = sampled_measure(in_level, weight, X, opts.sample_points);
    out.measure_refined = sampled_measure(in_level, weight, X, 2 * opts.sample_points);
    const double denom = std::max({out.measure, out.measure_refined, 1e-12});
    out.unstable = std::fabs(out.measure - out.measure_refined) > 0.05 * denom;
    return out;
}

double det_integral_form(const HamiltonianModel& H, double t, double tol) {
    if (!(t > 0.0)) throw NonPositiveTime("det_integral_form needs t > 0");
    if (H.scalar_piecewise()) {
        double acc = 0.0;
        H.for_each_scalar_piece(0.0, t, [&](double a, double b, const Triple& rep) {
            const double sg = scalar_value(SKind::Sigma, rep);
            acc += (1.0 - sg * sg) * (b - a);
        });
        return std::min(1.0, std::max(0.0, acc / t));
    }
    auto f = [&](double x) {
        const double sg = scalar_value(SKind::Sigma, H.eval(x));
        return 1.0 - sg * sg;
    };
    return std::min(1.0, std::max(0.0, integrate_from_zero(f, t, tol * t) / t));
}

// ---- trend classification ----------------------------------------------------------

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::TendsToZero: return "tends-to-zero";
        case Verdict::BoundedAway: return "bounded-away";
        case Verdict::Oscillating: return "oscillating";
    }
    return "?";
}

TrendSeries classify_trend(std::string label, std::vector<double> x, std::vector<double> value) {
    TrendSeries ts;
    ts.label = std::move(label);

    // order by x descending (toward 0 at the end)
    std::vector<size_t> idx(x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] > x[b]; });
    for (size_t i : idx) {
        ts.x.push_back(x[i]);
        ts.value.push_back(value[i]);
    }

    if (ts.x.empty()) return ts;
    const double x_min = ts.x.back();
    size_t tail_start = 0;
    for (size_t i = 0; i < ts.x.size(); ++i) {
        if (ts.x[i] <= 10.0 * x_min) {
            tail_start = i;
            break;
        }
        tail_start = i;
    }
    if (ts.x.size() - tail_start < 2 && ts.x.size() >= 2) tail_start = ts.x.size() - 2;

    // least squares of log v against log(1/x) on the tail
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    double mean_v = 0;
    for (size_t i = tail_start; i < ts.x.size(); ++i) {
        const double lx = std::log(1.0 / ts.x[i]);
        const double ly = std::log(std::max(ts.value[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        mean_v += ts.value[i];
        ++n;
    }
    mean_v /= std::max(1, n);
    const double det = n * sxx - sx * sx;
    ts.tail_slope = std::fabs(det) > 0 ? (n * sxy - sx * sy) / det : 0.0;
    ts.tail_mean = mean_v;

    double vmax = 0.0, vmin = kInf;
    for (double v : ts.value) {
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, std::max(v, 1e-300));
    }
    const double full_ratio = vmax > 0.0 ? vmax / vmin : 1.0;

    if (ts.tail_slope < -0.2)
        ts.verdict = Verdict::TendsToZero;
    else if (std::fabs(ts.tail_slope) <= 0.05 && ts.tail_mean > 0.01)
        ts.verdict = Verdict::BoundedAway;
    else if (full_ratio > 5.0)
        ts.verdict = Verdict::Oscillating;
    else if (ts.tail_mean <= 0.01)
        ts.verdict = Verdict::TendsToZero;
    else
        ts.verdict = Verdict::BoundedAway;
    return ts;
}

// ---- condition checkers -------------------------------------------------------------

ConditionIIReport check_condition_ii(const HamiltonianModel& H,
                                     const std::vector<double>& t_grid) {
    ConditionIIReport rep;
    std::vector<double> xs, vs;
    for (double t : t_grid) {
        const DetRatio d = d_of(H, t);
        rep.values.push_back(d);
        xs.push_back(t);
        vs.push_back(d.value);
    }
    rep.series = classify_trend("d(H,t)", xs, vs);
    rep.lim_verdict = rep.series.verdict;

    double vmin = kInf, vmax = 0.0;
    for (double v : vs) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    rep.liminf_verdict = vmin < std::max(0.01, 0.05 * vmax) ? Verdict::TendsToZero
                                                            : Verdict::BoundedAway;
    return rep;
}

void validate_ij(const IJPair& p) {
    auto check_one = [](const Interval& I) {
        if (!(I.hi > I.lo)) throw IntervalValidation("interval must be nonempty");
        if (I.lo < 0.0 && I.hi > 0.0)
            throw IntervalValidation("interval must avoid 0");
    };
    check_one(p.I);
    check_one(p.J);
    if (!(p.I.hi < p.J.lo || p.J.hi < p.I.lo))
        throw IntervalValidation("interval closures must be disjoint");
    const bool I_bounded = std::isfinite(p.I.lo) && std::isfinite(p.I.hi);
    const bool J_bounded = std::isfinite(p.J.lo) && std::isfinite(p.J.hi);
    if (!I_bounded && !J_bounded)
        throw IntervalValidation("at least one of I, J must be bounded");
}

ConditionIIIReport check_condition_iii(const HamiltonianModel& H, double T,
                                       const std::vector<double>& gamma_list,
                                       const std::vector<IJPair>& ij_pairs,
                                       const std::vector<double>& s_grid) {
    for (const auto& p : ij_pairs) validate_ij(p);
    ConditionIIIReport rep;
    rep.T = T;
    rep.gamma_list = gamma_list;
    rep.ij_pairs = ij_pairs;
    rep.s_grid = s_grid;

    for (double gamma : gamma_list) {
        std::vector<double> vals;
        for (double s : s_grid) {
            vals.push_back(preimage_measure(H, Quantity::Sigma, LevelSet{0.0, gamma}, T, s,
                                            Transport::FrakT)
                               .measure);
        }
        rep.sigma_series.push_back(
            classify_trend("sigma gamma=" + std::to_string(gamma), s_grid, vals));
    }
    for (const auto& p : ij_pairs) {
        std::vector<double> vals;
        for (double s : s_grid) {
            const double a = preimage_measure(H, Quantity::PiWeighted,
                                              LevelSet{p.I.lo, p.I.hi}, T, s, Transport::FrakT)
                                 .measure;
            const double b = preimage_measure(H, Quantity::PiWeighted,
                                              LevelSet{p.J.lo, p.J.hi}, T, s, Transport::FrakT)
                                 .measure;
            vals.push_back(a * b);
        }
        rep.pi_series.push_back(classify_trend("pi product", s_grid, vals));
    }
    return rep;
}

ConditionIVReport check_condition_iv(const HamiltonianModel& H,
                                     const std::vector<double>& gamma_list,
                                     const std::vector<IJPair>& ij_pairs,
                                     const std::vector<double>& t_grid) {
    if (!H.trace_one())
        throw NotTraceNormalized("condition (iv) needs a trace-normalised model");
    for (const auto& p : ij_pairs) validate_ij(p);

    ConditionIVReport rep;
    rep.gamma_list = gamma_list;
    rep.ij_pairs = ij_pairs;
    rep.t_grid = t_grid;

    rep.liminf_m1m2_over_t2 = kInf;
    for (double t : t_grid) {
        const PrimitiveMatrix m = H.primitive(t);
        rep.liminf_m1m2_over_t2 =
            std::min(rep.liminf_m1m2_over_t2, (m.m1 / t) * (m.m2 / t));
    }
    rep.liminf_warning = !(rep.liminf_m1m2_over_t2 > 1e-3);

    for (double gamma : gamma_list) {
        std::vector<double> vals;
        for (double t : t_grid) {
            vals.push_back(preimage_measure(H, Quantity::Sigma, LevelSet{0.0, gamma}, t,
                                            std::nullopt, Transport::None)
                               .measure /
                           t);
        }
        rep.sigma_series.push_back(
            classify_trend("sigma gamma=" + std::to_string(gamma), t_grid, vals));
    }
    for (const auto& p : ij_pairs) {
        std::vector<double> vals;
        for (double t : t_grid) {
            const double a = preimage_measure(H, Quantity::Pi, LevelSet{p.I.lo, p.I.hi}, t,
                                              std::nullopt, Transport::None)
                                 .measure /
                             t;
            const double b = preimage_measure(H, Quantity::Pi, LevelSet{p.J.lo, p.J.hi}, t,
                                              std::nullopt, Transport::None)
                                 .measure /
                             t;
            vals.push_back(a * b);
        }
        rep.pi_series.push_back(classify_trend("pi product", t_grid, vals));
    }
    return rep;
}

std::vector<double> default_gamma_list() { return {0.0, 0.25, 0.5, 0.75, 0.9}; }

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g;
    if (count <= 0) return g;
    if (count == 1) {
        g.push_back(lo);
        return g;
    }
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) g.push_back(lo * std::exp(step * i));
    return g;
}

} // namespace canweyl
