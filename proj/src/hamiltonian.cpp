#include "canweyl/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "canweyl/quadrature.hpp"
#include "canweyl/roots.hpp"
#include "canweyl/special.hpp"

namespace canweyl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Triple scale_triple(const Triple& h, double c) { return Triple{c * h.h1, c * h.h3, c * h.h2}; }

Triple weight_triple(const Triple& h, double w1, double w2) {
    return Triple{w1 * h.h1, std::sqrt(w1 * w2) * h.h3, w2 * h.h2};
}

Triple rotation_triple(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return Triple{c * c, c * s, s * s};
}

void require_positive_time(double t) {
    if (!(t > 0.0)) throw NonPositiveTime("time argument must be positive");
}

// ---- two-phase breakpoint sequence ------------------------------------------

// t_0 = inf > t_1 > t_2 > ... -> 0.  Explicit lists are continued below their
// last point by t <- t * min(1/4, t), which keeps t_{n+1}/t_n -> 0.
class BreakSeq {
public:
    explicit BreakSeq(const BreakpointRule& rule) : rule_(&rule) {}

    double t(int n) const {
        if (n <= 0) return kInf;
        if (const auto* eq = std::get_if<ExpQuadratic>(rule_)) {
            return std::exp(-eq->c * double(n) * double(n));
        }
        const auto& pts = std::get<ExplicitSeq>(*rule_).points;
        if (n <= int(pts.size())) return pts[size_t(n - 1)];
        double v = pts.back();
        for (int k = int(pts.size()); k < n && v > 0.0; ++k) v *= std::min(0.25, v);
        return v;
    }

    // Band index n such that t in [t_{n+1}, t_n).
    int band_of(double x) const {
        int n = 0;
        while (n < 4000) {
            const double next = t(n + 1);
            if (x >= next || next == 0.0) return n;
            ++n;
        }
        return n;
    }

private:
    const BreakpointRule* rule_;
};

double two_phase_angle(const TwoPhaseRotation& tp, int band) {
    return (band % 2 == 1) ? tp.phi_plus : tp.phi_minus;
}

// ---- power-log primitive helpers ---------------------------------------------

// integral over (0, t) of s^(alpha-1) |log s|^beta ds for t <= 1:
// alpha^-(beta+1) * Gamma(beta+1, alpha L), L = -ln t.
double power_log_primitive_below_one(double alpha, double beta, double t) {
    const double L = -std::log(t);
    return std::pow(alpha, -(beta + 1.0)) * upper_incomplete_gamma(beta + 1.0, alpha * L);
}

// integral over (1, t) for t > 1, via u = log s.
double power_log_primitive_above_one(double alpha, double beta, double t, double tol) {
    const double X = std::log(t);
    auto f = [alpha, beta](double u) { return std::exp(alpha * u) * std::pow(u, beta); };
    return integrate_from_zero(f, X, tol);
}

double power_log_entry_primitive(double alpha, double beta, double t, double tol) {
    if (t <= 1.0) return power_log_primitive_below_one(alpha, beta, t);
    return power_log_primitive_below_one(alpha, beta, 1.0) +
           power_log_primitive_above_one(alpha, beta, t, tol);
}

} // namespace

// ---- monotone map descriptors ------------------------------------------------

namespace {

void validate_map(const MonotoneMap& m) {
    if (const auto* a = std::get_if<AffineMap>(&m)) {
        if (!(a->c > 0.0)) throw NotMonotone("affine map needs c > 0");
        return;
    }
    if (const auto* p = std::get_if<PowerMap>(&m)) {
        if (!(p->p > 0.0)) throw NotMonotone("power map needs p > 0");
        return;
    }
    const auto& sp = std::get<SplineMap>(m);
    if (sp.x.size() != sp.y.size() || sp.x.size() < 2)
        throw NotMonotone("spline map needs matching knot tables of size >= 2");
    for (size_t i = 0; i < sp.x.size(); ++i) {
        if (!(sp.x[i] > 0.0) || !(sp.y[i] > 0.0))
            throw NotMonotone("spline knots must be positive");
        if (i && !(sp.x[i] > sp.x[i - 1] && sp.y[i] > sp.y[i - 1]))
            throw NotMonotone("spline knots must be strictly increasing");
    }
}

double spline_forward(const SplineMap& sp, double t) {
    if (t <= sp.x.front()) return sp.y.front() / sp.x.front() * t;
    if (t >= sp.x.back()) {
        const size_t n = sp.x.size();
        const double slope = (sp.y[n - 1] - sp.y[n - 2]) / (sp.x[n - 1] - sp.x[n - 2]);
        return sp.y.back() + slope * (t - sp.x.back());
    }
    const auto it = std::upper_bound(sp.x.begin(), sp.x.end(), t);
    const size_t i = size_t(it - sp.x.begin());
    const double w = (t - sp.x[i - 1]) / (sp.x[i] - sp.x[i - 1]);
    return sp.y[i - 1] + w * (sp.y[i] - sp.y[i - 1]);
}

double spline_inverse(const SplineMap& sp, double x) {
    if (x <= sp.y.front()) return sp.x.front() / sp.y.front() * x;
    if (x >= sp.y.back()) {
        const size_t n = sp.x.size();
        const double slope = (sp.y[n - 1] - sp.y[n - 2]) / (sp.x[n - 1] - sp.x[n - 2]);
        return sp.x.back() + (x - sp.y.back()) / slope;
    }
    const auto it = std::upper_bound(sp.y.begin(), sp.y.end(), x);
    const size_t i = size_t(it - sp.y.begin());
    const double w = (x - sp.y[i - 1]) / (sp.y[i] - sp.y[i - 1]);
    return sp.x[i - 1] + w * (sp.x[i] - sp.x[i - 1]);
}

double spline_deriv(const SplineMap& sp, double t) {
    if (t < sp.x.front()) return sp.y.front() / sp.x.front();
    size_t i = sp.x.size() - 1;
    if (t < sp.x.back()) {
        const auto it = std::upper_bound(sp.x.begin(), sp.x.end(), t);
        i = size_t(it - sp.x.begin());
    }
    return (sp.y[i] - sp.y[i - 1]) / (sp.x[i] - sp.x[i - 1]);
}

} // namespace

double map_forward(const MonotoneMap& m, double t) {
    if (const auto* a = std::get_if<AffineMap>(&m)) return a->c * t;
    if (const auto* p = std::get_if<PowerMap>(&m)) return std::pow(t, p->p);
    return spline_forward(std::get<SplineMap>(m), t);
}

double map_inverse(const MonotoneMap& m, double x) {
    if (const auto* a = std::get_if<AffineMap>(&m)) return x / a->c;
    if (const auto* p = std::get_if<PowerMap>(&m)) return std::pow(x, 1.0 / p->p);
    return spline_inverse(std::get<SplineMap>(m), x);
}

double map_deriv(const MonotoneMap& m, double t) {
    if (const auto* a = std::get_if<AffineMap>(&m)) return a->c;
    if (const auto* p = std::get_if<PowerMap>(&m)) return p->p * std::pow(t, p->p - 1.0);
    return spline_deriv(std::get<SplineMap>(m), t);
}

bool map_is_affine(const MonotoneMap& m) { return std::holds_alternative<AffineMap>(m); }

// ---- model construction & validation -----------------------------------------

HamiltonianModel::HamiltonianModel(ModelKind kind) : kind_(std::move(kind)) {
    validate_and_cache();
}

void HamiltonianModel::validate_and_cache() {
    struct Cache {
        HamiltonianModel* self;

        void operator()(PiecewiseConstant& pc) {
            PrimitiveMatrix acc;
            bool trace_one = true, h1z = true, h2z = true;
            for (const auto& seg : pc.segments) {
                if (!(seg.len > 0.0) || !std::isfinite(seg.len))
                    throw ModelDomainError("piecewise segment length must be positive");
                if (!seg.h.psd(1e-9 * std::max(1.0, seg.h.h1 * seg.h.h2)))
                    throw ModelDomainError("piecewise segment is not positive semidefinite");
                if (!(seg.h.trace() > 0.0))
                    throw ModelDomainError("piecewise segment has nonpositive trace");
                acc.t += seg.len;
                acc.m1 += seg.len * seg.h.h1;
                acc.m3 += seg.len * seg.h.h3;
                acc.m2 += seg.len * seg.h.h2;
                self->prefix_.push_back(acc);
                trace_one = trace_one && std::fabs(seg.h.trace() - 1.0) <= 1e-12;
                h1z = h1z && seg.h.h1 == 0.0;
                h2z = h2z && seg.h.h2 == 0.0;
            }
            if (!pc.tail.psd(1e-9 * std::max(1.0, pc.tail.h1 * pc.tail.h2)))
                throw ModelDomainError("piecewise tail is not positive semidefinite");
            if (!(pc.tail.trace() > 0.0))
                throw ModelDomainError("piecewise tail needs positive trace (limit point case)");
            self->trace_one_ = trace_one && std::fabs(pc.tail.trace() - 1.0) <= 1e-12;
            self->h1_zero_ = h1z && pc.tail.h1 == 0.0;
            self->h2_zero_ = h2z && pc.tail.h2 == 0.0;
            self->value_piecewise_ = self->scalar_piecewise_ = true;
        }

        void operator()(PowerLog& pl) {
            if (!(pl.alpha1 > 0.0 && pl.alpha2 > 0.0))
                throw ModelDomainError("power-log needs alpha > 0");
            if (!(pl.beta1 > -1.0 && pl.beta2 > -1.0))
                throw ModelDomainError("power-log needs beta > -1");
        }

        void operator()(TwoPhaseRotation& tp) {
            const double pi = 3.14159265358979323846;
            auto ok_angle = [&](double phi) {
                return phi > 0.0 && phi < pi && std::fabs(phi - pi / 2) > 1e-12;
            };
            if (!ok_angle(tp.phi_plus) || !ok_angle(tp.phi_minus) ||
                std::fabs(tp.phi_plus - tp.phi_minus) <= 1e-12)
                throw ModelDomainError("two-phase angles must be distinct, in (0,pi) minus pi/2");
            if (const auto* eq = std::get_if<ExpQuadratic>(&tp.rule)) {
                if (!(eq->c > 0.0)) throw ModelDomainError("exp-quadratic rule needs c > 0");
            } else {
                const auto& pts = std::get<ExplicitSeq>(tp.rule).points;
                if (pts.empty()) throw ModelDomainError("explicit breakpoint list is empty");
                for (size_t i = 0; i < pts.size(); ++i) {
                    if (!(pts[i] > 0.0)) throw ModelDomainError("breakpoints must be positive");
                    if (i && !(pts[i] < pts[i - 1]))
                        throw ModelDomainError("breakpoints must decrease strictly");
                }
            }
            self->trace_one_ = true;
            self->value_piecewise_ = self->scalar_piecewise_ = true;
        }

        void operator()(DiagonalPower& dp) {
            if (!(dp.rho1 > 0.0 && dp.rho2 > 0.0))
                throw ModelDomainError("diagonal-power needs rho > 0");
        }

        void operator()(SingularPower& sp) {
            if (!(sp.rho1 > 0.0 && sp.rho2 > 0.0))
                throw ModelDomainError("singular-power needs rho > 0");
        }

        void operator()(GammaForm& gf) {
            if (gf.sigma.size() != gf.knots.size() + 1 || gf.theta.size() != gf.sigma.size())
                throw RangeError("gamma-form tables must have knots.size()+1 values");
            for (size_t i = 0; i < gf.knots.size(); ++i) {
                if (!(gf.knots[i] > 0.0)) throw RangeError("gamma-form knots must be positive");
                if (i && !(gf.knots[i] > gf.knots[i - 1]))
                    throw RangeError("gamma-form knots must increase strictly");
            }
            for (double s : gf.sigma)
                if (!(s >= 0.0 && s <= 1.0)) throw RangeError("gamma-form sigma must lie in [0,1]");
            for (double th : gf.theta)
                if (!std::isfinite(th)) throw RangeError("gamma-form theta must be finite");
            self->trace_one_ = true;
            self->value_piecewise_ = self->scalar_piecewise_ = true;
        }

        void operator()(Rescaled& rs) {
            if (!rs.base) throw ModelDomainError("rescaled model needs a base");
            if (!(rs.s > 0.0 && rs.g1 > 0.0 && rs.g2 > 0.0))
                throw ModelDomainError("rescaled model needs positive s, g1, g2");
            self->limit_point_ = rs.base->limit_point();
            self->trace_one_ = rs.base->trace_one() && rs.g1 == rs.g2 && rs.s * rs.g1 == 1.0;
            self->h1_zero_ = rs.base->h1_identically_zero();
            self->h2_zero_ = rs.base->h2_identically_zero();
            self->value_piecewise_ = rs.base->value_piecewise();
            self->scalar_piecewise_ = rs.base->scalar_piecewise();
        }

        void operator()(TraceNormalized& tn) {
            if (!tn.base) throw ModelDomainError("trace-normalized model needs a base");
            if (!tn.base->limit_point())
                throw NotLimitPoint("trace normalisation needs the limit point case");
            self->limit_point_ = true;
            self->trace_one_ = true;
            self->h1_zero_ = tn.base->h1_identically_zero();
            self->h2_zero_ = tn.base->h2_identically_zero();
            self->value_piecewise_ = tn.base->value_piecewise();
            self->scalar_piecewise_ = tn.base->scalar_piecewise();
        }

        void operator()(Reparametrized& rp) {
            if (!rp.base) throw ModelDomainError("reparametrized model needs a base");
            validate_map(rp.phi);
            self->limit_point_ = rp.base->limit_point();
            const auto* a = std::get_if<AffineMap>(&rp.phi);
            self->trace_one_ = rp.base->trace_one() && a && a->c == 1.0;
            self->h1_zero_ = rp.base->h1_identically_zero();
            self->h2_zero_ = rp.base->h2_identically_zero();
            self->value_piecewise_ = rp.base->value_piecewise() && map_is_affine(rp.phi);
            self->scalar_piecewise_ = rp.base->scalar_piecewise();
        }
    };
    std::visit(Cache{this}, kind_);
}

// ---- eval ---------------------------------------------------------------------

Triple HamiltonianModel::eval(double t) const {
    require_positive_time(t);

    struct Eval {
        const HamiltonianModel* self;
        double t;

        Triple operator()(const PiecewiseConstant& pc) const {
            double end = 0.0;
            for (const auto& seg : pc.segments) {
                end += seg.len;
                if (t < end) return seg.h;
            }
            return pc.tail;
        }

        Triple operator()(const PowerLog& pl) const {
            const double a3 = 0.5 * (pl.alpha1 + pl.alpha2), b3 = 0.5 * (pl.beta1 + pl.beta2);
            if (t == 1.0) {
                auto at_one = [](double beta) {
                    if (beta > 0.0) return 0.0;
                    if (beta == 0.0) return 1.0;
                    return kEvalSentinelCap;
                };
                Triple h{at_one(pl.beta1), at_one(b3), at_one(pl.beta2)};
                const double cap = std::sqrt(h.h1 * h.h2);
                if (std::fabs(h.h3) > cap) h.h3 = std::copysign(cap, h.h3);
                return h;
            }
            const double L = std::fabs(std::log(t));
            auto entry = [&](double alpha, double beta) {
                return std::pow(t, alpha - 1.0) * std::pow(L, beta);
            };
            return Triple{entry(pl.alpha1, pl.beta1), entry(a3, b3), entry(pl.alpha2, pl.beta2)};
        }

        Triple operator()(const TwoPhaseRotation& tp) const {
            BreakSeq seq(tp.rule);
            return rotation_triple(two_phase_angle(tp, seq.band_of(t)));
        }

        Triple operator()(const DiagonalPower& dp) const {
            return Triple{dp.rho1 * std::pow(t, dp.rho1 - 1.0), 0.0,
                          dp.rho2 * std::pow(t, dp.rho2 - 1.0)};
        }

        Triple operator()(const SingularPower& sp) const {
            const double h1 = sp.rho1 * std::pow(t, sp.rho1 - 1.0);
            const double h2 = sp.rho2 * std::pow(t, sp.rho2 - 1.0);
            return Triple{h1, std::sqrt(h1 * h2), h2};
        }

        Triple operator()(const GammaForm& gf) const {
            const auto it = std::upper_bound(gf.knots.begin(), gf.knots.end(), t);
            const size_t i = size_t(it - gf.knots.begin());
            const double sg = gf.sigma[i], th = gf.theta[i];
            return Triple{0.5 * (1.0 + std::cos(th)), 0.5 * sg * std::sin(th),
                          0.5 * (1.0 - std::cos(th))};
        }

        Triple operator()(const Rescaled& rs) const {
            const Triple h = rs.base->eval(rs.s * t);
            return scale_triple(weight_triple(h, rs.g1, rs.g2), rs.s);
        }

        Triple operator()(const TraceNormalized& tn) const {
            const double tau = tn.base->trace_primitive_inverse(t);
            const Triple h = tn.base->eval(tau);
            const double tr = h.trace();
            if (!(tr > 0.0)) throw ModelDomainError("zero trace at evaluation point");
            return scale_triple(h, 1.0 / tr);
        }

        Triple operator()(const Reparametrized& rp) const {
            const double tau = map_forward(rp.phi, t);
            return scale_triple(rp.base->eval(tau), map_deriv(rp.phi, t));
        }
    };
    return std::visit(Eval{this, t}, kind_);
}

// ---- primitive ------------------------------------------------------------------

PrimitiveMatrix HamiltonianModel::primitive(double t, double tol) const {
    require_positive_time(t);

    struct Prim {
        const HamiltonianModel* self;
        double t, tol;

        PrimitiveMatrix operator()(const PiecewiseConstant& pc) const {
            PrimitiveMatrix out;
            out.t = t;
            double start = 0.0;
            for (size_t i = 0; i < pc.segments.size(); ++i) {
                const double end = self->prefix_[i].t;
                if (t <= end) {
                    const PrimitiveMatrix base =
                        i ? self->prefix_[i - 1] : PrimitiveMatrix{};
                    const double dt = t - start;
                    out.m1 = base.m1 + dt * pc.segments[i].h.h1;
                    out.m3 = base.m3 + dt * pc.segments[i].h.h3;
                    out.m2 = base.m2 + dt * pc.segments[i].h.h2;
                    return out;
                }
                start = end;
            }
            const PrimitiveMatrix base =
                self->prefix_.empty() ? PrimitiveMatrix{} : self->prefix_.back();
            const double dt = t - start;
            out.m1 = base.m1 + dt * pc.tail.h1;
            out.m3 = base.m3 + dt * pc.tail.h3;
            out.m2 = base.m2 + dt * pc.tail.h2;
            return out;
        }

        PrimitiveMatrix operator()(const PowerLog& pl) const {
            const double a3 = 0.5 * (pl.alpha1 + pl.alpha2), b3 = 0.5 * (pl.beta1 + pl.beta2);
            PrimitiveMatrix out;
            out.t = t;
            out.m1 = power_log_entry_primitive(pl.alpha1, pl.beta1, t, tol);
            out.m3 = power_log_entry_primitive(a3, b3, t, tol);
            out.m2 = power_log_entry_primitive(pl.alpha2, pl.beta2, t, tol);
            return out;
        }

        PrimitiveMatrix operator()(const TwoPhaseRotation& tp) const {
            BreakSeq seq(tp.rule);
            PrimitiveMatrix out;
            out.t = t;
            int n = seq.band_of(t);
            double hi = t;
            while (true) {
                const double lo = seq.t(n + 1);
                const Triple h = rotation_triple(two_phase_angle(tp, n));
                const double len = hi - lo;
                out.m1 += len * h.h1;
                out.m3 += len * h.h3;
                out.m2 += len * h.h2;
                if (lo == 0.0) break;
                hi = lo;
                ++n;
            }
            return out;
        }

        PrimitiveMatrix operator()(const DiagonalPower& dp) const {
            return PrimitiveMatrix{t, std::pow(t, dp.rho1), 0.0, std::pow(t, dp.rho2)};
        }

        PrimitiveMatrix operator()(const SingularPower& sp) const {
            const double rho3 = 0.5 * (sp.rho1 + sp.rho2);
            return PrimitiveMatrix{t, std::pow(t, sp.rho1),
                                   std::sqrt(sp.rho1 * sp.rho2) / rho3 * std::pow(t, rho3),
                                   std::pow(t, sp.rho2)};
        }

        PrimitiveMatrix operator()(const GammaForm& gf) const {
            PrimitiveMatrix out;
            out.t = t;
            double start = 0.0;
            for (size_t i = 0; i <= gf.knots.size(); ++i) {
                const double end = i < gf.knots.size() ? gf.knots[i] : kInf;
                const double hi = std::min(t, end);
                if (hi > start) {
                    const double th = gf.theta[i], sg = gf.sigma[i], len = hi - start;
                    out.m1 += len * 0.5 * (1.0 + std::cos(th));
                    out.m3 += len * 0.5 * sg * std::sin(th);
                    out.m2 += len * 0.5 * (1.0 - std::cos(th));
                }
                if (t <= end) break;
                start = end;
            }
            return out;
        }

        PrimitiveMatrix operator()(const Rescaled& rs) const {
            const PrimitiveMatrix m = rs.base->primitive(rs.s * t, tol);
            const double g3 = std::sqrt(rs.g1 * rs.g2);
            return PrimitiveMatrix{t, rs.g1 * m.m1, g3 * m.m3, rs.g2 * m.m2};
        }

        PrimitiveMatrix operator()(const TraceNormalized& tn) const {
            const double tau = tn.base->trace_primitive_inverse(t);
            PrimitiveMatrix m = tn.base->primitive(tau, tol);
            m.t = t;
            return m;
        }

        PrimitiveMatrix operator()(const Reparametrized& rp) const {
            PrimitiveMatrix m = rp.base->primitive(map_forward(rp.phi, t), tol);
            m.t = t;
            return m;
        }
    };
    return std::visit(Prim{this, t, tol}, kind_);
}

double HamiltonianModel::trace_primitive(double t) const {
    if (trace_one_) return t;
    return primitive(t).trace();
}

double HamiltonianModel::trace_primitive_inverse(double x) const {
    require_positive_time(x);
    if (trace_one_) return x;
    return solve_increasing([this](double t) { return trace_primitive(t); }, x);
}

// ---- piece enumeration -----------------------------------------------------------

namespace {

using PieceFn = std::function<void(double, double, const Triple&)>;

void emit_clipped(double lo, double hi, double a, double b, const Triple& h, const PieceFn& f) {
    const double x = std::max(lo, a), y = std::min(hi, b);
    if (y > x) f(x, y, h);
}

} // namespace

void HamiltonianModel::for_each_value_piece(double lo, double hi, const PieceFn& f) const {
    if (!value_piecewise_) throw ModelDomainError("model is not piecewise constant in value");
    if (!(hi > lo)) return;
    lo = std::max(lo, 0.0);

    struct Walk {
        const HamiltonianModel* self;
        double lo, hi;
        const PieceFn& f;

        void operator()(const PiecewiseConstant& pc) const {
            double start = 0.0;
            for (const auto& seg : pc.segments) {
                const double end = start + seg.len;
                emit_clipped(lo, hi, start, end, seg.h, f);
                start = end;
                if (start >= hi) return;
            }
            emit_clipped(lo, hi, start, kInf, pc.tail, f);
        }

        void operator()(const TwoPhaseRotation& tp) const {
            BreakSeq seq(tp.rule);
            // collect bands from the top of the window downward, then emit
            // in increasing t order
            std::vector<std::pair<std::pair<double, double>, int>> bands;
            int n = seq.band_of(hi > 0 ? std::nextafter(hi, 0.0) : hi);
            double top = hi;
            while (top > lo) {
                const double bot = seq.t(n + 1);
                bands.push_back({{std::max(lo, bot), top}, n});
                if (bot <= lo || bot == 0.0) break;
                top = bot;
                ++n;
            }
            for (auto it = bands.rbegin(); it != bands.rend(); ++it) {
                const Triple h = rotation_triple(two_phase_angle(tp, it->second));
                if (it->first.second > it->first.first)
                    f(it->first.first, it->first.second, h);
            }
        }

        void operator()(const GammaForm& gf) const {
            double start = 0.0;
            for (size_t i = 0; i <= gf.knots.size(); ++i) {
                const double end = i < gf.knots.size() ? gf.knots[i] : kInf;
                const double th = gf.theta[i], sg = gf.sigma[i];
                const Triple h{0.5 * (1.0 + std::cos(th)), 0.5 * sg * std::sin(th),
                               0.5 * (1.0 - std::cos(th))};
                emit_clipped(lo, hi, start, end, h, f);
                start = end;
                if (start >= hi) return;
            }
        }

        void operator()(const Rescaled& rs) const {
            rs.base->for_each_value_piece(
                rs.s * lo, rs.s * hi, [&](double a, double b, const Triple& h) {
                    f(a / rs.s, b / rs.s, scale_triple(weight_triple(h, rs.g1, rs.g2), rs.s));
                });
        }

        void operator()(const TraceNormalized& tn) const {
            const double blo = tn.base->trace_primitive_inverse(std::max(lo, 1e-300));
            const double bhi = tn.base->trace_primitive_inverse(hi);
            tn.base->for_each_value_piece(
                lo > 0 ? blo : 0.0, bhi, [&](double a, double b, const Triple& h) {
                    const double tr = h.trace();
                    f(tn.base->trace_primitive(a), tn.base->trace_primitive(b),
                      scale_triple(h, 1.0 / tr));
                });
        }

        void operator()(const Reparametrized& rp) const {
            const auto& aff = std::get<AffineMap>(rp.phi);
            rp.base->for_each_value_piece(
                map_forward(rp.phi, lo), map_forward(rp.phi, hi),
                [&](double a, double b, const Triple& h) {
                    f(a / aff.c, b / aff.c, scale_triple(h, aff.c));
                });
        }

        void operator()(const PowerLog&) const {}
        void operator()(const DiagonalPower&) const {}
        void operator()(const SingularPower&) const {}
    };
    std::visit(Walk{this, lo, hi, f}, kind_);
}

void HamiltonianModel::for_each_scalar_piece(double lo, double hi, const PieceFn& f) const {
    if (!scalar_piecewise_) throw ModelDomainError("model scalars are not piecewise constant");
    if (!(hi > lo)) return;
    lo = std::max(lo, 0.0);

    if (const auto* rp = std::get_if<Reparametrized>(&kind_)) {
        // sigma/pi/zeta are invariant under the positive factor phi', so the
        // base representative triple is valid; only the knots move.
        rp->base->for_each_scalar_piece(map_forward(rp->phi, lo), map_forward(rp->phi, hi),
                                        [&](double a, double b, const Triple& h) {
                                            f(map_inverse(rp->phi, a), map_inverse(rp->phi, b), h);
                                        });
        return;
    }
    if (const auto* tn = std::get_if<TraceNormalized>(&kind_)) {
        const double blo = lo > 0 ? tn->base->trace_primitive_inverse(std::max(lo, 1e-300)) : 0.0;
        const double bhi = tn->base->trace_primitive_inverse(hi);
        tn->base->for_each_scalar_piece(blo, bhi, [&](double a, double b, const Triple& h) {
            f(tn->base->trace_primitive(a), tn->base->trace_primitive(b), h);
        });
        return;
    }
    if (const auto* rs = std::get_if<Rescaled>(&kind_)) {
        rs->base->for_each_scalar_piece(rs->s * lo, rs->s * hi,
                                        [&](double a, double b, const Triple& h) {
                                            f(a / rs->s, b / rs->s,
                                              weight_triple(h, rs->g1, rs->g2));
                                        });
        return;
    }
    for_each_value_piece(lo, hi, f);
}

std::vector<double> HamiltonianModel::scalar_branch_knots() const {
    if (const auto* pl = std::get_if<PowerLog>(&kind_)) {
        const double a = pl->alpha1 - pl->alpha2, b = pl->beta1 - pl->beta2;
        std::vector<double> k;
        if (b != 0.0) {
            k.push_back(1.0);
            if (a != 0.0) {
                const double turn = std::exp(-b / a);
                if (turn != 1.0 && turn > 0.0 && std::isfinite(turn)) k.push_back(turn);
            }
        }
        std::sort(k.begin(), k.end());
        return k;
    }
    if (const auto* rs = std::get_if<Rescaled>(&kind_)) {
        auto k = rs->base->scalar_branch_knots();
        for (auto& x : k) x /= rs->s;
        return k;
    }
    if (const auto* tn = std::get_if<TraceNormalized>(&kind_)) {
        auto k = tn->base->scalar_branch_knots();
        for (auto& x : k) x = tn->base->trace_primitive(x);
        return k;
    }
    if (const auto* rp = std::get_if<Reparametrized>(&kind_)) {
        auto k = rp->base->scalar_branch_knots();
        for (auto& x : k) x = map_inverse(rp->phi, x);
        std::sort(k.begin(), k.end());
        return k;
    }
    return {};
}

namespace {

double vanishing_prefix_piecewise(const PiecewiseConstant& pc, bool check_h2) {
    double delta = 0.0;
    for (const auto& seg : pc.segments) {
        const double entry = check_h2 ? seg.h.h2 : seg.h.h1;
        if (entry != 0.0) return delta;
        delta += seg.len;
    }
    const double tail_entry = check_h2 ? pc.tail.h2 : pc.tail.h1;
    return tail_entry == 0.0 ? kInf : delta;
}

} // namespace

double HamiltonianModel::vanishing_start_h2() const {
    if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_))
        return vanishing_prefix_piecewise(*pc, true);
    if (const auto* rs = std::get_if<Rescaled>(&kind_))
        return rs->base->vanishing_start_h2() / rs->s;
    if (const auto* tn = std::get_if<TraceNormalized>(&kind_)) {
        const double d = tn->base->vanishing_start_h2();
        return d > 0.0 && std::isfinite(d) ? tn->base->trace_primitive(d) : d;
    }
    if (const auto* rp = std::get_if<Reparametrized>(&kind_)) {
        const double d = rp->base->vanishing_start_h2();
        return d > 0.0 && std::isfinite(d) ? map_inverse(rp->phi, d) : d;
    }
    return 0.0;
}

double HamiltonianModel::vanishing_start_h1() const {
    if (const auto* pc = std::get_if<PiecewiseConstant>(&kind_))
        return vanishing_prefix_piecewise(*pc, false);
    if (const auto* rs = std::get_if<Rescaled>(&kind_))
        return rs->base->vanishing_start_h1() / rs->s;
    if (const auto* tn = std::get_if<TraceNormalized>(&kind_)) {
        const double d = tn->base->vanishing_start_h1();
        return d > 0.0 && std::isfinite(d) ? tn->base->trace_primitive(d) : d;
    }
    if (const auto* rp = std::get_if<Reparametrized>(&kind_)) {
        const double d = rp->base->vanishing_start_h1();
        return d > 0.0 && std::isfinite(d) ? map_inverse(rp->phi, d) : d;
    }
    return 0.0;
}

std::vector<double> HamiltonianModel::structural_breakpoints(int max_n) const {
    if (const auto* tp = std::get_if<TwoPhaseRotation>(&kind_)) {
        BreakSeq seq(tp->rule);
        std::vector<double> out;
        for (int n = 1; n <= max_n; ++n) {
            const double t = seq.t(n);
            if (t == 0.0) break;
            out.push_back(t);
        }
        return out;
    }
    if (const auto* rs = std::get_if<Rescaled>(&kind_)) {
        auto v = rs->base->structural_breakpoints(max_n);
        for (auto& x : v) x /= rs->s;
        return v;
    }
    if (const auto* tn = std::get_if<TraceNormalized>(&kind_)) {
        auto v = tn->base->structural_breakpoints(max_n);
        for (auto& x : v) x = tn->base->trace_primitive(x);
        return v;
    }
    if (const auto* rp = std::get_if<Reparametrized>(&kind_)) {
        auto v = rp->base->structural_breakpoints(max_n);
        for (auto& x : v) x = map_inverse(rp->phi, x);
        return v;
    }
    return {};
}

// ---- operations -------------------------------------------------------------------

HamiltonianModel trace_reparameterize(const HamiltonianModel& H) {
    if (!H.limit_point()) throw NotLimitPoint("trace normalisation needs the limit point case");
    if (H.trace_one()) return H;

    if (const auto* pc = std::get_if<PiecewiseConstant>(&H.kind())) {
        PiecewiseConstant out;
        out.segments.reserve(pc->segments.size());
        for (const auto& seg : pc->segments) {
            const double tr = seg.h.trace();
            out.segments.push_back(Segment{seg.len * tr, scale_triple(seg.h, 1.0 / tr)});
        }
        out.tail = scale_triple(pc->tail, 1.0 / pc->tail.trace());
        return HamiltonianModel(out);
    }
    if (const auto* dp = std::get_if<DiagonalPower>(&H.kind())) {
        if (dp->rho1 == dp->rho2)
            return HamiltonianModel(PiecewiseConstant{{}, Triple{0.5, 0.0, 0.5}});
    }
    if (const auto* sp = std::get_if<SingularPower>(&H.kind())) {
        if (sp->rho1 == sp->rho2)
            return HamiltonianModel(PiecewiseConstant{{}, Triple{0.5, 0.5, 0.5}});
    }
    return HamiltonianModel(TraceNormalized{std::make_shared<HamiltonianModel>(H)});
}

HamiltonianModel reparameterize(const HamiltonianModel& H, const MonotoneMap& phi) {
    validate_map(phi);
    if (const auto* a = std::get_if<AffineMap>(&phi)) {
        if (a->c == 1.0) return H;
        if (const auto* pc = std::get_if<PiecewiseConstant>(&H.kind())) {
            PiecewiseConstant out;
            for (const auto& seg : pc->segments)
                out.segments.push_back(Segment{seg.len / a->c, scale_triple(seg.h, a->c)});
            out.tail = scale_triple(pc->tail, a->c);
            return HamiltonianModel(out);
        }
    }
    return HamiltonianModel(Reparametrized{std::make_shared<HamiltonianModel>(H), phi});
}

HamiltonianModel rescale(const HamiltonianModel& H, double s, RescaleMode mode) {
    if (!(s > 0.0)) throw ModelDomainError("rescale needs s > 0");
    double g1, g2;
    if (mode == RescaleMode::PrimitiveWeights) {
        const PrimitiveMatrix m = H.primitive(s);
        if (!(m.m1 > 0.0) || !(m.m2 > 0.0))
            throw ZeroDiagonalPrimitive("rescale weights need m1(s), m2(s) > 0");
        g1 = 1.0 / m.m1;
        g2 = 1.0 / m.m2;
    } else {
        if (!H.trace_one())
            throw ModeAssumptionViolated("plain-s rescaling needs a trace-normalised model");
        g1 = g2 = 1.0 / s;
    }

    if (const auto* pc = std::get_if<PiecewiseConstant>(&H.kind())) {
        const double g3 = std::sqrt(g1 * g2);
        auto wt = [&](const Triple& h) {
            return Triple{s * g1 * h.h1, s * g3 * h.h3, s * g2 * h.h2};
        };
        PiecewiseConstant out;
        for (const auto& seg : pc->segments)
            out.segments.push_back(Segment{seg.len / s, wt(seg.h)});
        out.tail = wt(pc->tail);
        return HamiltonianModel(out);
    }
    return HamiltonianModel(Rescaled{std::make_shared<HamiltonianModel>(H), s, g1, g2});
}

} // namespace canweyl
