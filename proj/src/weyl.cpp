#include "canweyl/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace canweyl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Generator of W' = W B with B = z [[-h3, h1], [-h2, h3]] (from W' J = z W H).
Mat2c generator(cplx z, const Triple& h) {
    return Mat2c{-z * h.h3, z * h.h1, -z * h.h2, z * h.h3};
}

// Growth exponent per unit length for a constant piece: |Re sqrt(-z^2 det H)|.
double growth_rate(cplx z, const Triple& h) {
    const cplx mu = std::sqrt(-z * z * h.det());
    return std::fabs(mu.real());
}

double diff_norm(const Mat2c& A, const Mat2c& B) {
    return std::max(std::max(std::abs(A.a11 - B.a11), std::abs(A.a12 - B.a12)),
                    std::max(std::abs(A.a21 - B.a21), std::abs(A.a22 - B.a22)));
}

} // namespace

double Mat2c::max_abs() const {
    return std::max(std::max(std::abs(a11), std::abs(a12)),
                    std::max(std::abs(a21), std::abs(a22)));
}

Mat2c expm_tracezero(const Mat2c& A) {
    const cplx mu2 = -A.det();
    cplx ch, shc;
    if (std::abs(mu2) < 1e-8) {
        ch = 1.0 + mu2 * 0.5 + mu2 * mu2 / 24.0;
        shc = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
    } else {
        const cplx mu = std::sqrt(mu2);
        ch = std::cosh(mu);
        shc = std::sinh(mu) / mu;
    }
    return Mat2c{ch + shc * A.a11, shc * A.a12, shc * A.a21, ch + shc * A.a22};
}

cplx moebius(const Mat2c& W, cplx zeta) {
    return (W.a11 * zeta + W.a12) / (W.a21 * zeta + W.a22);
}

cplx moebius_at_infinity(const Mat2c& W) { return W.a11 / W.a21; }

// ---- Propagator ---------------------------------------------------------------

Propagator::Propagator(const HamiltonianModel& H, cplx z, double tol)
    : H_(&H), z_(z), tol_(std::max(tol, 1e-14)) {
    // Start at a point where |z| tr M is tiny and take the first-order Magnus
    // step W(t0) = exp(-z M(t0) J) from the closed-form primitive; the
    // relative error is O((|z| tr M)^2).
    const double target = std::min(1e-6, 0.03 * std::sqrt(tol_)) / std::max(std::abs(z), 1.0);
    double t0;
    try {
        t0 = H.trace_primitive_inverse(target);
    } catch (const BracketFailure&) {
        t0 = 1e-300;
    }
    t0 = std::max(t0, 1e-300);
    const PrimitiveMatrix m = H.primitive(t0);
    W_ = expm_tracezero(generator(z_, Triple{m.m1, m.m3, m.m2}));
    t_ = t0;
}

void Propagator::apply_factor(const Mat2c& E) {
    const double emax = E.max_abs();
    if (emax < 1e6) {
        const double res = std::abs(E.det() - 1.0);
        step_det_residual_ = std::max(step_det_residual_, res);
    }
    W_ = W_ * E;
    const double wmax = W_.max_abs();
    if (wmax > 1e100) {
        const double inv = 1.0 / wmax;
        W_.a11 *= inv;
        W_.a12 *= inv;
        W_.a21 *= inv;
        W_.a22 *= inv;
        log_scale_ += std::log(wmax);
    }
}

void Propagator::step_constant(double lo, double hi, const Triple& h) {
    // substep so neither cosh overflow nor the linear part explodes
    const double rate = growth_rate(z_, h);
    const double lin = std::abs(z_) * h.trace();
    double max_len = kInf;
    if (rate > 0.0) max_len = 300.0 / rate;
    if (lin > 0.0) max_len = std::min(max_len, 1e280 / lin);
    int n = 1;
    if (std::isfinite(max_len) && hi - lo > max_len)
        n = int(std::ceil((hi - lo) / max_len));
    const double step = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        Mat2c B = generator(z_, h);
        B.a11 *= step;
        B.a12 *= step;
        B.a21 *= step;
        B.a22 *= step;
        apply_factor(expm_tracezero(B));
    }
}

namespace {

// Fourth-order commutator-free step for W' = W B(t): two frozen trace-zero
// exponentials built from the Gauss-point values of the generator.
Mat2c cf4_step(const HamiltonianModel& H, cplx z, double a, double b) {
    const double len = b - a;
    const double gauss_off = 0.28867513459481287; // sqrt(3)/6
    const Triple h1 = H.eval(a + (0.5 - gauss_off) * len);
    const Triple h2 = H.eval(a + (0.5 + gauss_off) * len);
    const Mat2c b1 = generator(z, h1), b2 = generator(z, h2);
    const double ca = 0.25 + 2.0 * gauss_off * 0.5; // 1/4 + sqrt(3)/6
    const double cb = 0.25 - 2.0 * gauss_off * 0.5; // 1/4 - sqrt(3)/6
    auto mix = [&](double w1, double w2) {
        return Mat2c{len * (w1 * b1.a11 + w2 * b2.a11), len * (w1 * b1.a12 + w2 * b2.a12),
                     len * (w1 * b1.a21 + w2 * b2.a21), len * (w1 * b1.a22 + w2 * b2.a22)};
    };
    return expm_tracezero(mix(ca, cb)) * expm_tracezero(mix(cb, ca));
}

} // namespace

void Propagator::step_smooth(double lo, double hi, int depth) {
    const double len = hi - lo;
    if (!(len > 0.0)) return;
    const double m = 0.5 * (lo + hi);
    if (depth < 48 && growth_rate(z_, H_->eval(m)) * len > 150.0) {
        step_smooth(lo, m, depth + 1);
        step_smooth(m, hi, depth + 1);
        return;
    }

    const Mat2c full = cf4_step(*H_, z_, lo, hi);
    const Mat2c half = cf4_step(*H_, z_, lo, m) * cf4_step(*H_, z_, m, hi);
    const double scale = std::max(1.0, half.max_abs());
    const double err = diff_norm(full, half) / scale;
    // the floor keeps sub-chunk budgets reachable in double precision
    const double budget = std::max(tol_ * (len / span_), 5e-15);
    if (err <= budget || depth >= 48) {
        if (depth >= 48 && err > 1e3 * budget)
            throw StepFailure("adaptive propagation: step control exhausted");
        apply_factor(half);
        return;
    }
    step_smooth(lo, m, depth + 1);
    step_smooth(m, hi, depth + 1);
}

void Propagator::extend(double T) {
    if (!(T > t_)) return;
    span_ = std::max(T - t_, 1e-12);
    if (H_->value_piecewise()) {
        H_->for_each_value_piece(
            t_, T, [this](double a, double b, const Triple& h) { step_constant(a, b, h); });
    } else {
        // log-spaced chunks toward the (possibly singular) left end, adaptive
        // within each chunk
        double lo = t_;
        while (lo < T) {
            const double hi = std::min(T, lo * 2.0);
            step_smooth(lo, hi, 0);
            lo = hi;
        }
    }
    t_ = T;
}

FundamentalSolution Propagator::solution() const {
    FundamentalSolution fs;
    fs.T = t_;
    fs.z = z_;
    fs.W = W_;
    fs.log_scale = log_scale_;
    fs.step_det_residual = step_det_residual_;
    if (log_scale_ == 0.0 && W_.max_abs() < 1e6)
        fs.det_residual = std::abs(W_.det() - 1.0);
    else
        fs.det_residual = kNaN;
    return fs;
}

FundamentalSolution propagate(const HamiltonianModel& H, double T, cplx z, double tol) {
    if (!(T > 0.0)) throw NonPositiveTime("propagate needs T > 0");
    Propagator p(H, z, tol);
    p.extend(T);
    return p.solution();
}

// ---- Weyl disc -----------------------------------------------------------------

WeylDisc weyl_disc_from(const Mat2c& W, double log_scale, double T, cplx z) {
    WeylDisc d;
    d.T = T;
    d.z = z;

    const cplx a = W.a11, b = W.a12, c = W.a21, e = W.a22;
    const double cd_scale = std::abs(c) * std::abs(e);
    const double im_cd = std::imag(std::conj(c) * e);

    // The image of the closed upper half-plane is a disc exactly when
    // Im(conj(w21) w22) > 0; otherwise the boundary image is a line (or the
    // matrix is still too close to the identity to resolve one).
    if (!(im_cd > 1e-15 * std::max(cd_scale, 1e-300))) {
        d.degenerate = true;
        d.radius = kInf;
        const cplx den_i = c * cplx(0, 1) + e;
        d.center = std::abs(den_i) > 0 ? moebius(W, cplx(0, 1)) : cplx(0, 0);
        return d;
    }

    // center = M(conj(pole)); the product form cancels the stored scale
    d.center = (b * std::conj(c) - a * std::conj(e)) / (cplx(0, 2) * im_cd);
    // radius = |det W| / (2 Im(conj(w21) w22)) with det W = 1 analytically
    const double log_radius = -2.0 * log_scale - std::log(2.0 * im_cd);
    d.radius = std::exp(log_radius);
    return d;
}

WeylDisc weyl_disc(const HamiltonianModel& H, double T, cplx z) {
    if (!(z.imag() > 0.0)) throw ModelDomainError("weyl_disc needs Im z > 0");
    const FundamentalSolution fs = propagate(H, T, z, 1e-11);
    return weyl_disc_from(fs.W, fs.log_scale, T, z);
}

// ---- Weyl coefficient ------------------------------------------------------------

NevanlinnaSample weyl_coefficient(const HamiltonianModel& H, cplx z, double tol) {
    if (!(z.imag() > 0.0)) throw ModelDomainError("weyl_coefficient needs Im z > 0");
    if (!H.limit_point()) throw NotLimitPoint("weyl_coefficient needs the limit point case");

    NevanlinnaSample s;
    s.z = z;
    if (H.h2_identically_zero()) {
        s.infinite = true;
        s.q = cplx(kInf, kInf);
        s.err = 0.0;
        return s;
    }

    double T0;
    try {
        T0 = H.trace_primitive_inverse(1.0);
    } catch (const BracketFailure&) {
        T0 = 1.0;
    }

    Propagator prop(H, z, std::min(tol, 1e-6) * 0.1);
    double T = T0;
    std::optional<WeylDisc> best;
    for (int k = 0; k <= 40; ++k) {
        prop.extend(T);
        const FundamentalSolution cur = prop.solution();
        const WeylDisc d = weyl_disc_from(cur.W, cur.log_scale, T, z);
        if (!d.degenerate && (!best || d.radius < best->radius)) best = d;
        if (!d.degenerate && d.radius <= tol) {
            s.q = d.center;
            s.err = d.radius;
            s.T_used = T;
            s.converged = true;
            return s;
        }
        T *= 2.0;
    }
    if (best) {
        s.q = best->center;
        s.err = best->radius;
        s.T_used = best->T;
        s.converged = false;
        return s;
    }
    // discs stayed half-planes through T_max
    s.infinite = true;
    s.q = cplx(kInf, kInf);
    s.err = kInf;
    s.T_used = T / 2.0;
    s.converged = false;
    return s;
}

ConstantWeyl constant_q(double h1, double h3, double h2) {
    const Triple h{h1, h3, h2};
    if (!h.psd(1e-9 * std::max(1.0, h1 * h2)))
        throw ModelDomainError("constant_q needs a PSD triple");
    if (h2 == 0.0) {
        if (h1 == 0.0) throw ModelDomainError("constant_q needs a nonzero triple");
        return ConstantWeyl{cplx(kInf, kInf), true};
    }
    const double det = std::max(0.0, h1 * h2 - h3 * h3);
    return ConstantWeyl{cplx(h3 / h2, std::sqrt(det) / h2), false};
}

DegenerateStartReport degenerate_start_asymptote(const HamiltonianModel& H, VanishingSide side) {
    DegenerateStartReport rep;
    rep.side = side;
    rep.delta = side == VanishingSide::H2Vanishes ? H.vanishing_start_h2()
                                                  : H.vanishing_start_h1();
    if (!(rep.delta > 0.0) || !std::isfinite(rep.delta))
        throw NoDegenerateStart("requested diagonal entry does not vanish on a start interval");
    rep.trace_mass = H.trace_primitive(rep.delta);

    rep.y = {1e2, 1e3, 1e4};
    for (double y : rep.y) {
        const NevanlinnaSample s = weyl_coefficient(H, cplx(0.0, y), 1e-9);
        const cplx iy(0.0, y);
        cplx scaled, target;
        if (side == VanishingSide::H2Vanishes) {
            scaled = s.q / iy;
            target = cplx(rep.trace_mass, 0.0);
        } else {
            // y q(iy) -> i / (tr mass), so iy q(iy) -> -1 / (tr mass)
            scaled = iy * s.q;
            target = cplx(-1.0 / rep.trace_mass, 0.0);
        }
        rep.scaled.push_back(scaled);
        rep.rel_dev.push_back(std::abs(scaled - target) / std::abs(target));
        rep.im_ratio.push_back(s.q.imag() / std::abs(s.q));
    }
    return rep;
}

} // namespace canweyl
