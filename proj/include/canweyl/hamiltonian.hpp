#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "canweyl/errors.hpp"

namespace canweyl {

// Entries of the symmetric 2x2 matrix [[h1, h3], [h3, h2]].
struct Triple {
    double h1 = 0.0;
    double h3 = 0.0;
    double h2 = 0.0;

    double trace() const { return h1 + h2; }
    double det() const { return h1 * h2 - h3 * h3; }
    bool psd(double slack = 1e-12) const {
        return h1 >= -slack && h2 >= -slack && h3 * h3 <= h1 * h2 + slack;
    }
};

// M(t) = integral of H over (0, t), stored as entries (m1, m3, m2).
struct PrimitiveMatrix {
    double t = 0.0;
    double m1 = 0.0;
    double m3 = 0.0;
    double m2 = 0.0;

    double trace() const { return m1 + m2; }
    double det() const { return m1 * m2 - m3 * m3; }
};

struct Segment {
    double len = 0.0;
    Triple h;
};

struct PiecewiseConstant {
    std::vector<Segment> segments; // in order from t = 0
    Triple tail;                   // extended to infinity
};

// H(t) = [[t^(a1-1) |log t|^b1, t^(a3-1) |log t|^b3], ...] with a3, b3 the
// arithmetic means of (a1, a2) and (b1, b2).
struct PowerLog {
    double alpha1 = 1.0, alpha2 = 1.0;
    double beta1 = 0.0, beta2 = 0.0;
};

struct ExpQuadratic {
    double c = 1.0; // t_n = exp(-c n^2)
};
struct ExplicitSeq {
    std::vector<double> points; // strictly decreasing, positive
};
using BreakpointRule = std::variant<ExpQuadratic, ExplicitSeq>;

// Rank-one rotation Hamiltonian alternating between two angles on bands
// [t_{n+1}, t_n); band n odd carries phi_plus, band n even carries phi_minus
// (the unbounded top band [t_1, inf) included).
struct TwoPhaseRotation {
    double phi_plus = 1.0471975511965976;  // pi/3
    double phi_minus = 2.0943951023931953; // 2 pi/3
    BreakpointRule rule = ExpQuadratic{1.0};
};

struct DiagonalPower {
    double rho1 = 1.0, rho2 = 1.0; // H = diag(rho1 t^(rho1-1), rho2 t^(rho2-1))
};

struct SingularPower {
    double rho1 = 1.0, rho2 = 1.0; // as DiagonalPower with h3 = sqrt(h1 h2)
};

// Piecewise-constant scalar tables (sigma, zeta = e^{i theta}) pushed through
// the Gamma map.  Piece i covers (knots[i-1], knots[i]); the last entry of
// each value vector is the tail value.
struct GammaForm {
    std::vector<double> knots;
    std::vector<double> sigma; // size knots.size() + 1, values in [0, 1]
    std::vector<double> theta; // same size, zeta = exp(i theta)
};

struct AffineMap {
    double c = 1.0; // t -> c t
};
struct PowerMap {
    double p = 1.0; // t -> t^p
};
// Piecewise-linear increasing table, extended affinely through the origin
// below the first knot and with the last slope above the last knot.
struct SplineMap {
    std::vector<double> x, y;
};
using MonotoneMap = std::variant<AffineMap, PowerMap, SplineMap>;

double map_forward(const MonotoneMap& m, double t);
double map_inverse(const MonotoneMap& m, double x);
double map_deriv(const MonotoneMap& m, double t);
bool map_is_affine(const MonotoneMap& m);

class HamiltonianModel;
using ModelPtr = std::shared_ptr<const HamiltonianModel>;

// (A_s H)(t) = diag-weighted H(st); g3 = sqrt(g1 g2) handled internally.
struct Rescaled {
    ModelPtr base;
    double s = 1.0;
    double g1 = 1.0, g2 = 1.0;
};

// Trace-normalised reparameterisation of a base model (numeric inverse of
// the running trace where no closed form exists).
struct TraceNormalized {
    ModelPtr base;
};

// H-hat(x) = H(phi(x)) phi'(x).
struct Reparametrized {
    ModelPtr base;
    MonotoneMap phi;
};

using ModelKind = std::variant<PiecewiseConstant, PowerLog, TwoPhaseRotation, DiagonalPower,
                               SingularPower, GammaForm, Rescaled, TraceNormalized, Reparametrized>;

enum class RescaleMode { PrimitiveWeights, PlainS };

// Sentinel cap used by pointwise eval at isolated non-integrable points
// (PowerLog entries with negative exponent at t = 1).
inline constexpr double kEvalSentinelCap = 1e30;

class HamiltonianModel {
public:
    explicit HamiltonianModel(ModelKind kind);

    const ModelKind& kind() const { return kind_; }

    // Pointwise value; right-limit representative at breakpoints.
    Triple eval(double t) const;

    // Entrywise integral over (0, t).  Closed form where available,
    // adaptive quadrature (absolute tolerance tol per entry) otherwise.
    PrimitiveMatrix primitive(double t, double tol = 1e-12) const;

    // m1(t) + m2(t) and its inverse on (0, inf).
    double trace_primitive(double t) const;
    double trace_primitive_inverse(double x) const;

    bool closed_form_primitive() const { return closed_form_; }
    bool limit_point() const { return limit_point_; }
    bool trace_one() const { return trace_one_; }
    bool h1_identically_zero() const { return h1_zero_; }
    bool h2_identically_zero() const { return h2_zero_; }

    // True when H itself is piecewise constant in t (values, not just the
    // scalar representation).
    bool value_piecewise() const { return value_piecewise_; }
    // True when sigma / pi / zeta are piecewise constant in t.
    bool scalar_piecewise() const { return scalar_piecewise_; }

    // Enumerate the value pieces intersecting (lo, hi) in increasing order;
    // requires value_piecewise().  f(a, b, h) with (a, b) the piece clipped
    // to the window.
    void for_each_value_piece(double lo, double hi,
                              const std::function<void(double, double, const Triple&)>& f) const;

    // Like above but the triple is only valid up to a positive scalar factor
    // (enough for sigma, pi, zeta); requires scalar_piecewise().
    void for_each_scalar_piece(double lo, double hi,
                               const std::function<void(double, double, const Triple&)>& f) const;

    // For smooth kinds: knots between which the diagonal ratio h1/h2 (and
    // with it phi, pi) is monotone.  Empty for piecewise kinds.
    std::vector<double> scalar_branch_knots() const;

    // Length of the maximal initial interval where h2 (resp. h1) vanishes;
    // exact for piecewise kinds, 0 for all catalog smooth kinds.
    double vanishing_start_h2() const;
    double vanishing_start_h1() const;

    // Structural breakpoints t_n for TwoPhaseRotation-like models (empty
    // otherwise); n = 1, 2, ... until double underflow.
    std::vector<double> structural_breakpoints(int max_n = 32) const;

private:
    void validate_and_cache();

    ModelKind kind_;
    bool closed_form_ = true;
    bool limit_point_ = true;
    bool trace_one_ = false;
    bool h1_zero_ = false;
    bool h2_zero_ = false;
    bool value_piecewise_ = false;
    bool scalar_piecewise_ = false;
    std::vector<PrimitiveMatrix> prefix_; // piecewise prefix primitives
};

// --- the ham-core operations -------------------------------------------------

// Trace-normalised representative of the reparameterisation class.
HamiltonianModel trace_reparameterize(const HamiltonianModel& H);

// H-hat(x) = H(phi(x)) phi'(x) for a supported monotone descriptor.
HamiltonianModel reparameterize(const HamiltonianModel& H, const MonotoneMap& phi);

// Weighted rescaling A_s H; PrimitiveWeights uses g_i = 1/m_i(s), PlainS uses
// g_1 = g_2 = 1/s and requires a trace-normalised model.
HamiltonianModel rescale(const HamiltonianModel& H, double s, RescaleMode mode);

} // namespace canweyl
