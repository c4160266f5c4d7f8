#pragma once

#include <complex>
#include <optional>

#include "canweyl/hamiltonian.hpp"

namespace canweyl {

using cplx = std::complex<double>;

struct Mat2c {
    cplx a11{1.0}, a12{0.0}, a21{0.0}, a22{1.0};

    cplx det() const { return a11 * a22 - a12 * a21; }
    double max_abs() const;
    Mat2c operator*(const Mat2c& o) const {
        return Mat2c{a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                     a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
};

// exp(A) for a trace-zero 2x2 matrix: cosh(mu) I + sinh(mu)/mu A, mu^2 = -det A.
Mat2c expm_tracezero(const Mat2c& A);

// Moebius action (a11 z + a12) / (a21 z + a22); zeta = infinity allowed via
// the overload without argument.
cplx moebius(const Mat2c& W, cplx zeta);
cplx moebius_at_infinity(const Mat2c& W);

struct FundamentalSolution {
    double T = 0.0;
    cplx z{0.0, 1.0};
    Mat2c W;                 // stored matrix; actual solution is W * exp(log_scale)
    double log_scale = 0.0;
    // |det W - 1| where numerically meaningful (moderate entry sizes), NaN otherwise
    double det_residual = 0.0;
    // max |det(step factor) - 1| accumulated over all accepted steps
    double step_det_residual = 0.0;
};

struct WeylDisc {
    double T = 0.0;
    cplx z{0.0, 1.0};
    cplx center{0.0, 0.0};
    double radius = 0.0;    // +inf sentinel when the image is a half-plane
    bool degenerate = false;
};

struct NevanlinnaSample {
    cplx z{0.0, 1.0};
    cplx q{0.0, 0.0};
    double err = 0.0;       // guaranteed bound: final disc radius
    double T_used = 0.0;
    bool converged = true;
    bool infinite = false;  // q identically infinity (h2 = 0 a.e.)
};

// Incremental propagator for W' J = z W H, W(0) = I.  Exact per-segment
// exponentials on piecewise-constant models; adaptive midpoint freezing with
// Richardson halving otherwise.
class Propagator {
public:
    Propagator(const HamiltonianModel& H, cplx z, double tol);

    void extend(double T); // propagate current front to T (>= current)
    double t() const { return t_; }
    FundamentalSolution solution() const;

private:
    void apply_factor(const Mat2c& E);
    void step_constant(double lo, double hi, const Triple& h);
    void step_smooth(double lo, double hi, int depth);

    const HamiltonianModel* H_;
    cplx z_;
    double tol_;
    double t_ = 0.0;
    double span_ = 1.0;
    Mat2c W_;
    double log_scale_ = 0.0;
    double step_det_residual_ = 0.0;
};

// --- operations ---------------------------------------------------------------

FundamentalSolution propagate(const HamiltonianModel& H, double T, cplx z, double tol = 1e-10);

WeylDisc weyl_disc(const HamiltonianModel& H, double T, cplx z);
// center = Moebius image of the reflected pole, radius from the exact image
// formula radius = |det W| / (2 |Im(conj(w21) w22)|); log_scale folds the
// propagation renormalisation back in.
WeylDisc weyl_disc_from(const Mat2c& W, double log_scale, double T, cplx z);

// Doubles the truncation from T0 = (tr M)^{-1}(1) until the disc radius drops
// below tol or T exceeds 2^40 T0; an unconverged sample carries the achieved
// radius as err.
NevanlinnaSample weyl_coefficient(const HamiltonianModel& H, cplx z, double tol = 1e-8);

struct ConstantWeyl {
    cplx value{0.0, 0.0};
    bool infinite = false;
};

// Closed form for constant H: h3/h2 in the singular case (infinity when
// h2 = 0), (h3 + i sqrt(det H)) / h2 in the regular case.
ConstantWeyl constant_q(double h1, double h3, double h2);

enum class VanishingSide { H2Vanishes, H1Vanishes };

struct DegenerateStartReport {
    VanishingSide side;
    double delta = 0.0;       // length of the vanishing start interval
    double trace_mass = 0.0;  // integral of tr H over it
    std::vector<double> y;    // probe ordinates
    std::vector<cplx> scaled; // q(iy)/(iy) resp. iy q(iy)
    std::vector<double> rel_dev;
    std::vector<double> im_ratio; // Im q / |q| at the probes
};

DegenerateStartReport degenerate_start_asymptote(const HamiltonianModel& H, VanishingSide side);

} // namespace canweyl
