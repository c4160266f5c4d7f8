#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "canweyl/hamiltonian.hpp"
#include "canweyl/interval_set.hpp"

namespace canweyl {

struct DetRatio {
    double t = 0.0;
    double value = 0.0; // det M / (m1 m2), clamped to [0, 1]
};

// sigma, rotation angle phi in [0, pi), zeta = e^{2 i phi}, signed diagonal
// ratio pi_val; conventions: sigma = pi_val = 0 when h3 = 0, phi = 0 when h2 = 0.
struct ScalarRep {
    double t = 0.0;
    double sigma = 0.0;
    double phi = 0.0;
    std::complex<double> zeta{1.0, 0.0};
    double pi_val = 0.0;
};

struct AsymptoticsRow {
    double r = 0.0;
    double t_hat = 0.0;
    double A = 0.0;
    double L = 0.0;
    double d_at_t_hat = 0.0;
    double q_abs = 0.0;
    double q_im = 0.0;
    double ratio = 0.0;
};

DetRatio d_of(const HamiltonianModel& H, double t, double tol = 1e-12);

// Unique solution of (m1 m2)(t) = 1/(8r)^2.
double t_hat(const HamiltonianModel& H, double r, double tol = 1e-12);

// Fills r, t_hat, A = sqrt(m1/m2)(t_hat), d and L = A d (Weyl fields stay 0).
AsymptoticsRow a_l(const HamiltonianModel& H, double r, double tol = 1e-12);

ScalarRep scalar_rep(const Triple& h, double t = 0.0);
ScalarRep scalar_rep(const HamiltonianModel& H, double t);

// pi_{H,s}(t) = pi_H(st) m1(s)/m2(s) (0 where h3(st) = 0).
double pi_weighted(const HamiltonianModel& H, double s, double t);

// frak t_s(t) = m1(st)/m1(s) + m2(st)/m2(s) and its inverse.
double frak_t(const HamiltonianModel& H, double s, double t);
double frak_t_inv(const HamiltonianModel& H, double s, double x);

// Gamma map over piecewise-constant (sigma, zeta) tables; output has trace 1.
HamiltonianModel gamma_map(const GammaForm& tables);

// Xi map: (sigma_H(t), zeta_H(t)); requires tr H(t) = 1.
std::pair<double, std::complex<double>> xi_map(const HamiltonianModel& H, double t);

// ---- preimage measures ---------------------------------------------------------

enum class Quantity { Sigma, Pi, PiWeighted, ZetaArc };
enum class Transport { None, FrakT };

// Level set: [lo, hi] for Sigma (usually [0, gamma]) and Pi variants; arc
// angles [lo, hi] on the unit circle for ZetaArc.
struct LevelSet {
    double lo = 0.0;
    double hi = 0.0;
};

struct PreimageOptions {
    bool force_sampling = false;
    int sample_points = 1 << 16;
};

struct PreimageResult {
    double measure = 0.0;         // primary estimate
    double measure_refined = 0.0; // doubled-N estimate (same value on exact path)
    bool sampled = false;
    bool unstable = false; // sampled estimates differ by > 5 %
    IntervalSet set;       // base-time preimage (exact path only)
};

// Measure of the transported preimage inside (0, window).  With
// Transport::FrakT the parameter s is required and the set computed is
// lambda((0,window) cap frak t_s(E)) with E the s-scaled preimage.
PreimageResult preimage_measure(const HamiltonianModel& H, Quantity q, LevelSet level,
                                double window, std::optional<double> s = std::nullopt,
                                Transport transport = Transport::None,
                                const PreimageOptions& opts = {});

// Preimage of {t : scalar(t) in [lo, hi]} as a base-time interval set,
// exact for piecewise scalars and monotone-branch solving otherwise.
IntervalSet scalar_preimage(const HamiltonianModel& H, Quantity q, LevelSet level, double t_max);

// (1/t) Integral of det H / (h1 h2) (integrand 1 where the denominator
// vanishes); equals the lambda-average of 1 - sigma^2.
double det_integral_form(const HamiltonianModel& H, double t, double tol = 1e-10);

// ---- condition checkers ----------------------------------------------------------

enum class Verdict { TendsToZero, BoundedAway, Oscillating };
std::string to_string(Verdict v);

struct TrendSeries {
    std::string label;
    std::vector<double> x;      // grid (t or s), decreasing toward 0
    std::vector<double> value;
    Verdict verdict = Verdict::TendsToZero;
    double tail_slope = 0.0; // least-squares slope of log value vs log(1/x)
    double tail_mean = 0.0;
};

// Classify the empirical trend of a positive series as x -> 0 (heuristic).
TrendSeries classify_trend(std::string label, std::vector<double> x, std::vector<double> value);

struct ConditionIIReport {
    std::vector<DetRatio> values;
    TrendSeries series;
    Verdict lim_verdict;
    Verdict liminf_verdict;
};

ConditionIIReport check_condition_ii(const HamiltonianModel& H, const std::vector<double>& t_grid);

struct IJPair {
    Interval I, J;
};

// Validated open intervals in R minus {0}: disjoint closures, at least one
// bounded.
void validate_ij(const IJPair& p);

struct ConditionIIIReport {
    double T = 0.0;
    std::vector<double> gamma_list;
    std::vector<IJPair> ij_pairs;
    std::vector<double> s_grid;
    std::vector<TrendSeries> sigma_series; // one per gamma
    std::vector<TrendSeries> pi_series;    // one per pair (product of the two measures)
};

ConditionIIIReport check_condition_iii(const HamiltonianModel& H, double T,
                                       const std::vector<double>& gamma_list,
                                       const std::vector<IJPair>& ij_pairs,
                                       const std::vector<double>& s_grid);

struct ConditionIVReport {
    std::vector<double> gamma_list;
    std::vector<IJPair> ij_pairs;
    std::vector<double> t_grid;
    std::vector<TrendSeries> sigma_series;
    std::vector<TrendSeries> pi_series;
    double liminf_m1m2_over_t2 = 0.0; // empirical min of m1(t)/t * m2(t)/t on the grid
    bool liminf_warning = false;
};

ConditionIVReport check_condition_iv(const HamiltonianModel& H,
                                     const std::vector<double>& gamma_list,
                                     const std::vector<IJPair>& ij_pairs,
                                     const std::vector<double>& t_grid);

// Default probe grids (asymptotics design choices).
std::vector<double> default_gamma_list();
std::vector<double> log_grid(double lo, double hi, int count);

} // namespace canweyl
