#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "canweyl/asymptotics.hpp"
#include "canweyl/hamiltonian.hpp"

namespace canweyl::verify {

struct RandomHamSpec {
    std::uint64_t seed = 1;
    int n_segments = 4;
    double len_lo = 0.1, len_hi = 10.0; // log-uniform segment lengths
};

// Deterministic trace-normalised piecewise model: segments built as
// Gamma[sigma, zeta] with sigma ~ U[0,1], phi ~ U[0,pi); tail (1/2,1/2,1/2).
HamiltonianModel gen_random_ham(const RandomHamSpec& spec);

struct SuiteCase {
    std::string digest;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; // rhs - lhs
    bool pass = true;
};

struct SuiteReport {
    std::string suite;
    std::vector<SuiteCase> cases;
    double min_slack = 0.0;
    bool pass = true;
    double runtime_sec = 0.0; // not serialized: reports stay byte-identical

    void finish(double tolerance);
};

nlohmann::json to_json(const SuiteReport& rep);

// (1/t) lambda((0,t) cap sigma^-1([0,gamma])) <= c(gamma) d(H,t) with
// c(gamma) = max{20, 6/(1-gamma)}; needs a trace-normalised model.
SuiteReport suite_offdiag_bound(const HamiltonianModel& H, const std::vector<double>& gamma_list,
                                const std::vector<double>& t_grid);

struct ArcCase {
    int geometry = 1;  // 1, 2 or 3
    double a1 = 0.0;   // phi0 (1) or alpha (2, 3)
    double a2 = 0.0;   // psi0 (1) or beta (2, 3)
    bool mirrored = false;
};

std::vector<ArcCase> default_arc_cases();

// The three sin^2 arc geometries bounding d(H,t) from below by products of
// normalised zeta-arc preimage measures.
SuiteReport suite_arc_bounds(const HamiltonianModel& H, const std::vector<ArcCase>& cases,
                             double t);

// d(H,t) >= det M(H 1_I, t) / t^2 over intervals and t values.
SuiteReport suite_subinterval_bound(const HamiltonianModel& H,
                                    const std::vector<Interval>& intervals,
                                    const std::vector<double>& t_grid);

struct WeylEstimateConstants {
    double c_abs = 44.0;     // band for |q|
    double c_im_lo = 64.0;   // Im q >= L / c_im_lo
    double c_im_hi = 39.5;   // Im q <= c_im_hi A
    double c_chain = 2816.0; // Im q / |q| >= d(H, t-hat) / c_chain
};

SuiteReport suite_weyl_estimates(const HamiltonianModel& H, const std::vector<double>& r_grid,
                                 const WeylEstimateConstants& k = {}, double weyl_tol = 1e-6);

// SingularPower equality case of the regular-variation lower bound plus the
// equal-index power-log decay trend.
SuiteReport suite_regular_variation(const std::vector<std::pair<double, double>>& rho_pairs);

} // namespace canweyl::verify
