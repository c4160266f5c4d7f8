#include "canweyl/verify.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "canweyl/model_json.hpp"
#include "canweyl/weyl.hpp"

namespace canweyl::verify {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string case_digest(const HamiltonianModel& H, const std::string& label) {
    return model_digest(H) + ":" + label;
}

} // namespace

HamiltonianModel gen_random_ham(const RandomHamSpec& spec) {
    if (spec.n_segments < 1 || !(spec.len_lo > 0.0) || !(spec.len_hi >= spec.len_lo))
        throw ModelDomainError("invalid random Hamiltonian spec");
    std::mt19937_64 rng(spec.seed);
    // raw 53-bit uniforms: identical streams across platforms
    auto u01 = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };

    PiecewiseConstant pc;
    const double log_span = std::log(spec.len_hi / spec.len_lo);
    for (int i = 0; i < spec.n_segments; ++i) {
        const double len = spec.len_lo * std::exp(u01() * log_span);
        const double sigma = u01();
        const double theta = 2.0 * (u01() * kPi);
        pc.segments.push_back(Segment{
            len, Triple{0.5 * (1.0 + std::cos(theta)), 0.5 * sigma * std::sin(theta),
                        0.5 * (1.0 - std::cos(theta))}});
    }
    pc.tail = Triple{0.5, 0.5, 0.5};
    return HamiltonianModel(pc);
}

void SuiteReport::finish(double tolerance) {
    min_slack = kInf;
    pass = true;
    for (auto& c : cases) {
        c.pass = c.slack >= -tolerance;
        min_slack = std::min(min_slack, c.slack);
        pass = pass && c.pass;
    }
    if (cases.empty()) min_slack = 0.0;
}

nlohmann::json to_json(const SuiteReport& rep) {
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : rep.cases)
        cases.push_back({{"digest", c.digest}, {"lhs", c.lhs}, {"rhs", c.rhs},
                         {"slack", c.slack}, {"pass", c.pass}});
    return {{"suite", rep.suite}, {"pass", rep.pass}, {"min_slack", rep.min_slack},
            {"cases", cases}};
}

SuiteReport suite_offdiag_bound(const HamiltonianModel& H, const std::vector<double>& gamma_list,
                                const std::vector<double>& t_grid) {
    if (!H.trace_one())
        throw NotTraceNormalized("offdiag bound suite needs a trace-normalised model");
    Timer timer;
    SuiteReport rep;
    rep.suite = "offdiag_bound";
    for (double gamma : gamma_list) {
        if (!(gamma >= 0.0 && gamma < 1.0))
            throw RangeError("offdiag bound needs gamma in [0,1)");
        const double c_gamma = std::max(20.0, 6.0 / (1.0 - gamma));
        for (double t : t_grid) {
            const double lhs =
                preimage_measure(H, Quantity::Sigma, LevelSet{0.0, gamma}, t).measure / t;
            const double rhs = c_gamma * d_of(H, t).value;
            rep.cases.push_back(SuiteCase{
                case_digest(H, "g=" + std::to_string(gamma) + ",t=" + std::to_string(t)), lhs,
                rhs, rhs - lhs, true});
        }
    }
    rep.finish(1e-8);
    rep.runtime_sec = timer.seconds();
    return rep;
}

std::vector<ArcCase> default_arc_cases() {
    return {
        ArcCase{1, kPi / 4, 3 * kPi / 4, false},
        ArcCase{2, kPi / 2, kPi / 2, false},
        ArcCase{2, kPi / 2, kPi / 2, true},
        ArcCase{3, kPi / 3, kPi / 3, false},
        ArcCase{3, kPi / 3, kPi / 3, true},
    };
}

SuiteReport suite_arc_bounds(const HamiltonianModel& H, const std::vector<ArcCase>& cases,
                             double t) {
    if (!H.trace_one())
        throw NotTraceNormalized("arc bound suite needs a trace-normalised model");
    Timer timer;
    SuiteReport rep;
    rep.suite = "arc_bounds";
    auto nu = [&](double th1, double th2) {
        return preimage_measure(H, Quantity::ZetaArc, LevelSet{th1, th2}, t).measure / t;
    };
    auto sin2 = [](double x) { return std::sin(x) * std::sin(x); };

    for (const auto& c : cases) {
        double constant, nu1, nu2;
        std::string label;
        switch (c.geometry) {
            case 1: {
                if (!(c.a1 >= 0.0 && c.a1 < c.a2 && c.a2 <= kPi))
                    throw ArcGeometryError("geometry 1 needs 0 <= phi0 < psi0 <= pi");
                nu1 = nu(-c.a1, c.a1);
                nu2 = nu(c.a2, 2 * kPi - c.a2);
                constant = sin2(0.5 * (c.a2 - c.a1));
                label = "arcs-around-poles";
                break;
            }
            case 2: {
                if (!(c.a1 > 0.0 && c.a1 <= kPi && c.a2 > 0.0 && c.a2 <= kPi))
                    throw ArcGeometryError("geometry 2 needs alpha, beta in (0,pi]");
                if (!c.mirrored) {
                    nu1 = nu(0.0, kPi - c.a1);
                    nu2 = nu(kPi, 2 * kPi - c.a2);
                } else {
                    nu1 = nu(kPi + c.a1, 2 * kPi);
                    nu2 = nu(c.a2, kPi);
                }
                constant = sin2(0.5 * c.a1) * sin2(0.5 * c.a2);
                label = "half-circle-gaps";
                break;
            }
            case 3: {
                if (!(c.a1 > 0.0 && c.a2 > 0.0 && c.a1 + c.a2 <= kPi))
                    throw ArcGeometryError("geometry 3 needs alpha, beta > 0, alpha+beta <= pi");
                if (!c.mirrored) {
                    nu1 = nu(c.a2, kPi - c.a1);
                    nu2 = nu(kPi, 2 * kPi);
                } else {
                    nu1 = nu(kPi + c.a1, 2 * kPi - c.a2);
                    nu2 = nu(0.0, kPi);
                }
                constant = sin2(0.5 * std::min(c.a1, c.a2));
                label = "inner-arc-vs-half";
                break;
            }
            default:
                throw ArcGeometryError("unknown arc geometry");
        }
        const double lhs = constant * nu1 * nu2;
        const double rhs = d_of(H, t).value;
        rep.cases.push_back(SuiteCase{
            case_digest(H, label + ",g" + std::to_string(c.geometry) +
                               (c.mirrored ? "m" : "") + ",t=" + std::to_string(t)),
            lhs, rhs, rhs - lhs, true});
    }
    rep.finish(1e-10);
    rep.runtime_sec = timer.seconds();
    return rep;
}

SuiteReport suite_subinterval_bound(const HamiltonianModel& H,
                                    const std::vector<Interval>& intervals,
                                    const std::vector<double>& t_grid) {
    if (!H.trace_one())
        throw NotTraceNormalized("subinterval bound suite needs a trace-normalised model");
    Timer timer;
    SuiteReport rep;
    rep.suite = "subinterval_bound";
    for (const auto& I : intervals) {
        for (double t : t_grid) {
            double lhs = 0.0;
            const double a = std::max(0.0, I.lo), b = std::min(t, I.hi);
            if (b > a) {
                const PrimitiveMatrix mb = H.primitive(b);
                const PrimitiveMatrix ma =
                    a > 0.0 ? H.primitive(a) : PrimitiveMatrix{};
                const double m1 = mb.m1 - ma.m1, m2 = mb.m2 - ma.m2, m3 = mb.m3 - ma.m3;
                lhs = (m1 * m2 - m3 * m3) / (t * t);
            }
            const double rhs = d_of(H, t).value;
            rep.cases.push_back(SuiteCase{
                case_digest(H, "I=[" + std::to_string(I.lo) + "," + std::to_string(I.hi) +
                                   "],t=" + std::to_string(t)),
                lhs, rhs, rhs - lhs, true});
        }
    }
    rep.finish(1e-8);
    rep.runtime_sec = timer.seconds();
    return rep;
}

SuiteReport suite_weyl_estimates(const HamiltonianModel& H, const std::vector<double>& r_grid,
                                 const WeylEstimateConstants& k, double weyl_tol) {
    if (!H.limit_point()) throw NotLimitPoint("weyl estimate suite needs the limit point case");
    Timer timer;
    SuiteReport rep;
    rep.suite = "weyl_estimates";
    for (double r : r_grid) {
        const AsymptoticsRow row = a_l(H, r);
        const NevanlinnaSample s = weyl_coefficient(H, cplx(0.0, r), weyl_tol);
        const std::string rl = "r=" + std::to_string(r);
        if (s.infinite || !s.converged) {
            rep.cases.push_back(SuiteCase{case_digest(H, rl + ",unconverged"), 1.0, 0.0, -kInf,
                                          false});
            continue;
        }
        const double qa = std::abs(s.q), qi = s.q.imag(), err = s.err;
        rep.cases.push_back(SuiteCase{case_digest(H, rl + ",abs>=A/44"), row.A / k.c_abs,
                                      qa + err, qa + err - row.A / k.c_abs, true});
        rep.cases.push_back(SuiteCase{case_digest(H, rl + ",abs<=44A"), qa - err,
                                      k.c_abs * row.A, k.c_abs * row.A - (qa - err), true});
        rep.cases.push_back(SuiteCase{case_digest(H, rl + ",im>=L/64"), row.L / k.c_im_lo,
                                      qi + err, qi + err - row.L / k.c_im_lo, true});
        rep.cases.push_back(SuiteCase{case_digest(H, rl + ",im<=39.5A"), qi - err,
                                      k.c_im_hi * row.A, k.c_im_hi * row.A - (qi - err), true});
        const double ratio_hi = (qi + err) / std::max(qa - err, 1e-300);
        rep.cases.push_back(SuiteCase{case_digest(H, rl + ",ratio>=d/2816"),
                                      row.d_at_t_hat / k.c_chain, ratio_hi,
                                      ratio_hi - row.d_at_t_hat / k.c_chain, true});
    }
    rep.finish(1e-8);
    rep.runtime_sec = timer.seconds();
    return rep;
}

SuiteReport suite_regular_variation(const std::vector<std::pair<double, double>>& rho_pairs) {
    Timer timer;
    SuiteReport rep;
    rep.suite = "regular_variation";
    const std::vector<double> t_grid = log_grid(1e-8, 1.0, 9);
    for (const auto& [r1, r2] : rho_pairs) {
        const HamiltonianModel H((SingularPower{r1, r2}));
        const double bound = 1.0 - 4.0 * r1 * r2 / ((r1 + r2) * (r1 + r2));
        for (double t : t_grid) {
            const double d = d_of(H, t).value;
            rep.cases.push_back(SuiteCase{
                case_digest(H, "rho=(" + std::to_string(r1) + "," + std::to_string(r2) +
                                   "),t=" + std::to_string(t)),
                std::fabs(d - bound), 1e-8, 1e-8 - std::fabs(d - bound), true});
        }
    }
    // equal-index power-log: d decreases to 0 along the tail decades
    {
        const HamiltonianModel H((PowerLog{1.0, 1.0, 2.0, 0.0}));
        const double d3 = d_of(H, 1e-3).value, d6 = d_of(H, 1e-6).value;
        rep.cases.push_back(SuiteCase{case_digest(H, "powerlog-decay"), d6, 0.5 * d3,
                                      0.5 * d3 - d6, true});
    }
    rep.finish(0.0);
    rep.runtime_sec = timer.seconds();
    return rep;
}

} // namespace canweyl::verify
