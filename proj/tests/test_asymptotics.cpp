#include <doctest.h>

#include <cmath>
#include <random>

#include "canweyl/asymptotics.hpp"
#include "canweyl/model_json.hpp"
#include "canweyl/weyl.hpp"

using namespace canweyl;

namespace {

constexpr double kPi = 3.14159265358979323846;

HamiltonianModel constant_model(double h1, double h3, double h2) {
    return HamiltonianModel(PiecewiseConstant{{}, Triple{h1, h3, h2}});
}

// sigma = 1 on (0, 1/2), sigma = 0 on (1/2, 1), tail diagonal
HamiltonianModel sigma_step_model() {
    return HamiltonianModel(GammaForm{{0.5, 1.0},
                                      {1.0, 0.0, 0.0},
                                      {kPi / 2, kPi / 2, kPi / 2}});
}

} // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("d(H,t) closed values") {
    SUBCASE("diagonal half identity gives 1") {
        const HamiltonianModel H = constant_model(0.5, 0, 0.5);
        for (double t : {0.1, 1.0, 50.0}) CHECK(d_of(H, t).value == doctest::Approx(1.0));
    }
    SUBCASE("rank-one constant gives 0") {
        const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
        for (double t : {0.1, 1.0, 50.0})
            CHECK(d_of(H, t).value == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("singular power sits exactly at the regular-variation bound") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        for (double t : {1e-6, 1e-2, 1.0, 1e3})
            CHECK(d_of(H, t).value == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("vanishing diagonal primitive is an error") {
        CHECK_THROWS_AS(d_of(catalog_model("h2-start"), 0.5), ZeroDiagonalPrimitive);
    }
}

TEST_CASE("t-hat solves (m1 m2)(t) = 1/(8r)^2") {
    SUBCASE("identity Hamiltonian") {
        const HamiltonianModel H = constant_model(1, 0, 1);
        CHECK(t_hat(H, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("half identity") {
        const HamiltonianModel H = constant_model(0.5, 0, 0.5);
        CHECK(t_hat(H, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("strictly decreasing in r") {
        for (const auto& name : {"two-phase", "power-log", "singular-power"}) {
            const HamiltonianModel H = catalog_model(name);
            double prev = t_hat(H, 0.5);
            for (double r : {1.0, 5.0, 50.0, 1e3}) {
                const double cur = t_hat(H, r);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
}

TEST_CASE("A and L on symmetric models") {
    const AsymptoticsRow row = a_l(constant_model(0.5, 0, 0.5), 3.0);
    CHECK(row.A == doctest::Approx(1.0));
    CHECK(row.L == doctest::Approx(1.0));
    CHECK(row.d_at_t_hat == doctest::Approx(1.0));
    CHECK(row.L <= row.A + 1e-15);
}

TEST_CASE("scalar representation") {
    SUBCASE("rotation triple at pi/3") {
        const ScalarRep r = scalar_rep(Triple{0.25, std::sqrt(3.0) / 4, 0.75});
        CHECK(r.sigma == doctest::Approx(1.0));
        CHECK(r.phi == doctest::Approx(kPi / 3));
        CHECK(r.pi_val == doctest::Approx(3.0));
        CHECK(std::abs(r.zeta - std::exp(std::complex<double>(0, 2 * kPi / 3))) <= 1e-14);
    }
    SUBCASE("negative off-diagonal flips the sign") {
        const ScalarRep r = scalar_rep(Triple{1.0, -1.0, 2.0});
        CHECK(r.sigma == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(r.pi_val == doctest::Approx(-2.0));
        CHECK(r.phi > kPi / 2);
    }
    SUBCASE("diagonal triple has sigma = pi = 0") {
        const ScalarRep r = scalar_rep(Triple{1.0, 0.0, 1.0});
        CHECK(r.sigma == 0.0);
        CHECK(r.pi_val == 0.0);
    }
    SUBCASE("h2 = 0 convention: phi = 0") {
        const ScalarRep r = scalar_rep(Triple{1.0, 0.0, 0.0});
        CHECK(r.phi == 0.0);
        CHECK(std::abs(r.zeta - std::complex<double>(1, 0)) <= 1e-15);
    }
    SUBCASE("pi equals sgn(pi/2 - phi) tan^2 phi on random PSD triples") {
        std::mt19937_64 rng(5);
        auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
        for (int i = 0; i < 500; ++i) {
            const double sg = u01(), phi = u01() * kPi;
            const double theta = 2 * phi;
            const Triple h{0.5 * (1 + std::cos(theta)), 0.5 * sg * std::sin(theta),
                           0.5 * (1 - std::cos(theta))};
            const ScalarRep r = scalar_rep(h);
            if (h.h3 != 0.0) {
                const double expect =
                    (kPi / 2 - r.phi > 0 ? 1.0 : -1.0) * std::tan(r.phi) * std::tan(r.phi);
                CHECK(r.pi_val == doctest::Approx(expect).epsilon(1e-9));
            }
            CHECK((r.pi_val >= 0) == (h.h3 >= 0));
        }
    }
}

TEST_CASE("weighted pi") {
    SUBCASE("constant rank-one model: identically 1") {
        const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
        for (double s : {0.1, 1.0, 4.0})
            for (double t : {0.3, 1.0, 2.5}) CHECK(pi_weighted(H, s, t) == doctest::Approx(1.0));
    }
    SUBCASE("weight 1 when the diagonal primitives agree") {
        // m1(s) = m2(s) for the rank-one constant, so the weight drops out
        const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
        CHECK(pi_weighted(H, 0.7, 2.0) ==
              doctest::Approx(scalar_rep(H, 0.7 * 2.0).pi_val));
    }
    SUBCASE("rescaled model reproduces pi_{H,s} through the other code path") {
        for (const auto& name : {"two-phase", "singular-power"}) {
            const HamiltonianModel H = catalog_model(name);
            for (double s : {0.5, 0.05}) {
                const HamiltonianModel A = rescale(H, s, RescaleMode::PrimitiveWeights);
                for (double t : {0.4, 1.1, 3.0}) {
                    CHECK(scalar_rep(A, t).pi_val ==
                          doctest::Approx(pi_weighted(H, s, t)).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("frak_t") {
    SUBCASE("value 2 at t = 1 for every model and s") {
        for (const auto& name : diagnostic_catalog_names()) {
            const HamiltonianModel H = catalog_model(name);
            for (double s : {0.2, 1.0, 5.0})
                CHECK(frak_t(H, s, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    SUBCASE("identity model: 2t") {
        const HamiltonianModel H = constant_model(1, 0, 1);
        CHECK(frak_t(H, 0.3, 2.5) == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("diagonal power (1,3): t + t^3 and the bisection inverse") {
        HamiltonianModel H((DiagonalPower{1.0, 3.0}));
        for (double s : {0.1, 2.0}) {
            for (double t : {0.2, 1.0, 4.0}) {
                CHECK(frak_t(H, s, t) == doctest::Approx(t + t * t * t).epsilon(1e-12));
                const double x = frak_t(H, s, t);
                CHECK(frak_t_inv(H, s, x) == doctest::Approx(t).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("Gamma and Xi maps") {
    SUBCASE("gamma map closed values") {
        const HamiltonianModel A = gamma_map(GammaForm{{}, {1.0}, {kPi / 2}});
        CHECK(A.eval(1.0).h1 == doctest::Approx(0.5));
        CHECK(A.eval(1.0).h3 == doctest::Approx(0.5));
        const HamiltonianModel B = gamma_map(GammaForm{{}, {0.0}, {0.0}});
        CHECK(B.eval(1.0).h1 == doctest::Approx(1.0));
        CHECK(B.eval(1.0).h2 == doctest::Approx(0.0).epsilon(1e-15));
        const HamiltonianModel C = gamma_map(GammaForm{{}, {1.0}, {2 * kPi / 3}});
        CHECK(C.eval(1.0).h1 == doctest::Approx(0.25));
        CHECK(C.eval(1.0).h3 == doctest::Approx(std::sqrt(3.0) / 4));
        CHECK(C.eval(1.0).h2 == doctest::Approx(0.75));
    }
    SUBCASE("range validation") {
        CHECK_THROWS_AS(gamma_map(GammaForm{{}, {1.5}, {0.0}}), RangeError);
        CHECK_THROWS_AS(gamma_map(GammaForm{{1.0}, {1.0}, {0.0}}), RangeError);
    }
    SUBCASE("xi map values and the round trip") {
        const auto [sg, zeta] = xi_map(constant_model(0.5, 0.5, 0.5), 1.0);
        CHECK(sg == doctest::Approx(1.0));
        CHECK(std::abs(zeta - std::complex<double>(0, 1)) <= 1e-14);
        const auto [sg2, zeta2] = xi_map(constant_model(1, 0, 0), 1.0);
        CHECK(sg2 == 0.0);
        CHECK(std::abs(zeta2 - std::complex<double>(1, 0)) <= 1e-14);
        CHECK_THROWS_AS(xi_map(HamiltonianModel((DiagonalPower{1, 3})), 0.5),
                        NotTraceNormalized);
    }
    SUBCASE("Gamma o Xi is the identity pointwise") {
        std::mt19937_64 rng(13);
        auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
        const HamiltonianModel tp = catalog_model("two-phase");
        for (int i = 0; i < 200; ++i) {
            const double t = std::exp(u01() * 12.0 - 9.0);
            const Triple h = tp.eval(t);
            const ScalarRep r = scalar_rep(h, t);
            const double g1 = 0.5 * (1 + r.zeta.real());
            const double g3 = 0.5 * r.sigma * r.zeta.imag();
            const double g2 = 0.5 * (1 - r.zeta.real());
            CHECK(std::fabs(g1 - h.h1) <= 1e-12);
            CHECK(std::fabs(g3 - h.h3) <= 1e-12);
            CHECK(std::fabs(g2 - h.h2) <= 1e-12);
        }
    }
    SUBCASE("Gamma stability bound with C = 2 on random tables") {
        std::mt19937_64 rng(17);
        auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
        for (int rep = 0; rep < 50; ++rep) {
            const std::vector<double> knots = {0.4, 1.1, 2.0};
            GammaForm a{knots, {}, {}}, b{knots, {}, {}};
            for (size_t i = 0; i <= knots.size(); ++i) {
                a.sigma.push_back(u01());
                b.sigma.push_back(u01());
                a.theta.push_back(2 * kPi * u01());
                b.theta.push_back(2 * kPi * u01());
            }
            const HamiltonianModel A = gamma_map(a), B = gamma_map(b);
            // L1 norms over (0, 3): piecewise-constant integrands
            double lhs = 0.0, rhs = 0.0;
            std::vector<double> cuts = {0.0, 0.4, 1.1, 2.0, 3.0};
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double len = cuts[i + 1] - cuts[i];
                const Triple ha = A.eval(cuts[i] + 1e-9), hb = B.eval(cuts[i] + 1e-9);
                lhs += len * (std::fabs(ha.h1 - hb.h1) + 2 * std::fabs(ha.h3 - hb.h3) +
                              std::fabs(ha.h2 - hb.h2));
                const std::complex<double> za = std::exp(std::complex<double>(0, a.theta[i]));
                const std::complex<double> zb = std::exp(std::complex<double>(0, b.theta[i]));
                rhs += len * (std::fabs(a.sigma[i] - b.sigma[i]) + std::abs(za - zb));
            }
            CHECK(lhs <= 2.0 * rhs + 1e-12);
        }
    }
}

TEST_CASE("preimage measures") {
    SUBCASE("piecewise sigma step") {
        const HamiltonianModel H = sigma_step_model();
        const auto r = preimage_measure(H, Quantity::Sigma, LevelSet{0.0, 0.5}, 1.0);
        CHECK(!r.sampled);
        CHECK(r.measure == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("two-phase F at even breakpoints obeys the ratio bound") {
        const HamiltonianModel H = catalog_model("two-phase");
        auto F = [&](double t) {
            const double a =
                preimage_measure(H, Quantity::Pi, LevelSet{2.9, 3.1}, t).measure / t;
            const double b =
                preimage_measure(H, Quantity::Pi, LevelSet{-3.1, -2.9}, t).measure / t;
            return a * b;
        };
        for (int n = 1; n <= 4; ++n) {
            const double t2n = std::exp(-4.0 * n * n);
            const double ratio = std::exp(-double(2 * n + 1) * (2 * n + 1)) / t2n;
            CHECK(F(t2n) <= ratio);
        }
        for (int n = 2; n <= 4; ++n) {
            const double t2n = std::exp(-4.0 * n * n);
            const double ratio = std::exp(-double(2 * n + 1) * (2 * n + 1)) / t2n;
            CHECK(std::fabs(F(2 * t2n) - 0.25) <= ratio + 1e-12);
        }
    }
    SUBCASE("smooth monotone-branch preimage matches direct evaluation") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        // pi(t) = 3 t^2, so pi in [0.03, 0.75] iff t in [0.1, 0.5]
        const auto set = scalar_preimage(H, Quantity::Pi, LevelSet{0.03, 0.75}, 10.0);
        REQUIRE(set.parts().size() == 1);
        CHECK(set.parts()[0].lo == doctest::Approx(0.1).epsilon(1e-9));
        CHECK(set.parts()[0].hi == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("sampled fallback agrees with the exact path") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        PreimageOptions opts;
        opts.force_sampling = true;
        opts.sample_points = 1 << 14;
        const auto exact = preimage_measure(H, Quantity::Pi, LevelSet{0.03, 0.75}, 2.0);
        const auto sampled =
            preimage_measure(H, Quantity::Pi, LevelSet{0.03, 0.75}, 2.0, std::nullopt,
                             Transport::None, opts);
        CHECK(sampled.sampled);
        CHECK(!sampled.unstable);
        CHECK(std::fabs(sampled.measure - exact.measure) <= 1e-2 * exact.measure + 1e-4);
    }
    SUBCASE("frak_t transport matches a change-of-variables oracle") {
        const HamiltonianModel H = catalog_model("two-phase");
        // for this model frak t_s(t) = 2t exactly
        const double s = 0.01, T = 1.0;
        const auto r = preimage_measure(H, Quantity::PiWeighted, LevelSet{0.9, 1.1}, T, s,
                                        Transport::FrakT);
        const double direct =
            2.0 / s *
            preimage_measure(H, Quantity::Pi, LevelSet{2.9, 3.1}, s * T / 2.0).measure;
        CHECK(r.measure == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("determinant integral form") {
    CHECK(det_integral_form(constant_model(0.5, 0.5, 0.5), 2.0) ==
          doctest::Approx(0.0).epsilon(1e-14));
    CHECK(det_integral_form(constant_model(0.5, 0, 0.5), 2.0) == doctest::Approx(1.0));
    CHECK(det_integral_form(sigma_step_model(), 1.0) == doctest::Approx(0.5).epsilon(1e-13));
    SUBCASE("equivalence with 1 - average of sigma^2 on piecewise models") {
        const HamiltonianModel H = catalog_model("two-phase");
        for (double t : {0.3, 1.0, 4.0}) {
            double avg = 0.0;
            H.for_each_scalar_piece(0.0, t, [&](double a, double b, const Triple& rep) {
                const ScalarRep r = scalar_rep(rep);
                avg += r.sigma * r.sigma * (b - a);
            });
            CHECK(det_integral_form(H, t) == doctest::Approx(1.0 - avg / t).epsilon(1e-12));
        }
    }
}

TEST_CASE("condition (ii) verdicts") {
    const auto grid = log_grid(1e-8, 1e-1, 29);
    CHECK(check_condition_ii(constant_model(0.5, 0.5, 0.5), grid).lim_verdict ==
          Verdict::TendsToZero);
    CHECK(check_condition_ii(HamiltonianModel((SingularPower{1, 3})), grid).lim_verdict ==
          Verdict::BoundedAway);
    const auto two_phase = check_condition_ii(catalog_model("two-phase"), grid);
    CHECK(two_phase.lim_verdict == Verdict::Oscillating);
    CHECK(two_phase.liminf_verdict == Verdict::TendsToZero);
}

TEST_CASE("condition (iii) on trivially satisfied models") {
    const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
    const std::vector<IJPair> pairs = {IJPair{Interval{0.9, 1.1}, Interval{2.0, 3.0}}};
    const auto rep = check_condition_iii(H, 1.0, {0.0, 0.5, 0.9}, pairs, log_grid(1e-3, 1, 9));
    for (const auto& s : rep.sigma_series)
        for (double v : s.value) CHECK(v == 0.0);
    for (const auto& s : rep.pi_series)
        for (double v : s.value) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("condition (iv) on the two-phase example") {
    const HamiltonianModel H = catalog_model("two-phase");
    const std::vector<IJPair> pairs = {IJPair{Interval{2.9, 3.1}, Interval{-3.1, -2.9}}};
    const auto rep = check_condition_iv(H, {0.0, 0.5}, pairs, log_grid(1e-8, 1e-1, 29));
    for (const auto& s : rep.sigma_series)
        for (double v : s.value) CHECK(v == 0.0); // sigma is identically 1
    CHECK(!rep.liminf_warning);
    CHECK_THROWS_AS(
        check_condition_iv(HamiltonianModel((DiagonalPower{1, 3})), {0.5}, pairs, {0.1}),
        NotTraceNormalized);
}

TEST_CASE("interval pair validation") {
    CHECK_NOTHROW(validate_ij(IJPair{Interval{0.9, 1.1}, Interval{-1.1, -0.9}}));
    CHECK_THROWS_AS(validate_ij(IJPair{Interval{-0.5, 0.5}, Interval{2, 3}}),
                    IntervalValidation);
    CHECK_THROWS_AS(validate_ij(IJPair{Interval{1, 3}, Interval{2, 4}}), IntervalValidation);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate_ij(IJPair{Interval{1, inf}, Interval{-inf, -1}}),
                    IntervalValidation);
    CHECK_NOTHROW(validate_ij(IJPair{Interval{1, 2}, Interval{3, inf}}));
}

TEST_CASE("trend classifier on synthetic series") {
    const auto grid = log_grid(1e-6, 1.0, 25);
    std::vector<double> power, flat, wobble;
    for (size_t i = 0; i < grid.size(); ++i) {
        power.push_back(grid[i]);          // ~ t: tends to zero
        flat.push_back(0.5);               // bounded away
        wobble.push_back(i % 2 ? 0.9 : 0.05);
    }
    CHECK(classify_trend("p", grid, power).verdict == Verdict::TendsToZero);
    CHECK(classify_trend("f", grid, flat).verdict == Verdict::BoundedAway);
    CHECK(classify_trend("w", grid, wobble).verdict == Verdict::Oscillating);
}

TEST_CASE("rescaling identities") {
    SUBCASE("plain-s self-similarity of the rank-one constant") {
        const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
        const HamiltonianModel A = rescale(H, 0.37, RescaleMode::PlainS);
        CHECK(A.eval(1.3).h1 == doctest::Approx(0.5));
        CHECK(A.eval(1.3).h3 == doctest::Approx(0.5));
    }
    SUBCASE("d invariance d(A_s H, t) = d(H, st)") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        const HamiltonianModel A = rescale(H, 0.1, RescaleMode::PrimitiveWeights);
        CHECK(d_of(A, 3.0).value == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(d_of(A, 3.0).value == doctest::Approx(d_of(H, 0.3).value).epsilon(1e-12));
    }
    SUBCASE("primitive and sigma transformation rules") {
        std::mt19937_64 rng(23);
        auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
        for (const auto& name : {"two-phase", "power-log"}) {
            const HamiltonianModel H = catalog_model(name);
            for (int i = 0; i < 5; ++i) {
                const double s = std::exp(-4.0 * u01());
                const double t = std::exp(2.0 * u01() - 1.0);
                const PrimitiveMatrix ms = H.primitive(s);
                const HamiltonianModel A = rescale(H, s, RescaleMode::PrimitiveWeights);
                const PrimitiveMatrix ma = A.primitive(t), mb = H.primitive(s * t);
                CHECK(ma.m1 == doctest::Approx(mb.m1 / ms.m1).epsilon(1e-11));
                CHECK(ma.m2 == doctest::Approx(mb.m2 / ms.m2).epsilon(1e-11));
                CHECK(scalar_rep(A, t).sigma ==
                      doctest::Approx(scalar_rep(H, s * t).sigma).epsilon(1e-11));
            }
        }
    }
    SUBCASE("Weyl identity q_{A_s H}(z) = (g3/g2) q_H(g3 z)") {
        const HamiltonianModel H = catalog_model("two-phase");
        const double s = 0.25;
        const PrimitiveMatrix ms = H.primitive(s);
        const double g2 = 1.0 / ms.m2, g3 = 1.0 / std::sqrt(ms.m1 * ms.m2);
        const HamiltonianModel A = rescale(H, s, RescaleMode::PrimitiveWeights);
        const NevanlinnaSample lhs = weyl_coefficient(A, cplx(0, 1), 1e-8);
        const NevanlinnaSample rhs = weyl_coefficient(H, cplx(0, g3), 1e-8);
        REQUIRE(lhs.converged);
        REQUIRE(rhs.converged);
        CHECK(std::abs(lhs.q - (g3 / g2) * rhs.q) <= lhs.err + (g3 / g2) * rhs.err + 1e-8);
    }
}

TEST_CASE("d is invariant under exact reparameterisations") {
    const std::vector<MonotoneMap> maps = {AffineMap{2.5}, PowerMap{2.0}};
    for (const auto& name : {"two-phase", "singular-power", "power-log"}) {
        const HamiltonianModel H = catalog_model(name);
        for (const auto& phi : maps) {
            const HamiltonianModel R = reparameterize(H, phi);
            for (double x : {0.08, 0.9, 2.2}) {
                CHECK(d_of(R, x).value ==
                      doctest::Approx(d_of(H, map_forward(phi, x)).value).epsilon(1e-10));
            }
        }
    }
}

} // TEST_SUITE
