#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "canweyl/hamiltonian.hpp"
#include "canweyl/model_json.hpp"

using namespace canweyl;

namespace {

constexpr double kPi = 3.14159265358979323846;

HamiltonianModel constant_model(double h1, double h3, double h2) {
    return HamiltonianModel(PiecewiseConstant{{}, Triple{h1, h3, h2}});
}

// Composite-Simpson oracle for integrals of smooth model entries over (0, t):
// log substitution below 1 handles the endpoint singularity, direct rule
// above 1.  Independent of the primitive() code path.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double quad_oracle_entry(const HamiltonianModel& H, int entry, double t) {
    auto value = [&](double x) {
        const Triple h = H.eval(x);
        return entry == 0 ? h.h1 : entry == 1 ? h.h3 : h.h2;
    };
    double total = 0.0;
    const double t_low = std::min(t, 1.0);
    // integral over (0, t_low) via u = log x
    auto g = [&](double u) { return value(std::exp(u)) * std::exp(u); };
    const double u_hi = std::log(t_low);
    double u_lo = u_hi - 40.0;
    while (u_lo > -700.0 && std::fabs(g(u_lo)) > 1e-22) u_lo -= 40.0;
    total += simpson(g, u_lo, u_hi, 80000);
    if (t > 1.0) total += simpson(value, 1.0, t, 80000);
    return total;
}

} // namespace

TEST_SUITE("ham-core") {

TEST_CASE("eval matches direct substitution") {
    SUBCASE("two-phase plus band") {
        HamiltonianModel H((TwoPhaseRotation{kPi / 3, 2 * kPi / 3, ExpQuadratic{1.0}}));
        // [t_2, t_1) = [e^-4, e^-1) is a plus band
        const Triple h = H.eval(0.1);
        CHECK(h.h1 == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(h.h3 == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));
        CHECK(h.h2 == doctest::Approx(0.75).epsilon(1e-14));
    }
    SUBCASE("diagonal power with unit exponents") {
        HamiltonianModel H((DiagonalPower{1.0, 1.0}));
        const Triple h = H.eval(0.5);
        CHECK(h.h1 == 1.0);
        CHECK(h.h3 == 0.0);
        CHECK(h.h2 == 1.0);
    }
    SUBCASE("piecewise tail lookup") {
        HamiltonianModel H(
            PiecewiseConstant{{Segment{1.0, Triple{1, 0, 0}}}, Triple{0, 0, 1}});
        const Triple h = H.eval(2.0);
        CHECK(h.h1 == 0.0);
        CHECK(h.h2 == 1.0);
    }
    SUBCASE("breakpoints use the right limit") {
        HamiltonianModel H(
            PiecewiseConstant{{Segment{1.0, Triple{1, 0, 0}}}, Triple{0, 0, 1}});
        CHECK(H.eval(1.0).h2 == 1.0);
    }
}

TEST_CASE("eval error paths") {
    HamiltonianModel H((DiagonalPower{1.0, 2.0}));
    CHECK_THROWS_AS(H.eval(0.0), NonPositiveTime);
    CHECK_THROWS_AS(H.eval(-1.0), NonPositiveTime);
    CHECK_THROWS_AS(HamiltonianModel((PowerLog{1.0, 1.0, -1.5, 0.0})), ModelDomainError);
    CHECK_THROWS_AS(HamiltonianModel((PowerLog{0.0, 1.0, 0.0, 0.0})), ModelDomainError);
    CHECK_THROWS_AS(HamiltonianModel(PiecewiseConstant{{Segment{1.0, Triple{1, 2, 1}}},
                                                       Triple{1, 0, 1}}),
                    ModelDomainError);
    CHECK_THROWS_AS(
        HamiltonianModel(PiecewiseConstant{{Segment{0.0, Triple{1, 0, 1}}}, Triple{1, 0, 1}}),
        ModelDomainError);
}

TEST_CASE("power-log sentinel at t = 1") {
    HamiltonianModel H((PowerLog{1.0, 1.0, -0.5, 0.5}));
    const Triple h = H.eval(1.0);
    CHECK(h.h1 == kEvalSentinelCap);
    CHECK(h.h2 == 0.0);
    CHECK(h.psd(1e-12));
}

TEST_CASE("primitive closed forms") {
    SUBCASE("diagonal power") {
        HamiltonianModel H((DiagonalPower{1.0, 3.0}));
        const PrimitiveMatrix m = H.primitive(2.0);
        CHECK(m.m1 == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(m.m2 == doctest::Approx(8.0).epsilon(1e-14));
        CHECK(m.m3 == 0.0);
    }
    SUBCASE("singular power off-diagonal against the quadrature oracle") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        const PrimitiveMatrix m = H.primitive(1.0);
        CHECK(m.m3 == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-13));
        CHECK(m.m3 == doctest::Approx(quad_oracle_entry(H, 1, 1.0)).epsilon(1e-10));
    }
    SUBCASE("piecewise constant") {
        HamiltonianModel H(PiecewiseConstant{{Segment{1.0, Triple{0.5, 0.5, 0.5}}},
                                             Triple{0.5, 0.5, 0.5}});
        const PrimitiveMatrix m = H.primitive(3.0);
        CHECK(m.m1 == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(m.m3 == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(m.m2 == doctest::Approx(1.5).epsilon(1e-14));
    }
}

TEST_CASE("primitive consistency with quadrature on a log grid") {
    std::vector<HamiltonianModel> smooth = {
        HamiltonianModel((PowerLog{1.0, 1.0, 2.0, 0.0})),
        HamiltonianModel((DiagonalPower{1.0, 3.0})),
        HamiltonianModel((SingularPower{0.5, 1.5})),
    };
    for (const auto& H : smooth) {
        for (double t : {1e-6, 1e-3, 1.0, 1e2}) {
            const PrimitiveMatrix m = H.primitive(t, 1e-12);
            CHECK(std::fabs(m.m1 - quad_oracle_entry(H, 0, t)) <= 1e-8 * std::max(1.0, m.m1));
            CHECK(std::fabs(m.m3 - quad_oracle_entry(H, 1, t)) <=
                  1e-8 * std::max(1.0, std::fabs(m.m3)));
            CHECK(std::fabs(m.m2 - quad_oracle_entry(H, 2, t)) <= 1e-8 * std::max(1.0, m.m2));
        }
    }
}

TEST_CASE("two-phase primitive against an independent band sum") {
    const double pi3 = kPi / 3;
    HamiltonianModel H((TwoPhaseRotation{pi3, 2 * pi3, ExpQuadratic{1.0}}));
    for (double t : {2.0, 0.2, 1e-3, 1e-7}) {
        // direct sum over bands [e^-(n+1)^2, e^-n^2)
        double m1 = 0, m3 = 0, m2 = 0;
        double hi = t;
        int band = 0;
        while (std::exp(-double(band + 1) * (band + 1)) > t) ++band;
        for (int n = band; n < 40; ++n) {
            const double lo = std::exp(-double(n + 1) * (n + 1));
            const double phi = (n % 2 == 1) ? pi3 : 2 * pi3;
            const double len = hi - (lo < hi ? lo : 0.0);
            m1 += len * std::cos(phi) * std::cos(phi);
            m3 += len * std::cos(phi) * std::sin(phi);
            m2 += len * std::sin(phi) * std::sin(phi);
            if (lo == 0.0 || lo < 1e-320) break;
            hi = lo;
        }
        const PrimitiveMatrix m = H.primitive(t);
        CHECK(m.m1 == doctest::Approx(m1).epsilon(1e-12));
        CHECK(m.m3 == doctest::Approx(m3).epsilon(1e-10));
        CHECK(m.m2 == doctest::Approx(m2).epsilon(1e-12));
    }
}

TEST_CASE("PSD invariant at random sample points") {
    std::mt19937_64 rng(7);
    auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    std::vector<HamiltonianModel> models;
    for (const auto& name : diagnostic_catalog_names()) models.push_back(catalog_model(name));
    for (const auto& H : models) {
        for (int i = 0; i < 10000; ++i) {
            const double t = std::exp(u01() * 20.0 - 12.0);
            const Triple h = H.eval(t);
            CHECK(h.h1 >= 0.0);
            CHECK(h.h2 >= 0.0);
            CHECK(h.h3 * h.h3 <= h.h1 * h.h2 + 1e-12);
        }
    }
}

TEST_CASE("trace reparameterisation") {
    SUBCASE("piecewise segment lengths scale by the trace") {
        HamiltonianModel H(PiecewiseConstant{{Segment{1.0, Triple{2, 0, 0}}},
                                             Triple{0.5, 0.5, 0.5}});
        const HamiltonianModel N = trace_reparameterize(H);
        const auto& pc = std::get<PiecewiseConstant>(N.kind());
        REQUIRE(pc.segments.size() == 1);
        CHECK(pc.segments[0].len == doctest::Approx(2.0));
        CHECK(pc.segments[0].h.h1 == doctest::Approx(1.0));
        CHECK(N.trace_one());
    }
    SUBCASE("two-phase is already normalised") {
        HamiltonianModel H((TwoPhaseRotation{}));
        const HamiltonianModel N = trace_reparameterize(H);
        CHECK(N.trace_one());
        CHECK(N.eval(0.1).h1 == doctest::Approx(H.eval(0.1).h1));
    }
    SUBCASE("constant with trace one is unchanged") {
        const HamiltonianModel H = constant_model(0.5, 0.0, 0.5);
        const HamiltonianModel N = trace_reparameterize(H);
        CHECK(N.eval(1.0).h1 == 0.5);
    }
    SUBCASE("numeric wrapper normalises smooth kinds") {
        const HamiltonianModel N =
            trace_reparameterize(HamiltonianModel((DiagonalPower{1, 3})));
        for (double x : {1e-6, 1e-2, 1.0, 1e3}) {
            CHECK(std::fabs(N.eval(x).trace() - 1.0) <= 1e-12);
        }
        // primitive transforms as M-hat = M o phi: trace of M-hat is x
        CHECK(N.primitive(2.5).trace() == doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("reparameterize") {
    SUBCASE("affine doubles the density") {
        const HamiltonianModel H = constant_model(0.5, 0.5, 0.5);
        const HamiltonianModel R = reparameterize(H, AffineMap{2.0});
        const Triple h = R.eval(1.0);
        CHECK(h.h1 == doctest::Approx(1.0));
        CHECK(h.h3 == doctest::Approx(1.0));
        CHECK(h.h2 == doctest::Approx(1.0));
    }
    SUBCASE("power map chain rule") {
        HamiltonianModel H((DiagonalPower{1.0, 3.0}));
        const HamiltonianModel R = reparameterize(H, PowerMap{2.0});
        for (double x : {0.3, 1.0, 2.0}) {
            CHECK(R.eval(x).h1 == doctest::Approx(2.0 * x).epsilon(1e-12));
            CHECK(R.eval(x).h2 == doctest::Approx(6.0 * std::pow(x, 5)).epsilon(1e-12));
            // primitives transform as M-hat = M o phi
            const PrimitiveMatrix mh = R.primitive(x), mb = H.primitive(x * x);
            CHECK(mh.m1 == doctest::Approx(mb.m1).epsilon(1e-12));
            CHECK(mh.m2 == doctest::Approx(mb.m2).epsilon(1e-12));
        }
    }
    SUBCASE("identity map returns the model unchanged") {
        HamiltonianModel H((SingularPower{1.0, 3.0}));
        const HamiltonianModel R = reparameterize(H, AffineMap{1.0});
        CHECK(R.eval(0.7).h3 == H.eval(0.7).h3);
    }
    SUBCASE("monotonicity is validated") {
        const HamiltonianModel H = constant_model(0.5, 0, 0.5);
        CHECK_THROWS_AS(reparameterize(H, AffineMap{-1.0}), NotMonotone);
        CHECK_THROWS_AS(reparameterize(H, PowerMap{0.0}), NotMonotone);
        CHECK_THROWS_AS(reparameterize(H, SplineMap{{1.0, 2.0}, {2.0, 1.0}}), NotMonotone);
    }
    SUBCASE("spline maps stay monotone and invert") {
        const SplineMap sp{{0.5, 1.0, 2.0}, {0.25, 1.0, 5.0}};
        for (double t : {0.1, 0.6, 1.5, 3.0}) {
            const double x = map_forward(SplineMap(sp), t);
            CHECK(map_inverse(SplineMap(sp), x) == doctest::Approx(t).epsilon(1e-12));
        }
    }
}

TEST_CASE("reparameterisation transform rules on catalog models") {
    const std::vector<MonotoneMap> maps = {AffineMap{2.5}, PowerMap{2.0}};
    for (const auto& name : {"two-phase", "power-log", "singular-power"}) {
        const HamiltonianModel H = catalog_model(name);
        for (const auto& phi : maps) {
            const HamiltonianModel R = reparameterize(H, phi);
            for (double x : {0.05, 0.3, 1.7}) {
                const double tau = map_forward(phi, x);
                const PrimitiveMatrix mh = R.primitive(x), mb = H.primitive(tau);
                CHECK(std::fabs(mh.m1 - mb.m1) <= 1e-10 * std::max(1.0, mb.m1));
                CHECK(std::fabs(mh.m3 - mb.m3) <= 1e-10 * std::max(1.0, std::fabs(mb.m3)));
                // sigma is invariant under the positive scalar phi'
                const Triple hh = R.eval(x), hb = H.eval(tau);
                auto sigma = [](const Triple& h) {
                    return h.h3 == 0.0 ? 0.0 : std::fabs(h.h3) / std::sqrt(h.h1 * h.h2);
                };
                CHECK(std::fabs(sigma(hh) - sigma(hb)) <= 1e-10);
            }
        }
    }
}

TEST_CASE("model JSON schema round trip") {
    const char* examples[] = {
        R"({"kind":"piecewise_constant","segments":[{"len":1.0,"h":[1.0,0.0,0.0]}],"tail":[0.5,0.5,0.5]})",
        R"({"kind":"power_log","alpha":[1.0,1.0],"beta":[2.0,0.0]})",
        R"({"kind":"two_phase","phi_plus":1.0471975512,"phi_minus":2.0943951024,"t_seq":{"exp_quadratic":1.0}})",
        R"({"kind":"diagonal_power","rho":[1.0,3.0]})",
        R"({"kind":"singular_power","rho":[1.0,3.0]})",
    };
    for (const char* text : examples) {
        const auto j = nlohmann::json::parse(text);
        const HamiltonianModel H = model_from_json(j);
        const HamiltonianModel H2 = model_from_json(model_to_json(H));
        CHECK(model_digest(H) == model_digest(H2));
        CHECK(H.eval(0.37).h1 == H2.eval(0.37).h1);
    }
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"kind":"nope"})")),
                    ModelDomainError);
}

TEST_CASE("catalog lookups") {
    CHECK_NOTHROW(catalog_model("diag-half"));
    CHECK_THROWS_AS(catalog_model("missing"), ModelDomainError);
    const HamiltonianModel H =
        catalog_model("diagonal-power", nlohmann::json::parse(R"({"rho":[2.0,5.0]})"));
    CHECK(H.primitive(1.5).m1 == doctest::Approx(std::pow(1.5, 2.0)));
    CHECK(H.primitive(1.5).m2 == doctest::Approx(std::pow(1.5, 5.0)));
}

TEST_CASE("vanishing starts are detected exactly for piecewise models") {
    const HamiltonianModel H2 = catalog_model("h2-start");
    CHECK(H2.vanishing_start_h2() == 1.0);
    CHECK(H2.vanishing_start_h1() == 0.0);
    const HamiltonianModel H1 = catalog_model("h1-start");
    CHECK(H1.vanishing_start_h1() == 2.0);
    CHECK(catalog_model("two-phase").vanishing_start_h2() == 0.0);
}

TEST_CASE("rescale stays in kind for piecewise models") {
    const HamiltonianModel H = catalog_model("two-phase");
    const HamiltonianModel A = rescale(H, 0.25, RescaleMode::PlainS);
    CHECK(A.trace_one());
    // plain-s of a trace-one model is H(st) itself
    CHECK(A.eval(0.3).h1 == doctest::Approx(H.eval(0.25 * 0.3).h1).epsilon(1e-14));
    CHECK_THROWS_AS(rescale(HamiltonianModel((DiagonalPower{1, 3})), 0.5, RescaleMode::PlainS),
                    ModeAssumptionViolated);
    CHECK_THROWS_AS(rescale(H, -1.0, RescaleMode::PrimitiveWeights), ModelDomainError);
}

} // TEST_SUITE
