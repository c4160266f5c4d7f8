#include "canweyl/model_json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

namespace canweyl {

using nlohmann::json;

namespace {

Triple triple_from_json(const json& a) {
    if (!a.is_array() || a.size() != 3)
        throw ModelDomainError("triple must be an array [h1, h3, h2]");
    return Triple{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json triple_to_json(const Triple& h) { return json::array({h.h1, h.h3, h.h2}); }

std::pair<double, double> pair_from_json(const json& a, const char* what) {
    if (!a.is_array() || a.size() != 2)
        throw ModelDomainError(std::string(what) + " must be an array of two numbers");
    return {a[0].get<double>(), a[1].get<double>()};
}

} // namespace

HamiltonianModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ModelDomainError("model JSON needs a \"kind\" field");
    const std::string kind = j.at("kind").get<std::string>();

    if (kind == "piecewise_constant") {
        PiecewiseConstant pc;
        if (j.contains("segments")) {
            for (const auto& s : j.at("segments"))
                pc.segments.push_back(
                    Segment{s.at("len").get<double>(), triple_from_json(s.at("h"))});
        }
        pc.tail = triple_from_json(j.at("tail"));
        return HamiltonianModel(pc);
    }
    if (kind == "power_log") {
        const auto [a1, a2] = pair_from_json(j.at("alpha"), "alpha");
        const auto [b1, b2] = pair_from_json(j.at("beta"), "beta");
        return HamiltonianModel(PowerLog{a1, a2, b1, b2});
    }
    if (kind == "two_phase") {
        TwoPhaseRotation tp;
        tp.phi_plus = j.at("phi_plus").get<double>();
        tp.phi_minus = j.at("phi_minus").get<double>();
        if (j.contains("t_seq")) {
            const auto& ts = j.at("t_seq");
            if (ts.contains("exp_quadratic"))
                tp.rule = ExpQuadratic{ts.at("exp_quadratic").get<double>()};
            else if (ts.contains("explicit"))
                tp.rule = ExplicitSeq{ts.at("explicit").get<std::vector<double>>()};
            else
                throw ModelDomainError("t_seq must hold exp_quadratic or explicit");
        }
        return HamiltonianModel(tp);
    }
    if (kind == "diagonal_power") {
        const auto [r1, r2] = pair_from_json(j.at("rho"), "rho");
        return HamiltonianModel(DiagonalPower{r1, r2});
    }
    if (kind == "singular_power") {
        const auto [r1, r2] = pair_from_json(j.at("rho"), "rho");
        return HamiltonianModel(SingularPower{r1, r2});
    }
    if (kind == "gamma_form") {
        GammaForm gf;
        gf.knots = j.value("knots", std::vector<double>{});
        gf.sigma = j.at("sigma").get<std::vector<double>>();
        gf.theta = j.at("theta").get<std::vector<double>>();
        return HamiltonianModel(gf);
    }
    throw ModelDomainError("unknown model kind: " + kind);
}

json model_to_json(const HamiltonianModel& H) {
    struct Ser {
        json operator()(const PiecewiseConstant& pc) const {
            json segs = json::array();
            for (const auto& s : pc.segments)
                segs.push_back({{"len", s.len}, {"h", triple_to_json(s.h)}});
            return {{"kind", "piecewise_constant"}, {"segments", segs},
                    {"tail", triple_to_json(pc.tail)}};
        }
        json operator()(const PowerLog& pl) const {
            return {{"kind", "power_log"},
                    {"alpha", json::array({pl.alpha1, pl.alpha2})},
                    {"beta", json::array({pl.beta1, pl.beta2})}};
        }
        json operator()(const TwoPhaseRotation& tp) const {
            json ts;
            if (const auto* eq = std::get_if<ExpQuadratic>(&tp.rule))
                ts = {{"exp_quadratic", eq->c}};
            else
                ts = {{"explicit", std::get<ExplicitSeq>(tp.rule).points}};
            return {{"kind", "two_phase"}, {"phi_plus", tp.phi_plus},
                    {"phi_minus", tp.phi_minus}, {"t_seq", ts}};
        }
        json operator()(const DiagonalPower& dp) const {
            return {{"kind", "diagonal_power"}, {"rho", json::array({dp.rho1, dp.rho2})}};
        }
        json operator()(const SingularPower& sp) const {
            return {{"kind", "singular_power"}, {"rho", json::array({sp.rho1, sp.rho2})}};
        }
        json operator()(const GammaForm& gf) const {
            return {{"kind", "gamma_form"}, {"knots", gf.knots}, {"sigma", gf.sigma},
                    {"theta", gf.theta}};
        }
        json operator()(const Rescaled& rs) const {
            return {{"kind", "rescaled"}, {"s", rs.s}, {"g1", rs.g1}, {"g2", rs.g2},
                    {"base", model_to_json(*rs.base)}};
        }
        json operator()(const TraceNormalized& tn) const {
            return {{"kind", "trace_normalized"}, {"base", model_to_json(*tn.base)}};
        }
        json operator()(const Reparametrized& rp) const {
            json phi;
            if (const auto* a = std::get_if<AffineMap>(&rp.phi))
                phi = {{"affine", a->c}};
            else if (const auto* p = std::get_if<PowerMap>(&rp.phi))
                phi = {{"power", p->p}};
            else {
                const auto& sp = std::get<SplineMap>(rp.phi);
                phi = {{"spline_x", sp.x}, {"spline_y", sp.y}};
            }
            return {{"kind", "reparametrized"}, {"phi", phi}, {"base", model_to_json(*rp.base)}};
        }
    };
    return std::visit(Ser{}, H.kind());
}

std::string model_digest(const HamiltonianModel& H) {
    const std::string s = model_to_json(H).dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

const std::vector<CatalogEntry>& catalog() {
    static const double pi = 3.14159265358979323846;
    static const std::vector<CatalogEntry> entries = {
        {"constant-singular", "constant H = [[1/2,1/2],[1/2,1/2]] (rank one)",
         json{{"kind", "piecewise_constant"}, {"segments", json::array()},
              {"tail", json::array({0.5, 0.5, 0.5})}}},
        {"identity-half", "constant H = I/2 (alias: diag-half)",
         json{{"kind", "piecewise_constant"}, {"segments", json::array()},
              {"tail", json::array({0.5, 0.0, 0.5})}}},
        {"power-log", "H with entries t^(a-1) |log t|^b, means on the off-diagonal",
         json{{"kind", "power_log"}, {"alpha", json::array({1.0, 1.0})},
              {"beta", json::array({2.0, 0.0})}}},
        {"two-phase", "rank-one rotation alternating on bands t_n = exp(-c n^2)",
         json{{"kind", "two_phase"}, {"phi_plus", pi / 3}, {"phi_minus", 2 * pi / 3},
              {"t_seq", json{{"exp_quadratic", 1.0}}}}},
        {"diagonal-power", "H = diag(r1 t^(r1-1), r2 t^(r2-1))",
         json{{"kind", "diagonal_power"}, {"rho", json::array({1.0, 3.0})}}},
        {"singular-power", "diagonal-power with h3 = sqrt(h1 h2)",
         json{{"kind", "singular_power"}, {"rho", json::array({1.0, 3.0})}}},
        {"h2-start", "h2 vanishes on (0,1), singular constant tail",
         json{{"kind", "piecewise_constant"},
              {"segments", json::array({json{{"len", 1.0}, {"h", json::array({1.0, 0.0, 0.0})}}})},
              {"tail", json::array({0.5, 0.5, 0.5})}}},
        {"h1-start", "h1 vanishes on (0,2), singular constant tail",
         json{{"kind", "piecewise_constant"},
              {"segments", json::array({json{{"len", 2.0}, {"h", json::array({0.0, 0.0, 1.0})}}})},
              {"tail", json::array({0.5, 0.5, 0.5})}}},
    };
    return entries;
}

HamiltonianModel catalog_model(const std::string& name, const json& params) {
    std::string key = name == "diag-half" ? "identity-half" : name;
    for (const auto& e : catalog()) {
        if (e.name != key) continue;
        json j = e.defaults;
        if (!params.is_null()) {
            for (auto it = params.begin(); it != params.end(); ++it) j[it.key()] = it.value();
        }
        return model_from_json(j);
    }
    throw ModelDomainError("unknown catalog model: " + name);
}

std::vector<std::string> diagnostic_catalog_names() {
    return {"constant-singular", "identity-half", "power-log",
            "two-phase",         "diagonal-power", "singular-power"};
}

} // namespace canweyl
