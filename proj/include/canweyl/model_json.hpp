#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "canweyl/hamiltonian.hpp"

namespace canweyl {

// Parse / serialize the public model schema:
//   {"kind":"piecewise_constant","segments":[{"len":1.0,"h":[h1,h3,h2]}],"tail":[h1,h3,h2]}
//   {"kind":"power_log","alpha":[a1,a2],"beta":[b1,b2]}
//   {"kind":"two_phase","phi_plus":..,"phi_minus":..,"t_seq":{"exp_quadratic":c}}
//   {"kind":"two_phase",...,"t_seq":{"explicit":[t1,t2,...]}}
//   {"kind":"diagonal_power","rho":[r1,r2]}
//   {"kind":"singular_power","rho":[r1,r2]}
HamiltonianModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const HamiltonianModel& H);

// Stable content digest of a model (FNV-1a over the canonical JSON).
std::string model_digest(const HamiltonianModel& H);

struct CatalogEntry {
    std::string name;
    std::string description;
    nlohmann::json defaults;
};

// Built-in families; params (when non-null) override the default parameters.
const std::vector<CatalogEntry>& catalog();
HamiltonianModel catalog_model(const std::string& name,
                               const nlohmann::json& params = nlohmann::json());

// The six families the diagnostics sweeps run on (standing assumption holds).
std::vector<std::string> diagnostic_catalog_names();

} // namespace canweyl
