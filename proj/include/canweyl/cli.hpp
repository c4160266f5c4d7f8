#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "canweyl/hamiltonian.hpp"

namespace canweyl::cli {

struct Grid {
    double lo = 1.0;
    double hi = 1e4;
    int count = 21;
};

struct RunConfig {
    std::string model = "constant-singular"; // catalog name or JSON file path
    std::string params;                      // JSON object merged over defaults
    Grid grid;
    double tol = 1e-6;
    std::uint64_t seed = 42;
    std::string format = "csv"; // csv | json
    std::string out;            // output path; empty = use the given stream
    std::string suite;          // cmd_check: run only the named suite
};

// Parse "log:lo:hi:count" grid descriptors.
Grid parse_grid(const std::string& descriptor);

HamiltonianModel resolve_model(const RunConfig& config);

// Exit codes: 0 ok, 1 suite failure, 2 model/config error,
// 3 convergence failure, 4 precondition violation.
int cmd_q(const RunConfig& config, std::ostream& os);
int cmd_asym(const RunConfig& config, std::ostream& os);
int cmd_conditions(const RunConfig& config, std::ostream& os);
int cmd_check(const RunConfig& config, std::ostream& os);
int cmd_catalog(std::ostream& os);

// Maps library exceptions onto the exit-code contract and writes the message
// to err.
int run_command(const std::string& name, const RunConfig& config, std::ostream& os,
                std::ostream& err);

} // namespace canweyl::cli
