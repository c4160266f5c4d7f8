#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "canweyl/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"canweyl: Weyl coefficients and high-energy diagnostics of 2x2 canonical systems"};
    app.require_subcommand(1);

    canweyl::cli::RunConfig config;
    std::string grid = "log:1:10000:21";

    auto add_common = [&](CLI::App* cmd, bool with_model) {
        if (with_model) {
            cmd->add_option("--model", config.model, "catalog family name or model JSON path");
            cmd->add_option("--params", config.params, "JSON object overriding model parameters");
        }
        cmd->add_option("--grid", grid, "evaluation grid, log:start:stop:count");
        cmd->add_option("--tol", config.tol, "tolerance for Weyl evaluations");
        cmd->add_option("--seed", config.seed, "seed for randomized suites");
        cmd->add_option("--format", config.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--out", config.out, "output path (default stdout)");
    };

    auto* q = app.add_subcommand("q", "Weyl coefficient along z = iy");
    add_common(q, true);
    auto* asym = app.add_subcommand("asym", "t-hat, A, L, d and Weyl bands along r");
    add_common(asym, true);
    auto* conditions = app.add_subcommand("conditions", "condition (ii)/(iii)/(iv) report");
    add_common(conditions, true);
    auto* check = app.add_subcommand("check", "run the inequality suites");
    add_common(check, true);
    check->add_option("--suite", config.suite, "run only the named suite");
    app.add_subcommand("catalog", "list builtin families and their JSON shapes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        config.grid = canweyl::cli::parse_grid(grid);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    return canweyl::cli::run_command(name, config, std::cout, std::cerr);
}
