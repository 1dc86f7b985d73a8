#pragma once

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nhrod/sim.hpp"

namespace nhrod::cli {

enum ExitCode : int { Ok = 0, Usage = 1, NumericalAbort = 2 };

inline std::vector<std::size_t> parse_levels(const std::string& text)
{
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = sim::detail::trim(item);
        const long n = sim::detail::parse_long(t, "--levels", 0);
        if (n < long(Grid::min_nodes)) throw sim::usage_error("--levels: each level needs at least 5 nodes");
        out.push_back(std::size_t(n));
    }
    if (out.empty()) throw sim::usage_error("--levels: empty list");
    return out;
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Nonholonomic planar Cosserat rod simulator", "nhrod"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run_cmd = app.add_subcommand("run", "Run a simulation and write diagnostics/snapshots");
    run_cmd->add_option("config", run_config, "Configuration file")->required();

    std::string conv_config, levels_text;
    auto* conv_cmd = app.add_subcommand("converge", "Refinement study against the theta_wave solution");
    conv_cmd->add_option("config", conv_config, "Configuration file")->required();
    conv_cmd->add_option("--levels", levels_text, "Comma-separated node counts, e.g. 17,33,65")->required();

    std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return Usage;
    }

    try {
        if (*run_cmd) {
            const auto cfg = sim::load_config(run_config);
            const auto result = sim::run_to_files(cfg, &err);
            out << std::setprecision(17) << "steps " << result.steps << " t " << result.last.t << " energy "
                << result.last.energy << " c_max " << std::max(result.last.c1_max, result.last.c2_max) << "\n";
        } else {
            const auto cfg = sim::load_config(conv_config);
            const auto rows = sim::convergence(cfg, parse_levels(levels_text));
            sim::write_convergence_table(out, rows);
        }
    } catch (const sim::usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const contract_violation& e) {
        err << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const sim::numerical_abort& e) {
        err << "error: " << e.what() << "\n";
        return NumericalAbort;
    }
    return Ok;
}

} // namespace nhrod::cli
