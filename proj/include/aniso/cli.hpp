#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

namespace aniso {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitValidation = 2,
    kExitConvexity = 3,
    kExitCurvature = 4,
    kExitNotSpacelike = 5,
    kExitCFL = 6,
    kExitSolver = 7,
};

int exit_code_for(const std::exception& e);

const nlohmann::json& runconfig_schema();

struct RunConfig {
    std::string command;
    nlohmann::json norm = {{"kind", "isotropic"}};
    int subdiv = 5;
    std::uint64_t seed = 42;
    std::string out = "out";
    nlohmann::json surface;             // null when not given
    std::vector<nlohmann::json> surfaces;
    double scale = 1.0;
    std::string sweep;                  // "t=a:b:step"
    double compare_rel = 1e-2;
    double solver_residual = 1e-8;
    nlohmann::json canal = nlohmann::json::object();
    nlohmann::json propagate = nlohmann::json::object();
    nlohmann::json solve = nlohmann::json::object();
    nlohmann::json ibp = nlohmann::json::object();

    // validates against the schema first
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// "t=a:b:step" -> a, a + step, ..., b (inclusive up to rounding)
std::vector<double> parse_sweep(const std::string& text);

// Runs one subcommand; writes its files under config.out only after everything succeeded.
void run_command(const RunConfig& config);

// Full entry point: parses argv, loads --config, applies flag overrides, runs, maps errors.
int run_cli(int argc, const char* const* argv);

} // namespace aniso
