#pragma once

// Subcommands behind the `rks` executable. Exit codes: 0 success,
// 1 diagnostic failure, 2 configuration error, 3 infeasible or failed run.

#include "rks/config.hpp"
#include "rks/experiment.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace rks {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    exit_ok = 0,
    exit_diagnostic_failure = 1,
    exit_config_error = 2,
    exit_infeasible = 3,
};

struct CliOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads; // falls back to RKS_THREADS, then the config
};

struct RunManifest {
    std::string command;
    std::string config_digest;
    std::string tool_version = kToolVersion;
    std::string timestamp; // UTC, ISO 8601
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

// Every constant of the bound chain for a prepared setup.
nlohmann::json constants_json(const ExperimentSetup& setup, const std::string& digest);

int cmd_constants(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_sample(const CliOptions& options, std::ostream& out, std::ostream& err);

// Full command line: `rks <constants|verify|sample> --config <path> [...]`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace rks
