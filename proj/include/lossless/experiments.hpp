#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lossless::experiments {

using json = nlohmann::json;

using Cell = std::variant<double, std::string>;

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

/// Header row, 17 significant digits, LF line endings.
[[nodiscard]] std::string to_csv(const CsvTable& table);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    std::string experiment;
    std::vector<CsvTable> tables;
    std::vector<Check> checks;
    json summary = json::object();

    [[nodiscard]] bool passed() const;
};

struct RunContext {
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Subcommand names in the order they are listed in help output.
[[nodiscard]] const std::vector<std::string>& experiment_names();
[[nodiscard]] bool is_stochastic(const std::string& experiment);

/// Schema diagnostics of a config, one "field: problem" string each; empty when valid.
/// `seed_override` counts as a seed for stochastic experiments.
[[nodiscard]] std::vector<std::string> validate_config(const json& config, bool seed_override = false);

/// Runs the experiment named in config["experiment"] with config["params"].
/// Throws InvalidArgument on bad parameters and NumericalFailure on breakdowns.
[[nodiscard]] ExperimentResult run_experiment(const json& config, const RunContext& ctx);

/// Writes every table as <name>.csv and a run-manifest.json into `dir`.
void write_outputs(const ExperimentResult& result, const json& config, const RunContext& ctx,
                   const std::filesystem::path& dir);

/// Exit codes of the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCheckFailed = 3;
inline constexpr int kExitNumerical = 4;

}  // namespace lossless::experiments
