#pragma once

#include "lossless/experiments.hpp"
#include "lossless/types.hpp"

#include <string>
#include <vector>

namespace lossless::experiments::detail {

/// Read access to config["params"] with the documented defaults.
/// Values are assumed schema-checked; type mismatches still throw InvalidArgument.
class Params {
public:
    explicit Params(json params) : p_(std::move(params)) {}

    [[nodiscard]] double number(const std::string& name, double fallback) const;
    [[nodiscard]] std::size_t count(const std::string& name, std::size_t fallback) const;
    [[nodiscard]] std::vector<double> list(const std::string& name, std::vector<double> fallback) const;
    [[nodiscard]] std::vector<std::string> words(const std::string& name, std::vector<std::string> fallback) const;
    [[nodiscard]] Mat matrix(const std::string& name, Mat fallback) const;
    [[nodiscard]] std::string text(const std::string& name, std::string fallback) const;
    [[nodiscard]] bool flag(const std::string& name, bool fallback) const;
    [[nodiscard]] const json* find(const std::string& name) const;

private:
    json p_;
};

/// Nested row-major array, or a path to a JSON file holding one.
[[nodiscard]] Mat parse_matrix(const json& value, const std::string& field);

[[nodiscard]] Check make_check(std::string name, bool passed, std::string detail);
[[nodiscard]] std::string format_number(double v);

[[nodiscard]] ExperimentResult run_approx_memoryless(const Params& p, const RunContext& ctx);
[[nodiscard]] ExperimentResult run_approx_dissipative(const Params& p, const RunContext& ctx);
[[nodiscard]] ExperimentResult run_approx_nonlinear(const Params& p, const RunContext& ctx);
[[nodiscard]] ExperimentResult run_fdt(const Params& p, const RunContext& ctx, double k_b);
[[nodiscard]] ExperimentResult run_langevin(const Params& p, const RunContext& ctx, double k_b);
[[nodiscard]] ExperimentResult run_measure(const Params& p, const RunContext& ctx, double k_b);
[[nodiscard]] ExperimentResult run_tradeoff(const Params& p, const RunContext& ctx, double k_b);
[[nodiscard]] ExperimentResult run_table1(const Params& p, const RunContext& ctx, double k_b);

}  // namespace lossless::experiments::detail
