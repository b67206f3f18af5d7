#include "lossless/experiments.hpp"
#include "lossless/types.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace ex = lossless::experiments;

namespace {

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> threads;
};

// Returns nullopt after printing a diagnostic.
std::optional<ex::json> load_config(const std::string& path) {
    if (path.empty()) return ex::json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: --config: cannot open " << path << '\n';
        return std::nullopt;
    }
    try {
        return ex::json::parse(in);
    } catch (const ex::json::parse_error& e) {
        std::cerr << "error: " << path << ": " << e.what() << '\n';
        return std::nullopt;
    }
}

int report(const std::vector<std::string>& problems) {
    for (const auto& p : problems) std::cerr << "error: " << p << '\n';
    return problems.empty() ? ex::kExitOk : ex::kExitConfig;
}

int validate(const Globals& g) {
    if (g.config_path.empty()) {
        std::cerr << "error: --config: required for validate\n";
        return ex::kExitConfig;
    }
    const auto config = load_config(g.config_path);
    if (!config) return ex::kExitConfig;
    const auto problems = ex::validate_config(*config, g.seed.has_value());
    if (problems.empty()) std::cout << "ok\n";
    return report(problems);
}

int run(const std::string& experiment, const Globals& g) {
    auto config = load_config(g.config_path);
    if (!config) return ex::kExitConfig;
    if (!config->is_object()) return report({"<root>: expected a JSON object"});
    if (const auto it = config->find("experiment"); it != config->end() && *it != experiment)
        return report({"experiment: config names " + it->dump() + " but the subcommand is " + experiment});
    (*config)["experiment"] = experiment;
    if (const auto problems = ex::validate_config(*config, g.seed.has_value()); !problems.empty())
        return report(problems);

    ex::RunContext ctx;
    ctx.seed = g.seed.value_or(config->value("seed", std::uint64_t{0}));
    ctx.threads = g.threads.value_or(config->value("threads", 1));
    const std::string out = !g.out.empty() ? g.out : config->value("output_dir", "out/" + experiment);

    try {
        const auto result = ex::run_experiment(*config, ctx);
        ex::write_outputs(result, *config, ctx, out);
        for (const auto& c : result.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        std::cout << "wrote " << result.tables.size() << " table(s) and run-manifest.json to " << out << '\n';
        return result.passed() ? ex::kExitOk : ex::kExitCheckFailed;
    } catch (const lossless::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ex::kExitConfig;
    } catch (const lossless::NumericalFailure& e) {
        std::cerr << "numerical failure at t=" << e.time() << ": " << e.what() << '\n';
        return ex::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return ex::kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lossless approximation and thermal measurement experiments"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
    app.add_option("--out", g.out, "Output directory (default out/<experiment>)");
    app.add_option("--threads", g.threads, "Worker threads; 1 gives bitwise-reproducible output")
        ->check(CLI::PositiveNumber);
    app.fallthrough();

    std::string chosen;
    app.add_subcommand("validate", "Schema-check a config without running it")
        ->callback([&] { chosen = "validate"; });
    for (const auto& name : ex::experiment_names())
        app.add_subcommand(name, "Run the " + name + " experiment")->callback([&chosen, name] { chosen = name; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ex::kExitConfig;
    }
    return chosen == "validate" ? validate(g) : run(chosen, g);
}
