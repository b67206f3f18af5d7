#include "catch_amalgamated.hpp"

#include "lossless/experiments.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ex = lossless::experiments;
using ex::json;

namespace {

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
    for (const auto& d : diags)
        if (d.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("well-formed config validates", "[experiments]") {
    const json c{{"experiment", "fdt"}, {"seed", 3}, {"params", {{"trials", 100}, {"temperature", 2.0}}}};
    CHECK(ex::validate_config(c).empty());
}

TEST_CASE("missing seed on a stochastic experiment names the field", "[experiments]") {
    const json c{{"experiment", "tradeoff"}};
    const auto d = ex::validate_config(c);
    REQUIRE(d.size() == 1);
    CHECK(d[0].rfind("seed:", 0) == 0);
    CHECK(ex::validate_config(c, true).empty());
    CHECK(ex::validate_config(json{{"experiment", "approx-memoryless"}}).empty());
}

TEST_CASE("field diagnostics", "[experiments]") {
    CHECK(mentions(ex::validate_config({{"experiment", "approx-memoryless"}, {"params", {{"tau", -1.0}}}}),
                   "params.tau"));
    CHECK(mentions(ex::validate_config({{"experiment", "nope"}}), "experiment"));
    CHECK(mentions(ex::validate_config({{"experiment", "fdt"}, {"seed", 1}, {"params", {{"bogus", 1}}}}),
                   "params.bogus"));
    CHECK(mentions(ex::validate_config({{"experiment", "fdt"}, {"seed", -4}}), "seed"));
    CHECK(mentions(ex::validate_config({{"experiment", "fdt"}, {"seed", 1}, {"params", {{"trials", 2.5}}}}),
                   "params.trials"));
    CHECK(mentions(ex::validate_config(
                       {{"experiment", "fdt"}, {"seed", 1}, {"params", {{"j", {{0.0, 1.0}, {1.0}}}}}}),
                   "params.j[1]"));
    CHECK(mentions(ex::validate_config(
                       {{"experiment", "fdt"}, {"seed", 1}, {"params", {{"j", "/nonexistent/j.json"}}}}),
                   "does not exist"));
    CHECK(mentions(ex::validate_config({{"experiment", "measure"}, {"seed", 1}, {"params", {{"device", "M3"}}}}),
                   "params.device"));
    CHECK(mentions(ex::validate_config({{"experiment", "approx-dissipative"},
                                        {"params", {{"kernel", {{"type", "exponential"}, {"rate", 0.0}}}}}}),
                   "params.kernel.rate"));
    CHECK(mentions(ex::validate_config({{"experiment", "fdt"}, {"seed", 1}, {"k_b", "kelvin"}}), "k_b"));
    CHECK(mentions(ex::validate_config({{"experiment", "fdt"}, {"seed", 1}, {"colour", 1}}), "colour"));
}

TEST_CASE("CSV keeps 17 significant digits and LF endings", "[experiments]") {
    ex::CsvTable t{"t", {"name", "value"}, {{std::string("a,b"), 0.1}, {std::string("c"), 1.0 / 3.0}}};
    const std::string csv = ex::to_csv(t);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv == "name,value\n\"a,b\",0.10000000000000001\nc,0.33333333333333331\n");
    CHECK(std::strtod("0.33333333333333331", nullptr) == 1.0 / 3.0);
}

TEST_CASE("matrix parameters can reference a file", "[experiments]") {
    const std::string path = "test_experiments_matrix.json";
    std::ofstream(path) << "[[0, -1], [1, 0]]";
    const json c{{"experiment", "fdt"},
                 {"seed", 2},
                 {"params", {{"j", path}, {"b", {{1.0}, {0.0}}}, {"trials", 500}, {"lags", 5}}}};
    CHECK(ex::validate_config(c).empty());
    const auto r = ex::run_experiment(c, {2, 1});
    CHECK(r.tables.front().rows.size() == 5);
}

TEST_CASE("memoryless experiment on a short sweep", "[experiments]") {
    const json c{{"experiment", "approx-memoryless"}, {"params", {{"orders", {4, 8, 16, 32}}}}};
    const auto r = ex::run_experiment(c, {0, 1});
    REQUIRE(r.tables.size() == 1);
    CHECK(r.tables[0].header[0] == "N");
    CHECK(r.tables[0].header[1] == "measured_error");
    CHECK(r.tables[0].header[2] == "theorem1_bound");
    for (const auto& row : r.tables[0].rows) CHECK(std::get<double>(row[2]) >= std::get<double>(row[1]));
    CHECK(r.passed());
}

TEST_CASE("outputs include a manifest sufficient to rerun", "[experiments]") {
    const json c{{"experiment", "langevin"}, {"params", {{"steps", 3000}, {"paths", 2}, {"noise_samples", 1000}}}};
    const ex::RunContext ctx{17, 1};
    const auto r = ex::run_experiment(c, ctx);
    const std::string dir = "test_experiments_out";
    ex::write_outputs(r, c, ctx, dir);
    std::ifstream in(dir + "/run-manifest.json");
    const json m = json::parse(in);
    CHECK(m.at("seed") == 17);
    CHECK(m.at("config").at("seed") == 17);
    CHECK(m.at("config").at("params").at("steps") == 3000);
    CHECK(m.at("versions").contains("eigen"));
    CHECK(m.at("outputs").size() == r.tables.size());
    // Rerun from the manifest echo.
    const auto again = ex::run_experiment(m.at("config"), {m.at("seed").get<std::uint64_t>(), 1});
    CHECK(ex::to_csv(again.tables[0]) == ex::to_csv(r.tables[0]));
}
