#include "lossless/experiments.hpp"

#include "experiments_internal.hpp"
#include "lossless/thermal.hpp"

#include <Eigen/Core>
#include <fftw3.h>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace lossless::experiments {

namespace {

enum class Kind { Positive, NonNegative, Number, Count, PositiveList, CountList, Matrix, Flag, Word, WordList, Kernel };

struct ParamSpec {
    Kind kind;
    std::vector<std::string> choices;  // Word / WordList
};

struct ExperimentSpec {
    bool stochastic = false;
    std::map<std::string, ParamSpec> params;
};

const std::vector<std::string> kDevices{"M1", "M1hat", "M2", "M2hat"};
const std::vector<std::string> kFilters{"none", "privileged", "realistic"};
const std::vector<std::string> kPriors{"potential", "full"};

const std::map<std::string, ExperimentSpec>& registry() {
    static const std::map<std::string, ExperimentSpec> specs{
        {"approx-memoryless",
         {false,
          {{"k", {Kind::Matrix, {}}},
           {"tau", {Kind::Positive, {}}},
           {"orders", {Kind::CountList, {}}},
           {"step_scale", {Kind::Positive, {}}}}}},
        {"approx-dissipative",
         {false,
          {{"kernel", {Kind::Kernel, {}}},
           {"eps", {Kind::Positive, {}}},
           {"tau0", {Kind::Positive, {}}},
           {"max_states", {Kind::Count, {}}},
           {"window_samples", {Kind::Count, {}}},
           {"quadrature_intervals", {Kind::Count, {}}},
           {"block_grid", {Kind::Count, {}}},
           {"analytic_tail", {Kind::Flag, {}}},
           {"search_order", {Kind::Flag, {}}},
           {"lossless_trials", {Kind::Count, {}}},
           {"lossless_horizon", {Kind::Positive, {}}}}}},
        {"approx-nonlinear",
         {true,
          {{"k", {Kind::Matrix, {}}},
           {"tau", {Kind::Positive, {}}},
           {"e0", {Kind::Positive, {}}},
           {"trials", {Kind::Count, {}}},
           {"energies", {Kind::PositiveList, {}}},
           {"dt", {Kind::Positive, {}}}}}},
        {"fdt",
         {true,
          {{"j", {Kind::Matrix, {}}},
           {"b", {Kind::Matrix, {}}},
           {"temperature", {Kind::Positive, {}}},
           {"trials", {Kind::Count, {}}},
           {"lags", {Kind::Count, {}}},
           {"dt", {Kind::Positive, {}}},
           {"shift_steps", {Kind::Count, {}}}}}},
        {"langevin",
         {true,
          {{"j", {Kind::Matrix, {}}},
           {"k", {Kind::Matrix, {}}},
           {"b", {Kind::Matrix, {}}},
           {"temperature", {Kind::Positive, {}}},
           {"dt", {Kind::Positive, {}}},
           {"steps", {Kind::Count, {}}},
           {"paths", {Kind::Count, {}}},
           {"burn_in", {Kind::Count, {}}},
           {"noise_ks", {Kind::Matrix, {}}},
           {"noise_dt", {Kind::Positive, {}}},
           {"noise_samples", {Kind::Count, {}}}}}},
        {"measure",
         {true,
          {{"device", {Kind::Word, kDevices}},
           {"k_m", {Kind::Positive, {}}},
           {"temperature", {Kind::NonNegative, {}}},
           {"e_m", {Kind::Positive, {}}},
           {"t_m", {Kind::Positive, {}}},
           {"steps", {Kind::Count, {}}},
           {"trials", {Kind::Count, {}}},
           {"filter", {Kind::Word, kFilters}},
           {"prior", {Kind::Word, kPriors}},
           {"riccati_min", {Kind::Positive, {}}},
           {"riccati_max", {Kind::Positive, {}}},
           {"riccati_points", {Kind::Count, {}}}}}},
        {"tradeoff",
         {true,
          {{"devices", {Kind::WordList, kDevices}},
           {"t_m", {Kind::PositiveList, {}}},
           {"k_m", {Kind::PositiveList, {}}},
           {"temperature", {Kind::Positive, {}}},
           {"e_m", {Kind::Positive, {}}},
           {"steps", {Kind::Count, {}}},
           {"trials", {Kind::Count, {}}}}}},
        {"table1",
         {true,
          {{"k_m", {Kind::Positive, {}}},
           {"temperature", {Kind::Positive, {}}},
           {"e_m", {Kind::Positive, {}}},
           {"t_m", {Kind::PositiveList, {}}},
           {"steps", {Kind::Count, {}}},
           {"trials", {Kind::Count, {}}}}}},
    };
    return specs;
}

bool is_count(const json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>() >= 1;
    if (v.is_number_integer()) return v.get<std::int64_t>() >= 1;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return d >= 1.0 && d == std::floor(d) && d < 9e15;
    }
    return false;
}

void check_matrix(const json& v, const std::string& field, std::vector<std::string>& out) {
    if (v.is_string()) {
        const std::filesystem::path path(v.get<std::string>());
        if (!std::filesystem::exists(path)) out.push_back(field + ": referenced file does not exist: " + path.string());
        return;
    }
    if (!v.is_array() || v.empty()) {
        out.push_back(field + ": expected a non-empty nested array (row-major) or a file path");
        return;
    }
    std::size_t cols = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const json& row = v[i];
        const std::string at = field + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.empty()) {
            out.push_back(at + ": expected a non-empty array of numbers");
            return;
        }
        if (i == 0) cols = row.size();
        if (row.size() != cols) {
            out.push_back(at + ": row length " + std::to_string(row.size()) + " differs from " + std::to_string(cols));
            return;
        }
        for (std::size_t j = 0; j < row.size(); ++j)
            if (!row[j].is_number())
                out.push_back(at + "[" + std::to_string(j) + "]: expected a number");
    }
}

void check_kernel(const json& v, const std::string& field, std::vector<std::string>& out) {
    if (!v.is_object()) {
        out.push_back(field + ": expected an object with a \"type\"");
        return;
    }
    const auto type = v.find("type");
    if (type == v.end() || !type->is_string()) {
        out.push_back(field + ".type: required, one of exponential, state_space");
        return;
    }
    const std::string t = type->get<std::string>();
    if (t == "exponential") {
        for (const auto& [key, value] : v.items()) {
            if (key == "type") continue;
            if (key != "gain" && key != "rate") {
                out.push_back(field + "." + key + ": unknown key");
            } else if (!value.is_number()) {
                out.push_back(field + "." + key + ": expected a number");
            } else if (key == "rate" && value.get<double>() <= 0.0) {
                out.push_back(field + ".rate: must be > 0");
            }
        }
    } else if (t == "state_space") {
        for (const char* key : {"a", "b", "c"})
            if (!v.contains(key)) out.push_back(field + "." + key + ": required");
        for (const auto& [key, value] : v.items()) {
            if (key == "type") continue;
            if (key != "a" && key != "b" && key != "c")
                out.push_back(field + "." + key + ": unknown key");
            else
                check_matrix(value, field + "." + key, out);
        }
    } else {
        out.push_back(field + ".type: unknown kernel type \"" + t + "\"");
    }
}

void check_param(const std::string& field, const ParamSpec& spec, const json& v, std::vector<std::string>& out) {
    auto word_ok = [&](const json& w) {
        return w.is_string() && std::find(spec.choices.begin(), spec.choices.end(), w.get<std::string>()) !=
                                    spec.choices.end();
    };
    auto choices = [&] {
        std::string s;
        for (const auto& c : spec.choices) s += (s.empty() ? "" : ", ") + c;
        return s;
    };
    switch (spec.kind) {
        case Kind::Positive:
            if (!v.is_number()) out.push_back(field + ": expected a number");
            else if (!(v.get<double>() > 0.0)) out.push_back(field + ": must be > 0");
            break;
        case Kind::NonNegative:
            if (!v.is_number()) out.push_back(field + ": expected a number");
            else if (!(v.get<double>() >= 0.0)) out.push_back(field + ": must be >= 0");
            break;
        case Kind::Number:
            if (!v.is_number()) out.push_back(field + ": expected a number");
            break;
        case Kind::Count:
            if (!is_count(v)) out.push_back(field + ": expected a positive integer");
            break;
        case Kind::PositiveList:
            if (!v.is_array() || v.empty()) {
                out.push_back(field + ": expected a non-empty array of numbers");
                break;
            }
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!v[i].is_number() || !(v[i].get<double>() > 0.0))
                    out.push_back(field + "[" + std::to_string(i) + "]: must be a number > 0");
            break;
        case Kind::CountList:
            if (!v.is_array() || v.empty()) {
                out.push_back(field + ": expected a non-empty array of integers");
                break;
            }
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!is_count(v[i])) out.push_back(field + "[" + std::to_string(i) + "]: expected a positive integer");
            break;
        case Kind::Matrix:
            check_matrix(v, field, out);
            break;
        case Kind::Flag:
            if (!v.is_boolean()) out.push_back(field + ": expected true or false");
            break;
        case Kind::Word:
            if (!word_ok(v)) out.push_back(field + ": expected one of " + choices());
            break;
        case Kind::WordList:
            if (!v.is_array() || v.empty()) {
                out.push_back(field + ": expected a non-empty array");
                break;
            }
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!word_ok(v[i])) out.push_back(field + "[" + std::to_string(i) + "]: expected one of " + choices());
            break;
        case Kind::Kernel:
            check_kernel(v, field, out);
            break;
    }
}

double boltzmann(const json& config) {
    const auto it = config.find("k_b");
    if (it == config.end()) return kBoltzmannNatural;
    if (it->is_number()) return it->get<double>();
    return it->get<std::string>() == "si" ? kBoltzmannSI : kBoltzmannNatural;
}

std::string quote_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

}  // namespace

namespace detail {

const json* Params::find(const std::string& name) const {
    const auto it = p_.find(name);
    return it == p_.end() ? nullptr : &*it;
}

double Params::number(const std::string& name, double fallback) const {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_number()) throw InvalidArgument("params." + name + ": expected a number");
    return v->get<double>();
}

std::size_t Params::count(const std::string& name, std::size_t fallback) const {
    const json* v = find(name);
    if (!v) return fallback;
    if (!is_count(*v)) throw InvalidArgument("params." + name + ": expected a positive integer");
    return static_cast<std::size_t>(v->get<double>());
}

std::vector<double> Params::list(const std::string& name, std::vector<double> fallback) const {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_array()) throw InvalidArgument("params." + name + ": expected an array");
    std::vector<double> out;
    for (const auto& x : *v) out.push_back(x.get<double>());
    return out;
}

std::vector<std::string> Params::words(const std::string& name, std::vector<std::string> fallback) const {
    const json* v = find(name);
    if (!v) return fallback;
    if (!v->is_array()) throw InvalidArgument("params." + name + ": expected an array");
    std::vector<std::string> out;
    for (const auto& x : *v) out.push_back(x.get<std::string>());
    return out;
}

Mat Params::matrix(const std::string& name, Mat fallback) const {
    const json* v = find(name);
    return v ? parse_matrix(*v, "params." + name) : fallback;
}

std::string Params::text(const std::string& name, std::string fallback) const {
    const json* v = find(name);
    return v ? v->get<std::string>() : fallback;
}

bool Params::flag(const std::string& name, bool fallback) const {
    const json* v = find(name);
    return v ? v->get<bool>() : fallback;
}

Mat parse_matrix(const json& value, const std::string& field) {
    if (value.is_string()) {
        std::ifstream in(value.get<std::string>());
        if (!in) throw InvalidArgument(field + ": cannot open " + value.get<std::string>());
        return parse_matrix(json::parse(in), field);
    }
    std::vector<std::string> problems;
    check_matrix(value, field, problems);
    if (!problems.empty()) throw InvalidArgument(problems.front());
    Mat m(static_cast<Eigen::Index>(value.size()), static_cast<Eigen::Index>(value[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = value[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    return m;
}

Check make_check(std::string name, bool passed, std::string detail) {
    return Check{std::move(name), passed, std::move(detail)};
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace detail

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + quote_cell(table.header[i]);
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const double* d = std::get_if<double>(&row[i])) out += detail::format_number(*d);
            else out += quote_cell(std::get<std::string>(row[i]));
        }
        out += '\n';
    }
    return out;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"approx-memoryless", "approx-dissipative", "approx-nonlinear", "fdt",
                                                "langevin",          "measure",            "tradeoff",         "table1"};
    return names;
}

bool is_stochastic(const std::string& experiment) {
    const auto it = registry().find(experiment);
    return it != registry().end() && it->second.stochastic;
}

std::vector<std::string> validate_config(const json& config, bool seed_override) {
    std::vector<std::string> out;
    if (!config.is_object()) return {"<root>: expected a JSON object"};

    for (const auto& [key, value] : config.items()) {
        (void)value;
        if (key != "experiment" && key != "seed" && key != "params" && key != "output_dir" && key != "k_b" &&
            key != "threads")
            out.push_back(key + ": unknown key");
    }

    const auto exp = config.find("experiment");
    const ExperimentSpec* spec = nullptr;
    if (exp == config.end()) {
        out.push_back("experiment: required");
    } else if (!exp->is_string() || !registry().contains(exp->get<std::string>())) {
        out.push_back("experiment: unknown experiment " + exp->dump());
    } else {
        spec = &registry().at(exp->get<std::string>());
    }

    const auto seed = config.find("seed");
    if (seed != config.end()) {
        if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0))
            out.push_back("seed: expected a non-negative integer");
    } else if (spec && spec->stochastic && !seed_override) {
        out.push_back("seed: required for stochastic experiment " + exp->get<std::string>());
    }

    if (const auto kb = config.find("k_b"); kb != config.end()) {
        const bool preset = kb->is_string() && (kb->get<std::string>() == "natural" || kb->get<std::string>() == "si");
        const bool value = kb->is_number() && kb->get<double>() > 0.0;
        if (!preset && !value) out.push_back("k_b: expected \"natural\", \"si\" or a positive number");
    }
    if (const auto od = config.find("output_dir"); od != config.end() && !od->is_string())
        out.push_back("output_dir: expected a string");
    if (const auto th = config.find("threads"); th != config.end() && !is_count(*th))
        out.push_back("threads: expected a positive integer");

    const auto params = config.find("params");
    if (params != config.end()) {
        if (!params->is_object()) {
            out.push_back("params: expected an object");
        } else if (spec) {
            for (const auto& [key, value] : params->items()) {
                const auto ps = spec->params.find(key);
                if (ps == spec->params.end()) out.push_back("params." + key + ": unknown parameter");
                else check_param("params." + key, ps->second, value, out);
            }
        }
    }
    return out;
}

ExperimentResult run_experiment(const json& config, const RunContext& ctx) {
    const auto problems = validate_config(config, true);
    if (!problems.empty()) throw InvalidArgument(problems.front());
    const std::string name = config.at("experiment").get<std::string>();
    const detail::Params p(config.value("params", json::object()));
    const double k_b = boltzmann(config);

    ExperimentResult r;
    if (name == "approx-memoryless") r = detail::run_approx_memoryless(p, ctx);
    else if (name == "approx-dissipative") r = detail::run_approx_dissipative(p, ctx);
    else if (name == "approx-nonlinear") r = detail::run_approx_nonlinear(p, ctx);
    else if (name == "fdt") r = detail::run_fdt(p, ctx, k_b);
    else if (name == "langevin") r = detail::run_langevin(p, ctx, k_b);
    else if (name == "measure") r = detail::run_measure(p, ctx, k_b);
    else if (name == "tradeoff") r = detail::run_tradeoff(p, ctx, k_b);
    else r = detail::run_table1(p, ctx, k_b);
    r.experiment = name;
    return r;
}

void write_outputs(const ExperimentResult& result, const json& config, const RunContext& ctx,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (const auto& table : result.tables) {
        const std::string file = table.name + ".csv";
        std::ofstream out(dir / file, std::ios::binary);
        out << to_csv(table);
        if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
        files.push_back(file);
    }

    json checks = json::array();
    for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});

    json echo = config;
    echo["seed"] = ctx.seed;
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;

    const json manifest{
        {"experiment", result.experiment},
        {"config", echo},
        {"seed", ctx.seed},
        {"threads", ctx.threads},
        {"k_b", boltzmann(config)},
        {"versions",
         {{"lossless", "1.0.0"},
          {"eigen", eigen.str()},
          {"fftw", std::string(fftw_version)},
          {"compiler", std::string(__VERSION__)},
          {"cxx_standard", static_cast<long>(__cplusplus)}}},
        {"outputs", files},
        {"checks", checks},
        {"summary", result.summary},
        {"passed", result.passed()},
    };
    std::ofstream out(dir / "run-manifest.json", std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + (dir / "run-manifest.json").string());
}

}  // namespace lossless::experiments
