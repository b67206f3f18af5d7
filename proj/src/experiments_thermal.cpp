#include "experiments_internal.hpp"

#include "lossless/measurement.hpp"
#include "lossless/random.hpp"
#include "lossless/stats.hpp"
#include "lossless/thermal.hpp"

#include <cmath>

namespace lossless::experiments::detail {

namespace {

struct CovarianceSums {
    Mat sum;
    std::size_t count = 0;
};

}  // namespace

ExperimentResult run_fdt(const Params& p, const RunContext& ctx, double k_b) {
    const MeasuredSystem lc = MeasuredSystem::lc_fixture();
    const Mat j = p.matrix("j", lc.j);
    const Mat b = p.matrix("b", Mat(lc.b));
    const double temperature = p.number("temperature", 1.0);
    const std::size_t trials = p.count("trials", 100000);
    const std::size_t lags = p.count("lags", 50);
    const double dt = p.number("dt", 0.1);
    const std::size_t shift = p.count("shift_steps", 10);
    const LosslessLinear sys(j, b, Mat::Zero(b.cols(), b.cols()));
    const Eigen::Index n = sys.states();
    const Eigen::Index ports = sys.ports();

    // Equipartition over independent Gibbs draws (stream offset by one so it does not reuse the FDT draws).
    const ThermalEnsemble ens{temperature, k_b, n, Vec(), derive_seed(ctx.seed, 1)};
    const MomentSums energy = accumulate_moments(trials, 1, ctx.threads, [&](std::size_t i, std::vector<double>& out) {
        out[0] = internal_energy(ens.draw(i), Vec::Zero(n));
    });
    const double u_mean = energy.means()[0];
    const double u_se = energy.standard_errors()[0];
    const double u_expected = 0.5 * static_cast<double>(n) * k_b * temperature;
    const double u_z = std::abs(u_mean - u_expected) / u_se;

    const FdtReport rep = empirical_fdt_check(sys, temperature, trials, dt, lags, derive_seed(ctx.seed, 0), k_b, shift,
                                              ctx.threads);

    CsvTable fdt{"fdt", {"lag", "row", "col", "analytic", "empirical", "stderr"}, {}};
    for (std::size_t l = 0; l < rep.lags.size(); ++l)
        for (Eigen::Index r = 0; r < ports; ++r)
            for (Eigen::Index c = 0; c < ports; ++c)
                fdt.rows.push_back({rep.lags[l], static_cast<double>(r), static_cast<double>(c), rep.analytic[l](r, c),
                                    rep.empirical[l](r, c), rep.std_error[l](r, c)});
    CsvTable equi{"equipartition", {"states", "samples", "expected", "mean_energy", "stderr", "z"}, {}};
    equi.rows.push_back({static_cast<double>(n), static_cast<double>(trials), u_expected, u_mean, u_se, u_z});

    ExperimentResult r;
    r.tables.push_back(std::move(fdt));
    r.tables.push_back(std::move(equi));
    r.checks.push_back(make_check("equipartition", u_z <= 3.0,
                                  "mean energy " + format_number(u_mean) + " vs " + format_number(u_expected) +
                                      ", z = " + format_number(u_z)));
    r.checks.push_back(make_check("fluctuation_covariance", rep.max_z <= 5.0,
                                  "max deviation " + format_number(rep.max_z) + " standard errors"));
    r.checks.push_back(make_check("stationarity", rep.max_stationarity_z <= 5.0,
                                  "max shift deviation " + format_number(rep.max_stationarity_z) + " standard errors"));
    r.summary = {{"mean_energy", u_mean}, {"energy_z", u_z}, {"max_z", rep.max_z},
                 {"max_abs_deviation", rep.max_abs_deviation}, {"stationarity_z", rep.max_stationarity_z}};
    return r;
}

ExperimentResult run_langevin(const Params& p, const RunContext& ctx, double k_b) {
    const Mat j = p.matrix("j", Mat::Zero(1, 1));
    const Mat k = p.matrix("k", Mat::Identity(1, 1));
    const Mat b = p.matrix("b", Mat::Identity(1, 1));
    const double temperature = p.number("temperature", 1.0);
    const double dt = p.number("dt", 0.01);
    const std::size_t steps = p.count("steps", 100000);
    const std::size_t paths = p.count("paths", 32);
    const std::size_t burn_in = p.count("burn_in", 1000);
    const Mat noise_ks = p.matrix("noise_ks", Mat::Identity(1, 1));
    const double noise_dt = p.number("noise_dt", 0.01);
    const std::size_t noise_samples = p.count("noise_samples", 100000);
    if (burn_in >= steps) throw InvalidArgument("params.burn_in: must be smaller than params.steps");

    const LangevinModel model = LangevinModel::make(j, k, b, temperature, k_b);
    const Eigen::Index n = j.rows();
    const InputFn zero = [&](double) { return Vec::Zero(b.cols()); };
    const double horizon = dt * static_cast<double>(steps);

    // Per-path second moments after burn-in; reduced in path order.
    std::vector<CovarianceSums> per_path(paths);
    parallel_trials(paths, ctx.threads, [&](std::size_t path) {
        const Trajectory x = simulate_langevin(model, zero, Vec::Zero(n), dt, horizon, derive_seed(ctx.seed, path));
        CovarianceSums s{Mat::Zero(n, n), 0};
        for (std::size_t i = burn_in + 1; i < x.size(); ++i) {
            s.sum.noalias() += x[i] * x[i].transpose();
            ++s.count;
        }
        per_path[path] = std::move(s);
    });
    Mat cov = Mat::Zero(n, n);
    std::size_t count = 0;
    std::vector<double> path_var;
    for (const auto& s : per_path) {
        cov += s.sum;
        count += s.count;
        path_var.push_back(s.sum.trace() / static_cast<double>(s.count * static_cast<std::size_t>(n)));
    }
    cov /= static_cast<double>(count);
    const double kt = k_b * temperature;
    const double state_ratio = cov.trace() / (static_cast<double>(n) * kt);
    const double state_se = paths > 1 ? standard_error(path_var) / kt : 0.0;
    const Mat out_cov = b.transpose() * cov * b;
    const Mat out_expected = kt * b.transpose() * b;
    const double out_ratio = out_cov.trace() / out_expected.trace();

    const Trajectory noise =
        sample_white_noise(noise_ks, temperature, noise_dt, noise_samples, derive_seed(ctx.seed, paths), k_b);
    const Mat noise_cov = covariance_about(noise.values(), Vec::Zero(noise.dim()));
    const Mat noise_expected = johnson_nyquist_intensity(noise_ks, temperature, k_b) / noise_dt;
    const double noise_ratio = noise_cov.trace() / noise_expected.trace();
    const double noise_se = std::sqrt(2.0 / static_cast<double>(noise_samples));

    CsvTable table{"langevin", {"quantity", "expected", "measured", "ratio", "stderr_ratio"}, {}};
    table.rows.push_back({"state_variance", static_cast<double>(n) * kt, cov.trace(), state_ratio, state_se});
    table.rows.push_back({"output_variance", out_expected.trace(), out_cov.trace(), out_ratio, state_se});
    table.rows.push_back({"band_limited_noise", noise_expected.trace(), noise_cov.trace(), noise_ratio, noise_se});

    ExperimentResult r;
    r.tables.push_back(std::move(table));
    r.checks.push_back(make_check("stationary_variance", std::abs(state_ratio - 1.0) <= 0.05,
                                  "variance / k_B T = " + format_number(state_ratio)));
    r.checks.push_back(make_check("output_variance", std::abs(out_ratio - 1.0) <= 0.05,
                                  "output variance ratio " + format_number(out_ratio)));
    r.checks.push_back(make_check("johnson_nyquist", std::abs(noise_ratio - 1.0) <= 0.05,
                                  "sample variance / (2 k_B T k_s / dt) = " + format_number(noise_ratio)));
    r.summary = {{"state_ratio", state_ratio}, {"output_ratio", out_ratio}, {"noise_ratio", noise_ratio}};
    return r;
}

}  // namespace lossless::experiments::detail
