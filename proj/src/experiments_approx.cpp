#include "experiments_internal.hpp"

#include "lossless/approx_linear.hpp"
#include "lossless/approx_nonlinear.hpp"
#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"
#include "lossless/statespace.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace lossless::experiments::detail {

namespace {

constexpr double kPi = std::numbers::pi;

/// Largest deviation of a block's impulse response from its target on `points`
/// samples of [0, horizon], propagated with one exact step matrix.
double block_response_error(const HarmonicBlock& block, double horizon, std::size_t points) {
    const LosslessLinear sys = block.system();
    const double dt = horizon / static_cast<double>(points - 1);
    const Mat step = matrix_exponential(sys.J() * dt);
    const Mat bt = sys.B().transpose();
    Mat v = sys.B();
    double err = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        if (i > 0) v = step * v;
        err = std::max(err, (bt * v - block.target_at(static_cast<double>(i) * dt)).cwiseAbs().maxCoeff());
    }
    return err;
}

double complex_spectral_norm(const CMat& m) {
    if (m.size() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

struct KernelSpec {
    KernelFn g;
    TailFn tail;  // empty when fitted from samples
    std::string label;
};

KernelSpec kernel_from(const Params& p, bool analytic_tail) {
    const json* k = p.find("kernel");
    if (!k || k->at("type") == "exponential") {
        const double gain = k ? k->value("gain", 1.0) : 1.0;
        const double rate = k ? k->value("rate", 1.0) : 1.0;
        KernelSpec s;
        s.g = [gain, rate](double t) { return Mat::Constant(1, 1, gain * std::exp(-rate * t)); };
        if (analytic_tail) s.tail = [gain, rate](double tau) { return std::abs(gain) / rate * std::exp(-rate * tau); };
        s.label = "exponential";
        return s;
    }
    const Mat a = parse_matrix(k->at("a"), "params.kernel.a");
    const Mat b = parse_matrix(k->at("b"), "params.kernel.b");
    const Mat c = parse_matrix(k->at("c"), "params.kernel.c");
    const LinearStateSpace sys(a, b, c, Mat::Zero(c.rows(), b.cols()));
    return KernelSpec{state_space_kernel(sys), {}, "state_space"};
}

}  // namespace

ExperimentResult run_approx_memoryless(const Params& p, const RunContext&) {
    const Mat k = p.matrix("k", Mat::Identity(1, 1));
    const double tau = p.number("tau", 1.0);
    const auto orders = p.list("orders", {4, 8, 16, 32, 64, 128, 256});
    const double step_scale = p.number("step_scale", 0.05);
    if (k.rows() != k.cols()) throw InvalidArgument("params.k: must be square");
    const Eigen::Index ports = k.cols();

    const InputFn u = [ports, tau](double t) {
        const double s = std::sin(kPi * t / tau);
        return Vec::Constant(ports, s * s);
    };

    CsvTable table{"approx_memoryless",
                   {"N", "measured_error", "theorem1_bound", "t_at_max", "min_margin", "states", "steps"},
                   {}};
    std::vector<double> ns, errors;
    bool bound_holds = true;
    double worst_margin = std::numeric_limits<double>::infinity();

    for (double order_d : orders) {
        const int order = static_cast<int>(order_d);
        if (order < 2) throw InvalidArgument("params.orders: every order must be >= 2");
        const HarmonicApprox approx = memoryless_lossless_approx(k, tau, order);
        const double omega_max = (order - 1) * approx.omega0;
        const auto steps = static_cast<std::size_t>(std::max(1000.0, std::ceil(tau * omega_max / step_scale)));
        const double dt = tau / static_cast<double>(steps);

        SimulationOptions opts;
        opts.record_state = false;
        const auto sim = simulate_linear(approx.realization, u, Vec::Zero(approx.realization.states()), dt, tau, opts);
        const Trajectory u_grid = Trajectory::sample(u, dt, tau);
        const Trajectory bound = memoryless_error_bound(approx.k.k_s, tau, order, u_grid);

        double max_err = 0.0, t_max = 0.0, bound_at_max = 0.0, margin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sim.y.size(); ++i) {
            const double err = (sim.y[i] - k * u_grid[i]).norm();
            margin = std::min(margin, bound[i](0) - err);
            if (err > max_err) {
                max_err = err;
                t_max = sim.y.time(i);
                bound_at_max = bound[i](0);
            }
        }
        bound_holds = bound_holds && margin >= 0.0;
        worst_margin = std::min(worst_margin, margin);
        ns.push_back(order);
        errors.push_back(max_err);
        table.rows.push_back({static_cast<double>(order), max_err, bound_at_max, t_max, margin,
                              static_cast<double>(approx.realization.states()), static_cast<double>(steps)});
    }

    ExperimentResult r;
    r.tables.push_back(std::move(table));
    const double slope = ns.size() >= 2 ? loglog_slope(ns, errors) : 0.0;
    r.checks.push_back(make_check("bound_holds_pointwise", bound_holds,
                                  "smallest bound - error over all t and N: " + format_number(worst_margin)));
    r.checks.push_back(make_check("error_slope", ns.size() >= 2 && slope <= -0.9,
                                  "log-log slope " + format_number(slope) + " (need <= -0.9)"));
    r.summary = {{"slope", slope}, {"worst_margin", worst_margin}};
    return r;
}

ExperimentResult run_approx_dissipative(const Params& p, const RunContext& ctx) {
    const double eps = p.number("eps", 0.1);
    const double tau0 = p.number("tau0", 5.0);
    const std::size_t grid = p.count("block_grid", 1000);
    const KernelSpec kernel = kernel_from(p, p.flag("analytic_tail", true));

    DissipativeApproxOptions opts;
    opts.tail = kernel.tail;
    opts.max_states = p.count("max_states", opts.max_states);
    opts.window_samples = p.count("window_samples", opts.window_samples);
    opts.quadrature_intervals = p.count("quadrature_intervals", opts.quadrature_intervals);
    opts.search_empirical_order = p.flag("search_order", true);
    if (grid < 2) throw InvalidArgument("params.block_grid: must be >= 2");

    const FourierLosslessApprox approx = dissipative_lossless_approx(kernel.g, eps, tau0, opts);

    CsvTable coeffs{"approx_dissipative_coefficients",
                    {"k", "omega", "cos_norm", "sin_norm", "coefficient_norm", "decay_bound", "block_error"},
                    {}};
    bool decay_ok = true;
    double worst_block = 0.0;
    const double omega0 = kPi / approx.tau;
    for (std::size_t i = 0; i < approx.coeffs.cos.size(); ++i) {
        const Mat& a = approx.coeffs.cos[i];
        const Mat& b = approx.coeffs.sin[i];
        const CMat combined = a.cast<std::complex<double>>() - std::complex<double>(0.0, 1.0) * b.cast<std::complex<double>>();
        const double norm = complex_spectral_norm(combined);
        const double bound = approx.c / (2.0 + static_cast<double>(i));
        decay_ok = decay_ok && norm <= bound;
        const double block_err =
            i < approx.blocks.size() ? block_response_error(approx.blocks[i], approx.tau, grid) : 0.0;
        worst_block = std::max(worst_block, block_err);
        coeffs.rows.push_back({static_cast<double>(i), omega0 * static_cast<double>(i), sigma_max(a), sigma_max(b),
                               norm, bound, block_err});
    }

    const auto lossless = check_lossless(approx.realization, static_cast<int>(p.count("lossless_trials", 2)),
                                         ctx.seed, p.number("lossless_horizon", 0.1));

    CsvTable summary{"approx_dissipative_summary", {"quantity", "value"}, {}};
    const std::vector<std::pair<std::string, double>> values{
        {"eps", eps},
        {"tau0", tau0},
        {"tau", approx.tau},
        {"harmonics", static_cast<double>(approx.order)},
        {"states", static_cast<double>(approx.realization.states())},
        {"xi", approx.xi},
        {"c1", approx.c1},
        {"c2", approx.c2},
        {"c3", approx.c3},
        {"c", approx.c},
        {"tail_delta", approx.delta},
        {"skew_residual", lossless.skew_residual},
        {"energy_balance_error", lossless.max_energy_balance_error},
        {"min_residue_eigenvalue", approx.min_residue_eigenvalue},
        {"l2_error", approx.l2_error},
        {"empirical_harmonics", static_cast<double>(approx.empirical_order)},
        {"max_block_error", worst_block},
    };
    for (const auto& [name, value] : values) summary.rows.push_back({name, value});

    ExperimentResult r;
    r.tables.push_back(std::move(summary));
    r.tables.push_back(std::move(coeffs));
    r.checks.push_back(make_check("skew_residual_zero", lossless.skew_residual == 0.0,
                                  "skew residual " + format_number(lossless.skew_residual)));
    r.checks.push_back(make_check("energy_balance", lossless.lossless,
                                  "relative balance error " + format_number(lossless.max_energy_balance_error)));
    r.checks.push_back(make_check("residues_psd", approx.min_residue_eigenvalue >= -1e-10,
                                  "min residue eigenvalue " + format_number(approx.min_residue_eigenvalue)));
    r.checks.push_back(make_check("l2_error", approx.l2_error <= eps,
                                  "L2 error " + format_number(approx.l2_error) + " on [0, tau0]"));
    r.checks.push_back(make_check("coefficient_decay", decay_ok, "|A_k - j B_k| <= C/(2+k) for every k"));
    r.checks.push_back(make_check("block_responses", worst_block <= 1e-8,
                                  "max block response error " + format_number(worst_block)));
    r.summary = {{"kernel", kernel.label}, {"tau", approx.tau}, {"harmonics", approx.order},
                 {"states", approx.realization.states()}, {"l2_error", approx.l2_error},
                 {"empirical_harmonics", approx.empirical_order}};
    return r;
}

ExperimentResult run_approx_nonlinear(const Params& p, const RunContext& ctx) {
    const Mat k = p.matrix("k", Mat::Identity(1, 1));
    const double tau = p.number("tau", 1.0);
    const double e0 = p.number("e0", 10.0);
    const std::size_t trials = p.count("trials", 100);
    const auto energies = p.list("energies", {1e2, 1e3, 1e4, 1e5, 1e6});
    const double dt = p.number("dt", 1e-3);
    if (k.rows() != k.cols()) throw InvalidArgument("params.k: must be square");
    const Eigen::Index ports = k.cols();
    (void)step_count(dt, tau);

    // L2 inequality on random smooth inputs: three sinusoids per port.
    CsvTable ineq{"approx_nonlinear_theorem4", {"trial", "ubar", "epsilon", "max_ratio"}, {}};
    std::vector<double> ratios(trials, 0.0), ubars(trials, 0.0), epsilons(trials, 0.0);
    parallel_trials(trials, ctx.threads, [&](std::size_t trial) {
        CounterRng rng(derive_seed(ctx.seed, trial));
        Mat amp(ports, 3), freq(ports, 3), phase(ports, 3);
        for (Eigen::Index i = 0; i < ports; ++i) {
            for (int m = 0; m < 3; ++m) {
                amp(i, m) = 2.0 * rng.uniform() - 1.0;
                freq(i, m) = 2.0 * kPi * (0.25 + 4.75 * rng.uniform());
                phase(i, m) = 2.0 * kPi * rng.uniform();
            }
        }
        const InputFn u = [&](double t) {
            Vec v = Vec::Zero(ports);
            for (Eigen::Index i = 0; i < ports; ++i)
                for (int m = 0; m < 3; ++m) v(i) += amp(i, m) * std::sin(freq(i, m) * t + phase(i, m));
            return v;
        };
        const Trajectory ut = Trajectory::sample(u, dt, tau);
        double ubar = 0.0;
        std::vector<double> u2(ut.size()), e2(ut.size());
        const auto res = simulate_energy_supply(k, e0, ut);
        for (std::size_t i = 0; i < ut.size(); ++i) {
            ubar = std::max(ubar, ut[i].norm());
            u2[i] = ut[i].squaredNorm();
            e2[i] = (res.y[i] - k * ut[i]).squaredNorm();
        }
        const double eps = theorem4_bound(k, ubar, tau, e0);
        const auto cu = cumulative_trapezoid(u2, dt);
        const auto ce = cumulative_trapezoid(e2, dt);
        double worst = 0.0;
        for (std::size_t i = 1; i < ut.size(); ++i)
            if (cu[i] > 0.0) worst = std::max(worst, std::sqrt(ce[i]) / (eps * std::sqrt(cu[i])));
        ratios[trial] = worst;
        ubars[trial] = ubar;
        epsilons[trial] = eps;
    });
    double worst_ratio = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        worst_ratio = std::max(worst_ratio, ratios[t]);
        ineq.rows.push_back({static_cast<double>(t), ubars[t], epsilons[t], ratios[t]});
    }

    // Convergence in E0: closed-form memoryless element and a generic nonlinear wrapper.
    const InputFn u = [ports](double t) { return Vec::Constant(ports, std::sin(2.0 * kPi * t)); };
    const Trajectory ut = Trajectory::sample(u, dt, tau);
    const auto memoryless_err = [&](double e) {
        const auto res = simulate_energy_supply(k, e, ut);
        double err = 0.0;
        for (std::size_t i = 0; i < ut.size(); ++i) err = std::max(err, (res.y[i] - k * ut[i]).norm());
        return err;
    };
    const StateMap f = [](const Vec& x, const Vec& v) {
        return Vec((-x.array() - x.array().cube() + v(0)).matrix());
    };
    const StateMap g = [](const Vec& x, const Vec&) { return x; };
    const InputFn u1 = [](double t) { return Vec::Constant(1, std::sin(2.0 * kPi * t)); };
    const Vec x0 = Vec::Constant(1, 0.5);
    const auto wrapper_err = [&](double e) { return wrapper_state_error(f, g, x0, e, u1, dt, tau); };

    const ConvergenceReport closed = convergence_order(energies, memoryless_err);
    const ConvergenceReport generic = convergence_order(energies, wrapper_err);

    CsvTable conv{"approx_nonlinear_convergence", {"e0", "memoryless_error", "wrapper_error"}, {}};
    for (std::size_t i = 0; i < energies.size(); ++i)
        conv.rows.push_back({energies[i], closed.errors[i], generic.errors[i]});

    ExperimentResult r;
    r.tables.push_back(std::move(ineq));
    r.tables.push_back(std::move(conv));
    r.checks.push_back(make_check("l2_inequality", worst_ratio <= 1.0,
                                  "largest ||y_E - k u|| / (eps ||u||) over trials and t: " +
                                      format_number(worst_ratio)));
    r.checks.push_back(make_check("memoryless_order", std::abs(closed.slope + 1.0) <= 0.1,
                                  "slope " + format_number(closed.slope) + " (need -1 +/- 0.1)"));
    r.checks.push_back(make_check("wrapper_order", generic.slope <= -0.4,
                                  "slope " + format_number(generic.slope) + " (need <= -0.4), " +
                                      std::to_string(generic.excluded) + " points at the floor"));
    r.summary = {{"max_ratio", worst_ratio}, {"memoryless_slope", closed.slope}, {"wrapper_slope", generic.slope}};
    return r;
}

}  // namespace lossless::experiments::detail
