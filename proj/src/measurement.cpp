#include "lossless/measurement.hpp"

#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lossless {

MeasuredSystem::MeasuredSystem(Mat j_, Vec b_, Vec x0_) : j(std::move(j_)), b(std::move(b_)), x0(std::move(x0_)) {
    if (j.rows() != j.cols() || b.size() != j.rows() || x0.size() != j.rows()) {
        throw InvalidArgument("MeasuredSystem: J must be n x n, B and x0 length n");
    }
    if (skew_residual(j) > kSkewTol) {
        throw InvalidArgument("MeasuredSystem: J must be skew");
    }
    if (!(b.squaredNorm() > 0.0)) {
        throw InvalidArgument("MeasuredSystem: B must be nonzero");
    }
    require_finite(x0, "MeasuredSystem: x0");
}

MeasuredSystem MeasuredSystem::lc_fixture() {
    Mat j(3, 3);
    j << 0, -1, 0, 1, 0, -1, 0, 1, 0;
    return MeasuredSystem(j, Vec::Unit(3, 0), Vec::Unit(3, 0));
}

Vec MeasuredSystem::free_state(double t) const { return matrix_exponential(j * t) * x0; }

std::string to_string(DeviceVariant v) {
    switch (v) {
        case DeviceVariant::M1: return "M1";
        case DeviceVariant::M1hat: return "M1hat";
        case DeviceVariant::M2: return "M2";
        case DeviceVariant::M2hat: return "M2hat";
    }
    return "?";
}

DeviceVariant device_variant_from_string(const std::string& s) {
    if (s == "M1") return DeviceVariant::M1;
    if (s == "M1hat") return DeviceVariant::M1hat;
    if (s == "M2") return DeviceVariant::M2;
    if (s == "M2hat") return DeviceVariant::M2hat;
    throw InvalidArgument("unknown device variant '" + s + "' (expected M1, M1hat, M2, M2hat)");
}

void Device::validate() const {
    if (!(k_b > 0.0)) {
        throw InvalidArgument("Device: k_B must be positive");
    }
    if (variant != DeviceVariant::M2 && !(k_m > 0.0)) {
        throw InvalidArgument("Device: k_m must be positive for " + to_string(variant));
    }
    if (noisy() && !(t_m >= 0.0)) {
        throw InvalidArgument("Device: T_m must be >= 0 for " + to_string(variant));
    }
    if (variant == DeviceVariant::M2hat && !(e_m > 0.0)) {
        throw InvalidArgument("Device: E_m must be positive for M2hat");
    }
}

namespace {

/// One-step discrete model shared by the simulator and the filter:
/// x_{k+1} = F x_k + dt b w_k + g xi_k,  reading y_k = b^T x_k + r xi_k.
struct StepModel {
    Mat f;
    Vec g;
    double r = 0.0;
};

double supply_scale(const Device& d) { return std::sqrt(2.0 * d.e_m); }

/// Linear feedback gain of M2hat for a supply offset: k_m offset / sqrt(2 E_m).
double m2hat_feedback(const Device& d, double offset) { return d.k_m * offset / supply_scale(d); }

StepModel step_model(const MeasuredSystem& s, const Device& d, double dt, double linear_feedback) {
    StepModel m;
    const Mat bbt = s.b * s.b.transpose();
    switch (d.variant) {
        case DeviceVariant::M1:
        case DeviceVariant::M1hat:
            m.f = matrix_exponential((s.j - d.k_m * bbt) * dt);
            break;
        case DeviceVariant::M2:
            m.f = matrix_exponential(s.j * dt);
            break;
        case DeviceVariant::M2hat:
            m.f = matrix_exponential((s.j + linear_feedback * bbt) * dt);
            break;
    }
    m.g = Vec::Zero(s.states());
    if (d.noisy() && d.t_m > 0.0) {
        m.g = -std::sqrt(2.0 * d.k_m * d.k_b * d.t_m * dt) * s.b;
        m.r = std::sqrt(2.0 * d.k_b * d.t_m / (d.k_m * dt));
    }
    return m;
}

struct Prior {
    Vec mean;
    Mat cov;
};

Prior make_prior(const MeasuredSystem& s, PriorMode mode, double variance) {
    const Eigen::Index n = s.states();
    Prior p;
    if (mode == PriorMode::FullState) {
        p.mean = Vec::Zero(n);
        p.cov = variance * Mat::Identity(n, n);
    } else {
        const Vec bh = s.b.normalized();
        p.mean = s.x0 - bh * bh.dot(s.x0);
        p.cov = variance * bh * bh.transpose();
    }
    return p;
}

/// Gains of the correlated-noise predictor x_{k+1|k} = F x_{k|k-1} + dt b w_k + K_k nu_k,
/// followed by a final measurement update at the last sample.
struct GainSchedule {
    std::vector<Vec> predictor;  // K_0 .. K_{N-1}
    Vec final_gain;              // P_{N|N-1} b / S_N
    std::vector<double> variance;  // b^T P_{k|k} b
    double final_variance = 0.0;
    bool resymmetrized = false;
};

GainSchedule gain_schedule(const StepModel& m, const Vec& b, const Mat& p0, std::size_t steps) {
    GainSchedule gs;
    Mat p = p0;
    const Eigen::Index n = b.size();
    gs.predictor.reserve(steps);
    for (std::size_t k = 0; k <= steps; ++k) {
        const Vec pb = p * b;
        const double innov = b.dot(pb) + m.r * m.r;
        gs.variance.push_back(innov > 0.0 ? b.dot(pb) - b.dot(pb) * b.dot(pb) / innov : 0.0);
        if (k == steps) {
            gs.final_gain = innov > 0.0 ? Vec(pb / innov) : Vec(Vec::Zero(n));
            gs.final_variance = gs.variance.back();
            break;
        }
        const Vec gain = innov > 0.0 ? Vec((m.f * pb + m.g * m.r) / innov) : Vec(Vec::Zero(n));
        const Mat a = m.f - gain * b.transpose();
        const Vec c = m.g - gain * m.r;
        p = a * p * a.transpose() + c * c.transpose();
        const Mat asym = p - p.transpose();
        if (asym.cwiseAbs().maxCoeff() > 0.0) {
            gs.resymmetrized = gs.resymmetrized || asym.cwiseAbs().maxCoeff() > 1e-9 * p.cwiseAbs().maxCoeff();
            p = sym_part(p);
        }
        gs.predictor.push_back(gain);
    }
    return gs;
}

struct TrialResult {
    Vec x_final;
    double estimate = 0.0;
    double truth = 0.0;
};

}  // namespace

KalmanResult kalman_estimate(const MeasuredSystem& s, const Device& d, const Trajectory& y_m, FilterMode mode,
                             PriorMode prior, std::optional<double> supply_offset,
                             const std::vector<double>& feedback, double prior_variance) {
    d.validate();
    if (!d.noisy()) {
        throw InvalidArgument("kalman_estimate: only the noisy devices M1hat and M2hat are filtered");
    }
    if (y_m.dim() != 1 || y_m.size() < 2) {
        throw InvalidArgument("kalman_estimate: scalar measurement record with at least two samples required");
    }
    const std::size_t steps = y_m.size() - 1;
    const double dt = y_m.dt();
    double lin = 0.0;
    bool use_feedback = false;
    if (d.variant == DeviceVariant::M2hat && mode == FilterMode::Privileged) {
        if (!supply_offset || feedback.size() < steps) {
            throw InvalidArgument("kalman_estimate: privileged M2hat filter needs the supply offset and feedback");
        }
        lin = m2hat_feedback(d, *supply_offset);
        use_feedback = true;
    }
    const StepModel m = step_model(s, d, dt, lin);
    const Prior pr = make_prior(s, prior, prior_variance);
    const GainSchedule gs = gain_schedule(m, s.b, pr.cov, steps);
    KalmanResult out;
    out.resymmetrized = gs.resymmetrized;
    Vec xh = pr.mean;
    std::vector<Vec> est(y_m.size(), Vec(1));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double nu = y_m[k](0) - s.b.dot(xh);
        const Vec& gain = k == steps ? gs.final_gain : gs.predictor[k];
        out.gain_norm.push_back(gain.norm());
        if (k == steps) {
            est[k](0) = s.b.dot(xh + gain * nu);
            break;
        }
        est[k](0) = s.b.dot(xh);
        Vec next = m.f * xh + gain * nu;
        if (use_feedback) {
            next += dt * feedback[k] * s.b;
        }
        xh = std::move(next);
    }
    out.estimate = Trajectory(dt, std::move(est));
    out.variance = gs.variance;
    return out;
}

MeasurementOutcome simulate_device(const MeasuredSystem& s, const Device& d, double horizon,
                                   const MeasurementOptions& opts) {
    d.validate();
    if (!(horizon > 0.0) || opts.steps < 1) {
        throw InvalidArgument("simulate_device: need horizon > 0 and steps >= 1");
    }
    const Eigen::Index n = s.states();
    const std::size_t steps = opts.steps;
    const double dt = horizon / static_cast<double>(steps);
    // Free reference stepped with the simulator's propagator, so an inert device gives exactly zero.
    const Mat free_step = matrix_exponential(s.j * dt);
    Vec free = s.x0;
    for (std::size_t k = 0; k < steps; ++k) {
        free = free_step * free;
    }
    const double truth_free = s.b.dot(free);
    const bool noisy = d.noisy() && d.t_m > 0.0;
    const std::size_t trials = noisy ? std::max<std::size_t>(opts.trials, 2) : 1;
    const bool filtered = noisy && opts.filter != FilterMode::None;
    const Prior prior = make_prior(s, opts.prior, opts.prior_variance);
    const double a = d.variant == DeviceVariant::M2hat ? supply_scale(d) : 1.0;

    // Shared filter schedule when it does not depend on the trial.
    const bool per_trial_gain = d.variant == DeviceVariant::M2hat && opts.filter == FilterMode::Privileged;
    GainSchedule shared;
    StepModel shared_filter_model;
    if (filtered && !per_trial_gain) {
        shared_filter_model = step_model(s, d, dt, 0.0);
        shared = gain_schedule(shared_filter_model, s.b, prior.cov, steps);
    }

    MeasurementOutcome out;
    out.variant = d.variant;
    out.horizon = horizon;
    out.trials = trials;
    std::vector<TrialResult> results(trials);
    std::vector<Vec> record;

    parallel_trials(trials, opts.threads, [&](std::size_t trial) {
        CounterRng rng(derive_seed(opts.seed, trial));
        double offset = 0.0;
        if (d.variant == DeviceVariant::M2hat && d.t_m > 0.0) {
            offset = std::sqrt(d.k_b * d.t_m) * rng.normal();
        }
        const double lin = d.variant == DeviceVariant::M2hat ? m2hat_feedback(d, offset) : 0.0;
        const StepModel sim = step_model(s, d, dt, lin);
        GainSchedule own;
        StepModel own_model;
        if (filtered && per_trial_gain) {
            own_model = sim;
            own = gain_schedule(own_model, s.b, prior.cov, steps);
        }
        const GainSchedule& gs = per_trial_gain ? own : shared;
        const StepModel& fm = per_trial_gain ? own_model : shared_filter_model;
        const bool feed_filter = per_trial_gain;

        Vec x = s.x0;
        Vec xn(n);
        Vec xh = prior.mean;
        Vec xhn(n);
        const double xr0 = a + offset;
        double xr = xr0;
        double estimate = 0.0;
        for (std::size_t k = 0; k <= steps; ++k) {
            const double xi = noisy ? rng.normal() : 0.0;
            const double y = s.b.dot(x);
            const double reading = y + sim.r * xi;
            if (trial == 0) {
                record.push_back(Vec::Constant(1, reading));
            }
            const double w = d.variant == DeviceVariant::M2hat ? d.k_m / a * (xr - xr0) * y : 0.0;
            if (filtered) {
                const double nu = reading - s.b.dot(xh);
                if (k == steps) {
                    estimate = s.b.dot(xh) + s.b.dot(gs.final_gain) * nu;
                } else {
                    xhn.noalias() = fm.f * xh;
                    xhn += gs.predictor[k] * nu;
                    if (feed_filter) {
                        xhn += (dt * w) * s.b;
                    }
                    xh.swap(xhn);
                }
            } else if (k == steps) {
                estimate = reading;
            }
            if (k == steps) {
                break;
            }
            xn.noalias() = sim.f * x;
            if (d.variant == DeviceVariant::M2hat) {
                xn += (dt * w) * s.b;
                xr -= dt * d.k_m / a * y * y;
            }
            if (noisy) {
                xn += xi * sim.g;
            }
            x.swap(xn);
        }
        results[trial] = {x, estimate, s.b.dot(x)};
    });

    // Ordered reductions.
    out.b_mean = Vec::Zero(n);
    for (const auto& r : results) {
        out.b_mean += r.x_final - free;
    }
    out.b_mean /= static_cast<double>(trials);
    out.p = Mat::Zero(n, n);
    double e_sum = 0.0;
    for (const auto& r : results) {
        const Vec dev = r.x_final - free - out.b_mean;
        out.p.noalias() += dev * dev.transpose();
        e_sum += r.estimate - r.truth;
        const double bt = s.b.dot(r.x_final - free);
        const double rebuilt = r.estimate - (r.estimate - r.truth) - bt;
        out.max_correction_residual = std::max(out.max_correction_residual, std::abs(rebuilt - truth_free));
    }
    const double denom = trials > 1 ? static_cast<double>(trials - 1) : 1.0;
    out.p /= denom;
    out.b_mean_se = (out.p.diagonal() / static_cast<double>(trials)).cwiseSqrt();
    out.est_mean = e_sum / static_cast<double>(trials);
    double e_var = 0.0;
    for (const auto& r : results) {
        const double e = r.estimate - r.truth - out.est_mean;
        e_var += e * e;
    }
    out.est_var = e_var / denom;
    out.dy2 = s.b.dot(out.p * s.b);
    out.y_m = Trajectory(dt, std::move(record));

    switch (d.variant) {
        case DeviceVariant::M1:
        case DeviceVariant::M1hat:
            out.b_det = matrix_exponential((s.j - d.k_m * s.b * s.b.transpose()) * horizon) * s.x0 - s.free_state(horizon);
            break;
        case DeviceVariant::M2:
            out.b_det = Vec::Zero(n);
            break;
        case DeviceVariant::M2hat:
            out.b_det = m2hat_deterministic_back_action(s, d.k_m, d.e_m, horizon);
            break;
    }
    if (noisy) {
        out.m_star = riccati_solve(s, d, {horizon}, opts.prior).m_star.front();
        out.filter_var = filtered ? (per_trial_gain ? gain_schedule(step_model(s, d, dt, 0.0), s.b, prior.cov, steps)
                                                          .final_variance
                                                    : shared.final_variance)
                                  : 0.0;
    }
    return out;
}

RiccatiSolution riccati_solve(const Mat& drift, const Vec& b, double c, const Mat& prior,
                              const std::vector<double>& grid, double max_step) {
    const Eigen::Index n = drift.rows();
    if (drift.cols() != n || b.size() != n || prior.rows() != n || prior.cols() < 1) {
        throw InvalidArgument("riccati_solve: drift n x n, b length n, prior n x r required");
    }
    if (!(c > 0.0) || !(max_step > 0.0)) {
        throw InvalidArgument("riccati_solve: need c > 0 and max_step > 0");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw InvalidArgument("riccati_solve: grid must be positive and increasing");
        }
    }
    const Eigen::Index r = prior.cols();
    auto phi = [&](double t) -> Mat { return matrix_exponential(drift * t) * prior; };
    auto rate = [&](const Mat& ph) -> Mat {
        const Vec v = ph.transpose() * b;
        return c * v * v.transpose();
    };
    RiccatiSolution sol;
    Mat y = Mat::Zero(r, r);
    double t_prev = 0.0;
    Mat f_prev = rate(phi(0.0));
    for (double t : grid) {
        const double span = t - t_prev;
        const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(span / max_step)));
        const double h = span / static_cast<double>(pieces);
        for (std::size_t q = 0; q < pieces; ++q) {
            const double a = t_prev + static_cast<double>(q) * h;
            const Mat f_mid = rate(phi(a + 0.5 * h));
            const Mat f_end = rate(phi(a + h));
            y += h / 6.0 * (f_prev + 4.0 * f_mid + f_end);
            f_prev = f_end;
        }
        t_prev = t;
        const Mat ph = phi(t);
        Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(y));
        const double lmax = es.eigenvalues().maxCoeff();
        const double lmin = es.eigenvalues().minCoeff();
        if (!(lmax > 0.0) || lmin <= 1e-15 * lmax) {
            std::ostringstream os;
            os << "riccati_solve: information matrix singular at t=" << t;
            throw NumericalFailure(os.str(), t);
        }
        const Mat yinv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
        const Mat x = ph * yinv * ph.transpose();
        sol.times.push_back(t);
        sol.x.push_back(sym_part(x));
        sol.m_star.push_back(b.dot(x * b));
    }
    return sol;
}

RiccatiSolution riccati_solve(const MeasuredSystem& s, const Device& d, const std::vector<double>& grid,
                              PriorMode prior, double supply_offset) {
    d.validate();
    const Eigen::Index n = s.states();
    if (!d.noisy() || d.t_m == 0.0) {
        RiccatiSolution sol;
        sol.times = grid;
        sol.x.assign(grid.size(), Mat::Zero(n, n));
        sol.m_star.assign(grid.size(), 0.0);
        return sol;
    }
    const Mat bbt = s.b * s.b.transpose();
    Mat drift = s.j;
    if (d.variant == DeviceVariant::M2hat) {
        drift += (m2hat_feedback(d, supply_offset) + d.k_m) * bbt;
    }
    const double c = d.k_m / (2.0 * d.k_b * d.t_m);
    const Mat v = prior == PriorMode::FullState ? Mat(Mat::Identity(n, n)) : Mat(s.b.normalized());
    return riccati_solve(drift, s.b, c, v, grid);
}

TradeoffResult tradeoff_product(const MeasuredSystem& s, const Device& d, double horizon,
                                const MeasurementOptions& opts) {
    if (!d.noisy() || !(d.t_m > 0.0)) {
        throw InvalidArgument("tradeoff_product: requires a noisy device with T_m > 0");
    }
    const auto outcome = simulate_device(s, d, horizon, opts);
    TradeoffResult tr;
    tr.dy = std::sqrt(outcome.dy2);
    tr.dyhat = std::sqrt(outcome.m_star);
    tr.lhs = tr.dy * tr.dyhat;
    tr.lhs_filter = tr.dy * std::sqrt(outcome.est_var);
    tr.rhs = 2.0 * d.k_b * d.t_m / s.capacitance();
    tr.ratio = tr.lhs / tr.rhs;
    return tr;
}

Vec m2hat_deterministic_back_action(const MeasuredSystem& s, double k_m, double e_m, double horizon,
                                    std::size_t steps) {
    if (!(k_m > 0.0) || !(e_m > 0.0) || !(horizon > 0.0) || steps < 1) {
        throw InvalidArgument("m2hat_deterministic_back_action: positive k_m, E_m, horizon and steps required");
    }
    const Eigen::Index n = s.states();
    const double a = std::sqrt(2.0 * e_m);
    const VectorField field = [&](double, const Vec& z) {
        const Vec x = z.head(n);
        const double y = s.b.dot(x);
        Vec dz(n + 1);
        dz.head(n) = s.j * x + (k_m * y * (z(n) / a - 1.0)) * s.b;
        dz(n) = -k_m / a * y * y;
        return dz;
    };
    Vec z = Vec::Zero(n + 1);
    z.head(n) = s.x0;
    z(n) = a;
    const double dt = horizon / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        z = rk4_step(field, static_cast<double>(i) * dt, z, dt);
    }
    return z.head(n) - s.free_state(horizon);
}

namespace {

CoefficientFit fit_coefficient(const std::string& name, DeviceVariant v, const std::vector<double>& t,
                               const std::vector<double>& values, double exponent, double expected) {
    CoefficientFit f;
    f.quantity = name;
    f.variant = v;
    f.expected = expected;
    std::vector<double> mag(values.size());
    double log_sum = 0.0;
    double sign_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        mag[i] = std::abs(values[i]);
        log_sum += std::log(mag[i]) - exponent * std::log(t[i]);
        sign_sum += values[i];
    }
    f.exponent = loglog_slope(t, mag);
    f.coefficient = std::copysign(std::exp(log_sum / static_cast<double>(values.size())), sign_sum);
    f.ratio = f.coefficient / expected;
    return f;
}

}  // namespace

Table1Report table1_summary(const MeasuredSystem& s, const Device& base, const std::vector<double>& horizons,
                            const MeasurementOptions& opts) {
    if (horizons.size() < 2) {
        throw InvalidArgument("table1_summary: need at least two horizons");
    }
    Table1Report rep;
    const double bb = s.b.squaredNorm();
    const double y0 = s.y0();
    const double kT = base.k_b * base.t_m;
    const std::vector<DeviceVariant> variants{DeviceVariant::M1, DeviceVariant::M1hat, DeviceVariant::M2,
                                              DeviceVariant::M2hat};
    rep.m2_rows_zero = true;
    for (auto v : variants) {
        Device d = base;
        d.variant = v;
        std::vector<double> bcoef, ptrace, dy2, mstar;
        for (double t : horizons) {
            MeasurementOptions o = opts;
            o.filter = FilterMode::None;
            const auto out = simulate_device(s, d, t, o);
            Table1Row row{v, t, s.b.dot(out.b_det) / bb, out.p.trace(), out.dy2, out.m_star};
            rep.rows.push_back(row);
            bcoef.push_back(row.b_coef);
            ptrace.push_back(row.p_trace);
            dy2.push_back(row.dy2);
            mstar.push_back(row.m_star);
            if (v == DeviceVariant::M2) {
                rep.m2_rows_zero = rep.m2_rows_zero && out.b_det.cwiseAbs().maxCoeff() == 0.0 &&
                                   out.b_mean.cwiseAbs().maxCoeff() == 0.0 && out.p.cwiseAbs().maxCoeff() == 0.0 &&
                                   out.m_star == 0.0;
            }
        }
        if (v == DeviceVariant::M1 || v == DeviceVariant::M1hat) {
            rep.fits.push_back(fit_coefficient("b_d", v, horizons, bcoef, 1.0, -d.k_m * y0));
        }
        if (v == DeviceVariant::M1hat || v == DeviceVariant::M2hat) {
            if (kT > 0.0) {
                rep.fits.push_back(fit_coefficient("P", v, horizons, ptrace, 1.0, 2.0 * d.k_m * kT * bb));
                rep.fits.push_back(fit_coefficient("dy2", v, horizons, dy2, 1.0, 2.0 * d.k_m * kT * bb * bb));
                rep.fits.push_back(fit_coefficient("M*", v, horizons, mstar, -1.0, 2.0 * kT / d.k_m));
            }
        }
        if (v == DeviceVariant::M2hat) {
            rep.m2hat_text_coef = d.k_m * d.k_m * y0 * y0 * y0 / (4.0 * d.e_m);
            rep.m2hat_table_coef = d.k_m * y0 * y0 * y0 / (4.0 * d.e_m);
            auto fit = fit_coefficient("b_d", v, horizons, bcoef, 2.0, -rep.m2hat_text_coef);
            rep.m2hat_fitted_coef = -fit.coefficient;
            rep.fits.push_back(fit);
            const double text_err = std::abs(rep.m2hat_fitted_coef / rep.m2hat_text_coef - 1.0);
            const double table_err = std::abs(rep.m2hat_fitted_coef / rep.m2hat_table_coef - 1.0);
            if (text_err <= 0.1 && text_err < table_err) {
                rep.m2hat_match = "text";
            } else if (table_err <= 0.1) {
                rep.m2hat_match = "table";
            } else {
                rep.m2hat_match = "neither";
            }
        }
    }
    return rep;
}

}  // namespace lossless
