#include "lossless/statespace.hpp"

#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

namespace lossless {

namespace {

using cd = std::complex<double>;

double induced_norm1(const SpMat& m) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        double s = 0.0;
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            s += std::abs(it.value());
        }
        best = std::max(best, s);
    }
    return best;
}

double sparse_skew_residual(const SpMat& m) {
    const SpMat s = m + SpMat(m.transpose());
    double acc = 0.0;
    for (Eigen::Index k = 0; k < s.outerSize(); ++k) {
        for (SpMat::InnerIterator it(s, k); it; ++it) {
            acc += std::abs(it.value());
        }
    }
    return acc;
}

/// exp(t M) V by Taylor series with scaling, for large sparse M.
Mat expmv(const SpMat& m, const Mat& v, double t) {
    const double norm = induced_norm1(m) * std::abs(t);
    const int segments = std::max(1, static_cast<int>(std::ceil(norm)));
    const double h = t / segments;
    Mat out = v;
    for (int s = 0; s < segments; ++s) {
        Mat term = out;
        Mat acc = out;
        for (int k = 1; k <= 30; ++k) {
            term = (h / k) * (m * term);
            acc += term;
            if (term.cwiseAbs().maxCoeff() <= 1e-18 * acc.cwiseAbs().maxCoeff()) {
                break;
            }
        }
        out = std::move(acc);
    }
    return out;
}

constexpr Eigen::Index kDenseLimit = 256;

template <class ApplyA, class ApplyC>
SimulationResult run_rk4(const ApplyA& apply_a, const Mat& b, const ApplyC& apply_c, const Mat& d,
                         const InputFn& u, const Vec& x0, double dt, std::size_t steps,
                         const SimulationOptions& opts) {
    if (opts.stride == 0) {
        throw InvalidArgument("simulate_linear: stride must be positive");
    }
    const Vec u0 = u(0.0);
    if (u0.size() != b.cols()) {
        std::ostringstream os;
        os << "simulate_linear: input dimension " << u0.size() << " does not match " << b.cols();
        throw InvalidArgument(os.str());
    }
    if (x0.size() != b.rows()) {
        throw InvalidArgument("simulate_linear: initial state has wrong dimension");
    }
    require_finite(x0, "simulate_linear: x0");

    std::vector<Vec> xs;
    std::vector<Vec> ys;
    std::vector<double> energy;
    auto record = [&](const Vec& x, const Vec& ut) {
        if (opts.record_state) {
            xs.push_back(x);
        }
        ys.push_back(apply_c(x) + d * ut);
        energy.push_back(0.5 * x.squaredNorm());
    };

    Vec x = x0;
    record(x, u0);
    Vec u_start = u0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const Vec u_mid = u(t + 0.5 * dt);
        const Vec u_end = u(t + dt);
        const Vec k1 = apply_a(x) + b * u_start;
        const Vec k2 = apply_a(Vec(x + 0.5 * dt * k1)) + b * u_mid;
        const Vec k3 = apply_a(Vec(x + 0.5 * dt * k2)) + b * u_mid;
        const Vec k4 = apply_a(Vec(x + dt * k3)) + b * u_end;
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) {
            std::ostringstream os;
            os << "simulate_linear: state blew up at t=" << t + dt;
            throw NumericalFailure(os.str(), t + dt);
        }
        if ((i + 1) % opts.stride == 0) {
            record(x, u_end);
        }
        u_start = u_end;
    }
    SimulationResult res;
    const double rec_dt = dt * static_cast<double>(opts.stride);
    if (opts.record_state) {
        res.x = Trajectory(rec_dt, std::move(xs));
    }
    res.y = Trajectory(rec_dt, std::move(ys));
    res.energy = std::move(energy);
    res.final_state = x;
    return res;
}

InputFn interpolate(const Trajectory& u) {
    return [&u](double t) { return u.at(t); };
}

std::size_t trajectory_steps(const Trajectory& u, double horizon) {
    const std::size_t steps = step_count(u.dt(), horizon);
    if (steps + 1 > u.size()) {
        throw InvalidArgument("simulate_linear: input trajectory shorter than horizon");
    }
    return steps;
}

bool is_sparse_enough(const Mat& a) {
    if (a.rows() < 64) {
        return false;
    }
    const auto nnz = (a.array() != 0.0).count();
    return static_cast<double>(nnz) < 0.1 * static_cast<double>(a.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Model types

LinearStateSpace::LinearStateSpace(Mat a, Mat b, Mat c, Mat d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (a_.rows() != a_.cols()) {
        throw InvalidArgument("LinearStateSpace: A must be square");
    }
    if (b_.rows() != a_.rows() || c_.cols() != a_.rows()) {
        throw InvalidArgument("LinearStateSpace: B rows and C columns must match A");
    }
    if (d_.rows() != c_.rows() || d_.cols() != b_.cols()) {
        throw InvalidArgument("LinearStateSpace: D must be outputs x inputs");
    }
    require_finite(a_, "LinearStateSpace: A");
    require_finite(b_, "LinearStateSpace: B");
    require_finite(c_, "LinearStateSpace: C");
    require_finite(d_, "LinearStateSpace: D");
}

LosslessLinear::LosslessLinear(const Mat& j, Mat b, Mat d, double skew_tol)
    : LosslessLinear(SpMat(j.sparseView()), std::move(b), std::move(d), skew_tol) {}

LosslessLinear::LosslessLinear(SpMat j, Mat b, Mat d, double skew_tol)
    : j_(std::move(j)), b_(std::move(b)), d_(std::move(d)) {
    j_.makeCompressed();
    check_shapes();
    const double rj = sparse_skew_residual(j_);
    const double rd = skew_residual(d_);
    if (rj > skew_tol || rd > skew_tol) {
        std::ostringstream os;
        os << "LosslessLinear: J and D must be skew (residuals " << rj << ", " << rd << ")";
        throw InvalidArgument(os.str());
    }
}

LosslessLinear LosslessLinear::candidate(const Mat& j, Mat b, Mat d) {
    LosslessLinear s;
    s.j_ = j.sparseView();
    s.j_.makeCompressed();
    s.b_ = std::move(b);
    s.d_ = std::move(d);
    s.check_shapes();
    return s;
}

void LosslessLinear::check_shapes() const {
    if (j_.rows() != j_.cols()) {
        throw InvalidArgument("LosslessLinear: J must be square");
    }
    if (b_.rows() != j_.rows()) {
        throw InvalidArgument("LosslessLinear: B must have one row per state");
    }
    if (d_.rows() != b_.cols() || d_.cols() != b_.cols()) {
        throw InvalidArgument("LosslessLinear: D must be p x p");
    }
    require_finite(b_, "LosslessLinear: B");
    require_finite(d_, "LosslessLinear: D");
    for (Eigen::Index k = 0; k < j_.outerSize(); ++k) {
        for (SpMat::InnerIterator it(j_, k); it; ++it) {
            if (!std::isfinite(it.value())) {
                throw InvalidArgument("LosslessLinear: J: non-finite entry");
            }
        }
    }
}

LinearStateSpace LosslessLinear::as_state_space() const {
    return LinearStateSpace(J(), b_, b_.transpose(), d_);
}

LosslessLinear LosslessLinear::with_state_signature(std::vector<int> signature) const {
    if (static_cast<Eigen::Index>(signature.size()) != states()) {
        throw InvalidArgument("with_state_signature: length must equal the state dimension");
    }
    for (int s : signature) {
        if (s != 1 && s != -1) {
            throw InvalidArgument("with_state_signature: entries must be +1 or -1");
        }
    }
    LosslessLinear copy = *this;
    copy.state_signature_ = std::move(signature);
    return copy;
}

// ---------------------------------------------------------------------------
// Simulation

SimulationResult simulate_linear(const LinearStateSpace& sys, const InputFn& u, const Vec& x0, double dt,
                                 double horizon, const SimulationOptions& opts) {
    const std::size_t steps = step_count(dt, horizon);
    auto apply_c = [&](const Vec& x) -> Vec { return sys.C() * x; };
    if (is_sparse_enough(sys.A())) {
        const SpMat a = sys.A().sparseView();
        return run_rk4([&](const Vec& x) -> Vec { return a * x; }, sys.B(), apply_c, sys.D(), u, x0, dt,
                       steps, opts);
    }
    return run_rk4([&](const Vec& x) -> Vec { return sys.A() * x; }, sys.B(), apply_c, sys.D(), u, x0, dt,
                   steps, opts);
}

SimulationResult simulate_linear(const LinearStateSpace& sys, const Trajectory& u, const Vec& x0,
                                 double horizon, const SimulationOptions& opts) {
    trajectory_steps(u, horizon);
    return simulate_linear(sys, interpolate(u), x0, u.dt(), horizon, opts);
}

SimulationResult simulate_linear(const LosslessLinear& sys, const InputFn& u, const Vec& x0, double dt,
                                 double horizon, const SimulationOptions& opts) {
    const std::size_t steps = step_count(dt, horizon);
    const Mat bt = sys.B().transpose();
    return run_rk4([&](const Vec& x) -> Vec { return sys.J_sparse() * x; }, sys.B(),
                   [&](const Vec& x) -> Vec { return bt * x; }, sys.D(), u, x0, dt, steps, opts);
}

SimulationResult simulate_linear(const LosslessLinear& sys, const Trajectory& u, const Vec& x0,
                                 double horizon, const SimulationOptions& opts) {
    trajectory_steps(u, horizon);
    return simulate_linear(sys, interpolate(u), x0, u.dt(), horizon, opts);
}

// ---------------------------------------------------------------------------
// Impulse responses

Mat impulse_response_at(const LinearStateSpace& sys, double t) {
    if (t < 0.0) {
        throw InvalidArgument("impulse_response_at: t must be >= 0");
    }
    return sys.C() * matrix_exponential(sys.A() * t) * sys.B();
}

Mat impulse_response_at(const LosslessLinear& sys, double t) {
    if (t < 0.0) {
        throw InvalidArgument("impulse_response_at: t must be >= 0");
    }
    if (sys.states() <= kDenseLimit) {
        return sys.B().transpose() * matrix_exponential(sys.J() * t) * sys.B();
    }
    return sys.B().transpose() * expmv(sys.J_sparse(), sys.B(), t);
}

MatrixTrajectory impulse_response(const LinearStateSpace& sys, double dt, std::size_t samples) {
    std::vector<Mat> g;
    g.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        g.push_back(impulse_response_at(sys, static_cast<double>(i) * dt));
    }
    return MatrixTrajectory(dt, std::move(g));
}

MatrixTrajectory impulse_response(const LosslessLinear& sys, double dt, std::size_t samples) {
    std::vector<Mat> g;
    g.reserve(samples);
    if (sys.states() <= kDenseLimit) {
        for (std::size_t i = 0; i < samples; ++i) {
            g.push_back(impulse_response_at(sys, static_cast<double>(i) * dt));
        }
    } else {
        Mat v = sys.B();
        const Mat bt = sys.B().transpose();
        for (std::size_t i = 0; i < samples; ++i) {
            if (i > 0) {
                v = expmv(sys.J_sparse(), v, dt);
            }
            g.push_back(bt * v);
        }
    }
    return MatrixTrajectory(dt, std::move(g));
}

// ---------------------------------------------------------------------------
// Energy accounting

double EnergyLedger::balance_error() const {
    if (times.size() < 2) {
        return 0.0;
    }
    const double dt = times[1] - times[0];
    return std::abs(total_energy.back() - total_energy.front() - simpson(work_rate, dt));
}

EnergyLedger energy_ledger(const Trajectory& x, const Trajectory& u, const Trajectory& y) {
    if (x.size() != u.size() || x.size() != y.size()) {
        throw InvalidArgument("energy_ledger: trajectories must have the same number of samples");
    }
    if (std::abs(x.dt() - u.dt()) > 1e-12 * x.dt() || std::abs(x.dt() - y.dt()) > 1e-12 * x.dt()) {
        throw InvalidArgument("energy_ledger: trajectories must share the time grid");
    }
    if (u.dim() != y.dim()) {
        throw InvalidArgument("energy_ledger: input and output dimensions differ");
    }
    EnergyLedger ledger;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ledger.times.push_back(x.time(i));
        ledger.total_energy.push_back(0.5 * x[i].squaredNorm());
        ledger.work_rate.push_back(y[i].dot(u[i]));
    }
    return ledger;
}

LosslessVerdict check_lossless(const LosslessLinear& sys, int trials, std::uint64_t seed, double horizon) {
    LosslessVerdict v;
    v.skew_residual = std::max(sparse_skew_residual(sys.J_sparse()), skew_residual(sys.D()));
    const double rate = std::max(1.0, induced_norm1(sys.J_sparse()));
    const auto steps = static_cast<std::size_t>(std::ceil(horizon * std::max(1000.0, 50.0 * rate)));
    const double dt = horizon / static_cast<double>(steps);
    const Eigen::Index p = sys.ports();
    for (int trial = 0; trial < trials; ++trial) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(trial)));
        constexpr int kTerms = 3;
        Mat amp(p, kTerms), freq(p, kTerms), phase(p, kTerms);
        for (Eigen::Index j = 0; j < p; ++j) {
            for (int m = 0; m < kTerms; ++m) {
                amp(j, m) = 2.0 * rng.uniform() - 1.0;
                freq(j, m) = 0.5 + 9.5 * rng.uniform();
                phase(j, m) = 2.0 * std::numbers::pi * rng.uniform();
            }
        }
        const InputFn u = [&](double t) {
            Vec out = Vec::Zero(p);
            for (Eigen::Index j = 0; j < p; ++j) {
                for (int m = 0; m < kTerms; ++m) {
                    out(j) += amp(j, m) * std::sin(freq(j, m) * t + phase(j, m));
                }
            }
            return out;
        };
        SimulationOptions opts;
        opts.record_state = false;
        const auto res = simulate_linear(sys, u, Vec::Zero(sys.states()), dt, horizon, opts);
        std::vector<double> work(res.y.size());
        std::vector<double> input_power(res.y.size());
        for (std::size_t i = 0; i < res.y.size(); ++i) {
            const Vec ui = u(res.y.time(i));
            work[i] = res.y[i].dot(ui);
            input_power[i] = ui.squaredNorm();
        }
        const double err = std::abs(res.energy.back() - res.energy.front() - simpson(work, dt));
        const double input_energy = std::max(simpson(input_power, dt), std::numeric_limits<double>::min());
        v.max_energy_balance_error = std::max(v.max_energy_balance_error, err / input_energy);
    }
    v.lossless = v.skew_residual <= kSkewTol && v.max_energy_balance_error <= 1e-6;
    return v;
}

// ---------------------------------------------------------------------------
// Positive-real test

std::vector<double> log_frequency_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw InvalidArgument("log_frequency_grid: need 0 < lo < hi and count >= 2");
    }
    std::vector<double> w(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        w[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return w;
}

namespace {

template <class TransferAt>
DissipativityVerdict pr_scan(const std::vector<double>& omegas, double psd_tol, const TransferAt& transfer_at,
                             double extra_slack) {
    DissipativityVerdict v;
    v.min_eigenvalue = std::numeric_limits<double>::infinity();
    v.scale = 0.0;
    for (double w : omegas) {
        CMat h;
        if (!transfer_at(w, h) || !h.allFinite()) {
            continue;
        }
        const CMat herm = h + h.adjoint();
        Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().size() ? es.eigenvalues()(0) : 0.0;
        v.omegas.push_back(w);
        v.min_eigenvalues.push_back(lmin);
        v.scale = std::max(v.scale, h.cwiseAbs().maxCoeff());
        if (lmin < v.min_eigenvalue) {
            v.min_eigenvalue = lmin;
            v.omega_at_min = w;
        }
    }
    if (v.omegas.empty()) {
        v.min_eigenvalue = 0.0;
        v.warning = "no frequency grid point could be evaluated";
    }
    v.dissipative = v.min_eigenvalue >= -(psd_tol * std::max(1.0, v.scale) + extra_slack);
    return v;
}

}  // namespace

DissipativityVerdict check_dissipative(const LinearStateSpace& sys, const std::vector<double>& omegas,
                                       double psd_tol) {
    const Eigen::Index n = sys.states();
    const CMat a = sys.A().cast<cd>();
    const CMat b = sys.B().cast<cd>();
    const CMat c = sys.C().cast<cd>();
    const CMat d = sys.D().cast<cd>();
    return pr_scan(
        omegas, psd_tol,
        [&](double w, CMat& h) {
            if (n == 0) {
                h = d;
                return true;
            }
            const CMat m = cd(0.0, w) * CMat::Identity(n, n) - a;
            Eigen::PartialPivLU<CMat> lu(m);
            if (std::abs(lu.determinant()) < 1e-300) {
                return false;
            }
            h = c * lu.solve(b) + d;
            return true;
        },
        0.0);
}

DissipativityVerdict check_dissipative(const LosslessLinear& sys, const std::vector<double>& omegas,
                                       double psd_tol) {
    if (sys.states() <= kDenseLimit) {
        return check_dissipative(sys.as_state_space(), omegas, psd_tol);
    }
    using SpC = Eigen::SparseMatrix<cd>;
    const SpC j = sys.J_sparse().cast<cd>();
    SpC ident(sys.states(), sys.states());
    ident.setIdentity();
    const CMat b = sys.B().cast<cd>();
    const CMat d = sys.D().cast<cd>();
    return pr_scan(
        omegas, psd_tol,
        [&](double w, CMat& h) {
            SpC m = cd(0.0, w) * ident - j;
            m.makeCompressed();
            Eigen::SparseLU<SpC> lu;
            lu.compute(m);
            if (lu.info() != Eigen::Success) {
                return false;
            }
            h = b.adjoint() * lu.solve(b) + d;
            return true;
        },
        0.0);
}

TailEstimate estimate_tail(const MatrixTrajectory& g) {
    TailEstimate tail;
    if (g.size() < 10) {
        return tail;
    }
    const std::size_t first = g.size() - std::max<std::size_t>(5, g.size() / 5);
    std::vector<double> t;
    std::vector<double> logn;
    bool all_zero = true;
    for (std::size_t i = first; i < g.size(); ++i) {
        const double n = entry_norm1(g[i]);
        if (n > 0.0) {
            all_zero = false;
            t.push_back(g.time(i));
            logn.push_back(std::log(n));
        }
    }
    if (all_zero) {
        tail.decays = true;
        return tail;
    }
    if (t.size() < 2) {
        tail.decays = false;
        tail.mass = std::numeric_limits<double>::infinity();
        return tail;
    }
    const auto fit = fit_line(t, logn);
    if (fit.slope >= 0.0) {
        tail.decays = false;
        tail.mass = std::numeric_limits<double>::infinity();
        return tail;
    }
    tail.decays = true;
    tail.rate = -fit.slope;
    tail.mass = std::exp(fit.intercept + fit.slope * g.horizon()) / tail.rate;
    return tail;
}

DissipativityVerdict check_dissipative(const MatrixTrajectory& g, const std::vector<double>& omegas,
                                       const std::optional<Mat>& direct, double psd_tol) {
    if (g.size() < 2) {
        throw InvalidArgument("check_dissipative: kernel needs at least two samples");
    }
    if (g.rows() != g.cols()) {
        throw InvalidArgument("check_dissipative: kernel must be square");
    }
    if (direct && (direct->rows() != g.rows() || direct->cols() != g.cols())) {
        throw InvalidArgument("check_dissipative: direct term shape mismatch");
    }
    const TailEstimate tail = estimate_tail(g);
    const double slack = tail.decays ? 2.0 * tail.mass : 0.0;
    auto v = pr_scan(
        omegas, psd_tol,
        [&](double w, CMat& h) {
            h = CMat::Zero(g.rows(), g.cols());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double weight = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
                const cd phase = std::polar(weight * g.dt(), -w * g.time(i));
                h += phase * g[i].cast<cd>();
            }
            if (direct) {
                h += direct->cast<cd>();
            }
            return true;
        },
        slack);
    v.tail_mass = tail.mass;
    v.decays = tail.decays;
    if (!tail.decays) {
        v.warning = "sampled kernel does not decay over the window; transform is truncated";
    }
    return v;
}

// ---------------------------------------------------------------------------
// Reciprocity and time reversal

ReciprocityVerdict check_reciprocal(const MatrixTrajectory& g, const SignatureMatrix& sigma, double tol) {
    if (sigma.size() != g.rows() || g.rows() != g.cols()) {
        throw InvalidArgument("check_reciprocal: signature size must match the kernel");
    }
    const Mat s = sigma.matrix();
    ReciprocityVerdict v;
    for (const auto& gi : g.values()) {
        v.residual = std::max(v.residual, entry_norm1(s * gi - gi.transpose() * s));
    }
    v.reciprocal = v.residual <= tol;
    return v;
}

namespace {

std::optional<std::vector<int>> find_state_signature(const Mat& a, const Mat& b, const Mat& c,
                                                     const SignatureMatrix& sigma) {
    const Eigen::Index n = a.rows();
    if (n > 12) {
        return std::nullopt;
    }
    const Mat se = sigma.matrix();
    const double tol = 1e-9 * (1.0 + a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff());
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
        Vec s(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            s(i) = (mask >> i) & 1U ? -1.0 : 1.0;
        }
        const Mat sm = s.asDiagonal();
        if ((sm * a * sm + a).cwiseAbs().maxCoeff() > tol) {
            continue;
        }
        if ((sm * b - b * se).cwiseAbs().maxCoeff() > tol) {
            continue;
        }
        if ((c * sm - se * c).cwiseAbs().maxCoeff() > tol) {
            continue;
        }
        std::vector<int> out(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = static_cast<int>(s(i));
        }
        return out;
    }
    return std::nullopt;
}

template <class Simulate>
ReversibilityVerdict reversal_check(Eigen::Index n, std::optional<std::vector<int>> signature,
                                    const SignatureMatrix& sigma, const InputFn& u1, double dt, double horizon,
                                    double tol, const SimulationOptions& opts, const Simulate& simulate) {
    const std::size_t steps = step_count(dt, horizon);
    if (opts.stride == 0 || steps % opts.stride != 0) {
        throw InvalidArgument("check_time_reversible: stride must divide the step count");
    }
    ReversibilityVerdict v;
    v.structural_match = signature.has_value();
    if (!signature) {
        signature = std::vector<int>(static_cast<std::size_t>(n), 1);
    }
    v.state_signature = *signature;
    const Mat se = sigma.matrix();

    SimulationOptions run_opts = opts;
    run_opts.record_state = false;
    const auto fwd = simulate(u1, Vec::Zero(n), run_opts);
    Vec x2_0 = fwd.final_state;
    for (Eigen::Index i = 0; i < n; ++i) {
        x2_0(i) *= (*signature)[static_cast<std::size_t>(i)];
    }
    const InputFn u2 = [&](double t) -> Vec { return -(se * u1(horizon - t)); };
    const auto rev = simulate(u2, x2_0, run_opts);
    const std::size_t k = fwd.y.size();
    for (std::size_t i = 0; i < k; ++i) {
        v.residual = std::max(v.residual, (rev.y[i] - se * fwd.y[k - 1 - i]).norm());
    }
    v.reversible = v.residual <= tol;
    return v;
}

Vec reject_nonzero_x0(const std::optional<Vec>& x0) {
    if (x0 && x0->size() > 0 && x0->cwiseAbs().maxCoeff() != 0.0) {
        throw InvalidArgument("check_time_reversible: the definition requires x(0) = 0");
    }
    return {};
}

}  // namespace

ReversibilityVerdict check_time_reversible(const LosslessLinear& sys, const SignatureMatrix& sigma,
                                           const InputFn& u1, double dt, double horizon, double tol,
                                           const SimulationOptions& opts) {
    if (sigma.size() != sys.ports()) {
        throw InvalidArgument("check_time_reversible: signature size must equal the port count");
    }
    auto signature = sys.state_signature();
    if (!signature && sys.states() <= 12) {
        signature = find_state_signature(sys.J(), sys.B(), sys.B().transpose(), sigma);
    }
    return reversal_check(sys.states(), signature, sigma, u1, dt, horizon, tol, opts,
                          [&](const InputFn& u, const Vec& x0, const SimulationOptions& o) {
                              return simulate_linear(sys, u, x0, dt, horizon, o);
                          });
}

ReversibilityVerdict check_time_reversible(const LinearStateSpace& sys, const SignatureMatrix& sigma,
                                           const InputFn& u1, double dt, double horizon, double tol,
                                           const SimulationOptions& opts) {
    if (sigma.size() != sys.inputs() || sigma.size() != sys.outputs()) {
        throw InvalidArgument("check_time_reversible: signature size must equal the port count");
    }
    const auto signature = find_state_signature(sys.A(), sys.B(), sys.C(), sigma);
    return reversal_check(sys.states(), signature, sigma, u1, dt, horizon, tol, opts,
                          [&](const InputFn& u, const Vec& x0, const SimulationOptions& o) {
                              return simulate_linear(sys, u, x0, dt, horizon, o);
                          });
}

ReversibilityVerdict check_time_reversible(const LosslessLinear& sys, const SignatureMatrix& sigma,
                                           const Trajectory& u1, double tol, const std::optional<Vec>& x0) {
    reject_nonzero_x0(x0);
    return check_time_reversible(sys, sigma, [&u1](double t) { return u1.at(t); }, u1.dt(), u1.horizon(), tol);
}

ReversibilityVerdict check_time_reversible(const LinearStateSpace& sys, const SignatureMatrix& sigma,
                                           const Trajectory& u1, double tol, const std::optional<Vec>& x0) {
    reject_nonzero_x0(x0);
    return check_time_reversible(sys, sigma, [&u1](double t) { return u1.at(t); }, u1.dt(), u1.horizon(), tol);
}

}  // namespace lossless
