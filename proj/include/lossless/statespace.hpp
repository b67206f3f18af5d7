#pragma once

#include "lossless/types.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <optional>

namespace lossless {

/// dx/dt = A x + B u,  y = C x + D u.
class LinearStateSpace {
public:
    LinearStateSpace(Mat a, Mat b, Mat c, Mat d);

    [[nodiscard]] const Mat& A() const noexcept { return a_; }
    [[nodiscard]] const Mat& B() const noexcept { return b_; }
    [[nodiscard]] const Mat& C() const noexcept { return c_; }
    [[nodiscard]] const Mat& D() const noexcept { return d_; }
    [[nodiscard]] Eigen::Index states() const noexcept { return a_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const noexcept { return b_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const noexcept { return c_.rows(); }

private:
    Mat a_, b_, c_, d_;
};

/// Lossless model dx/dt = J x + B u, y = B^T x + D u with J and D skew.
///
/// The stored energy is E(x) = x^T x / 2 and satisfies dE/dt = y^T u.
/// Realizations built by the approximation pipelines may also carry a
/// state signature: a +1/-1 vector S with S J S = -J and S B = B Sigma_e,
/// which maps a trajectory onto its time reversal.
/// J is stored sparse: approximation realizations reach ~10^4 states with
/// O(n) nonzeros.
class LosslessLinear {
public:
    /// Empty system: no states, no ports.
    LosslessLinear() = default;
    LosslessLinear(const Mat& j, Mat b, Mat d, double skew_tol = kSkewTol);
    LosslessLinear(SpMat j, Mat b, Mat d, double skew_tol = kSkewTol);

    /// Builds without the skew check, for verifying candidate models.
    static LosslessLinear candidate(const Mat& j, Mat b, Mat d);

    /// Dense copy of J.
    [[nodiscard]] Mat J() const { return Mat(j_); }
    [[nodiscard]] const SpMat& J_sparse() const noexcept { return j_; }
    [[nodiscard]] const Mat& B() const noexcept { return b_; }
    [[nodiscard]] const Mat& D() const noexcept { return d_; }
    [[nodiscard]] Eigen::Index states() const noexcept { return j_.rows(); }
    [[nodiscard]] Eigen::Index ports() const noexcept { return b_.cols(); }

    [[nodiscard]] LinearStateSpace as_state_space() const;

    [[nodiscard]] const std::optional<std::vector<int>>& state_signature() const noexcept {
        return state_signature_;
    }
    [[nodiscard]] LosslessLinear with_state_signature(std::vector<int> signature) const;

private:
    void check_shapes() const;

    SpMat j_;
    Mat b_, d_;
    std::optional<std::vector<int>> state_signature_;
};

struct SimulationOptions {
    /// Keep every `stride`-th sample in the returned trajectories.
    std::size_t stride = 1;
    bool record_state = true;
};

struct SimulationResult {
    Trajectory x;  // empty when record_state is false
    Trajectory y;
    std::vector<double> energy;  // x^T x / 2 at the recorded samples
    Vec final_state;
};

/// Fixed-step RK4 of the linear model, input evaluated at the RK4 stage times.
[[nodiscard]] SimulationResult simulate_linear(const LinearStateSpace& sys, const InputFn& u,
                                               const Vec& x0, double dt, double horizon,
                                               const SimulationOptions& opts = {});
/// Sampled input: the step is u.dt() and stage values are linearly interpolated.
[[nodiscard]] SimulationResult simulate_linear(const LinearStateSpace& sys, const Trajectory& u,
                                               const Vec& x0, double horizon,
                                               const SimulationOptions& opts = {});
[[nodiscard]] SimulationResult simulate_linear(const LosslessLinear& sys, const InputFn& u,
                                               const Vec& x0, double dt, double horizon,
                                               const SimulationOptions& opts = {});
[[nodiscard]] SimulationResult simulate_linear(const LosslessLinear& sys, const Trajectory& u,
                                               const Vec& x0, double horizon,
                                               const SimulationOptions& opts = {});

/// g(t) = C e^{At} B (direct term excluded).
[[nodiscard]] Mat impulse_response_at(const LinearStateSpace& sys, double t);
[[nodiscard]] Mat impulse_response_at(const LosslessLinear& sys, double t);
/// Kernel samples at t_i = i dt, i < samples. The direct term is never folded in.
[[nodiscard]] MatrixTrajectory impulse_response(const LinearStateSpace& sys, double dt, std::size_t samples);
[[nodiscard]] MatrixTrajectory impulse_response(const LosslessLinear& sys, double dt, std::size_t samples);

struct EnergyLedger {
    std::vector<double> times;
    std::vector<double> total_energy;  // x^T x / 2
    std::vector<double> work_rate;     // y^T u

    /// |E(T) - E(0) - integral of w| with Simpson quadrature of the work rate.
    [[nodiscard]] double balance_error() const;
};

[[nodiscard]] EnergyLedger energy_ledger(const Trajectory& x, const Trajectory& u, const Trajectory& y);

struct LosslessVerdict {
    double skew_residual = 0.0;             // max(||J+J^T||_1, ||D+D^T||_1)
    double max_energy_balance_error = 0.0;  // relative to input energy
    bool lossless = false;
};

/// Structural skew check plus random-input energy-balance trials.
/// Inputs are smooth random sinusoid sums derived from `seed`.
[[nodiscard]] LosslessVerdict check_lossless(const LosslessLinear& sys, int trials, std::uint64_t seed,
                                             double horizon = 1.0);

struct DissipativityVerdict {
    std::vector<double> omegas;
    std::vector<double> min_eigenvalues;  // of ghat(jw) + ghat(jw)^*, per grid point
    double min_eigenvalue = 0.0;
    double omega_at_min = 0.0;
    double scale = 1.0;               // largest |ghat| seen, sets the tolerance scale
    double tail_mass = 0.0;           // estimated integral of ||g||_1 past the window
    bool decays = true;
    bool dissipative = false;
    std::string warning;
};

/// Log-spaced grid of `count` points on [lo, hi].
[[nodiscard]] std::vector<double> log_frequency_grid(double lo, double hi, std::size_t count);

/// Positive-real test on the resolvent C (jwI - A)^{-1} B + D.
/// Grid points at which the resolvent is singular are skipped.
[[nodiscard]] DissipativityVerdict check_dissipative(const LinearStateSpace& sys,
                                                     const std::vector<double>& omegas,
                                                     double psd_tol = kPsdTol);
[[nodiscard]] DissipativityVerdict check_dissipative(const LosslessLinear& sys,
                                                     const std::vector<double>& omegas,
                                                     double psd_tol = kPsdTol);
/// Positive-real test on a sampled kernel; ghat by trapezoid quadrature over the
/// sample window, plus an optional direct term carried exactly.
[[nodiscard]] DissipativityVerdict check_dissipative(const MatrixTrajectory& g,
                                                     const std::vector<double>& omegas,
                                                     const std::optional<Mat>& direct = std::nullopt,
                                                     double psd_tol = kPsdTol);

struct TailEstimate {
    double mass = 0.0;   // integral of ||g||_1 past the window end
    double rate = 0.0;   // fitted exponential decay rate (positive when decaying)
    bool decays = false;
};

/// Exponential fit of log ||g(t)||_1 over the last fifth of the window.
[[nodiscard]] TailEstimate estimate_tail(const MatrixTrajectory& g);

struct ReciprocityVerdict {
    double residual = 0.0;
    bool reciprocal = false;
};

[[nodiscard]] ReciprocityVerdict check_reciprocal(const MatrixTrajectory& g, const SignatureMatrix& sigma,
                                                  double tol = 1e-10);

struct ReversibilityVerdict {
    double residual = 0.0;
    bool reversible = false;
    std::vector<int> state_signature;  // the state map used for the reversed run
    bool structural_match = false;     // a signature with S A S = -A and S B = B Sigma_e was found
};

/// Time-reversal test on [0, T], T = u1.horizon().
///
/// The forward run starts at rest. The reversed run applies
/// u2(t) = -Sigma_e u1(T - t) from the reflected terminal state S x1(T),
/// where S is the system's stored state signature, or one found by
/// enumeration (n <= 12) from S A S = -A, S B = B Sigma_e, C S = Sigma_e C,
/// or the identity when none exists. Reversible iff
/// max ||y2(t) - Sigma_e y1(T - t)|| <= tol.
[[nodiscard]] ReversibilityVerdict check_time_reversible(const LosslessLinear& sys, const SignatureMatrix& sigma,
                                                         const Trajectory& u1, double tol,
                                                         const std::optional<Vec>& x0 = std::nullopt);
[[nodiscard]] ReversibilityVerdict check_time_reversible(const LinearStateSpace& sys, const SignatureMatrix& sigma,
                                                         const Trajectory& u1, double tol,
                                                         const std::optional<Vec>& x0 = std::nullopt);
/// Same, with an analytic input on [0, horizon] integrated with step dt.
[[nodiscard]] ReversibilityVerdict check_time_reversible(const LosslessLinear& sys, const SignatureMatrix& sigma,
                                                         const InputFn& u1, double dt, double horizon, double tol,
                                                         const SimulationOptions& opts = {});
[[nodiscard]] ReversibilityVerdict check_time_reversible(const LinearStateSpace& sys, const SignatureMatrix& sigma,
                                                         const InputFn& u1, double dt, double horizon, double tol,
                                                         const SimulationOptions& opts = {});

}  // namespace lossless
