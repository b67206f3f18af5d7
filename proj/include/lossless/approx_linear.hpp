#pragma once

#include "lossless/statespace.hpp"
#include "lossless/types.hpp"

#include <functional>
#include <optional>

namespace lossless {

struct SymmetricSplit {
    Mat symmetric;      // (k + k^T) / 2
    Mat antisymmetric;  // (k - k^T) / 2
};

[[nodiscard]] SymmetricSplit split_symmetric(const Mat& k);

/// Rank-revealing factor F (r x p) with F^T F = k_s.
/// Eigenvalues below rank_tol * lambda_max are dropped; eigenvalues below
/// -psd_tol * max(1, lambda_max) make the call throw.
[[nodiscard]] Mat factor_psd(const Mat& k_s, double rank_tol = 1e-12, double psd_tol = kPsdTol);

/// Memoryless map y = k u with its symmetric/antisymmetric split and factor.
struct MemorylessSystem {
    Mat k, k_s, k_a;
    Mat k_f;  // r x p
    Eigen::Index rank = 0;

    static MemorylessSystem from(const Mat& k, double psd_tol = kPsdTol);
};

/// Lossless cosine-series approximation of a passive memoryless map.
///
/// States are ordered [dc (r) | cos (N-1) r | sin (N-1) r]. The realization is
/// (J, sqrt(2) B_N, D = k_a); its kernel is k_s/tau + sum_l (2 k_s/tau) cos(l w0 t).
struct HarmonicApprox {
    double tau = 0.0;
    int order = 0;
    double omega0 = 0.0;
    MemorylessSystem k;
    Mat b_n;  // un-scaled B_N, (2N-1) r x p
    LosslessLinear realization;

    /// Closed-form kernel sum (direct term excluded).
    [[nodiscard]] Mat kernel_at(double t) const;
};

[[nodiscard]] HarmonicApprox memoryless_lossless_approx(const Mat& k, double tau, int order);

/// Pointwise error bound for the harmonic approximation driven by u with u(0) = 0:
/// 2 sigma(k_s) tau / (pi^2 (N-1)) * (|u'(t)| + |u'(0)| + int_0^t |u''|).
/// Derivatives by second-order finite differences, the integral by trapezoid.
[[nodiscard]] Trajectory memoryless_error_bound(const Mat& k_s, double tau, int order, const Trajectory& u);

struct FourierCoefficients {
    std::vector<Mat> cos;  // A_0 .. A_{N-1}, symmetric
    std::vector<Mat> sin;  // B_0 .. B_{N-1}, antisymmetric; B_0 = 0
};

/// Half-range coefficients of the even/odd extension of g on [0, tau]:
/// A_k = (1/tau) int (g + g^T) cos(k pi t / tau), B_k = (1/tau) int (g - g^T) sin(k pi t / tau),
/// by trapezoid on the sample grid (computed with real-to-real FFTs).
/// g must be sampled on [0, tau] with at least N intervals.
[[nodiscard]] FourierCoefficients fourier_coefficients(const MatrixTrajectory& g, int harmonics);

/// Tail integral delta(tau) = int_tau^inf ||g||_1.
using TailFn = std::function<double(double)>;

struct TauSelection {
    double tau = 0.0;
    double delta = 0.0;  // tail at the chosen tau
    double target = 0.0;
};

/// Smallest tau >= tau0 with delta(tau) <= eps^2 / (2 C sqrt(p)), from an analytic tail.
[[nodiscard]] TauSelection select_tau(const TailFn& tail, double eps, double tau0, double c, Eigen::Index ports);
/// Same, on the sample grid of g with the tail past the window from an exponential fit.
/// Throws when the window is too short to reach the target.
[[nodiscard]] TauSelection select_tau(const MatrixTrajectory& g, double eps, double tau0, double c);

/// One oscillator bank with impulse response cos(w t) Re R - sin(w t) Im R,
/// i.e. (A + xi) cos(w t) + B sin(w t) for R = (A + xi) - j B.
/// For w = 0 the block has J = 0 and response Re R.
struct HarmonicBlock {
    double omega = 0.0;
    Mat input;                    // rows: [P; -Q] for w > 0, F for w = 0
    std::vector<int> signature;   // per-state +1/-1, empty when unstructured
    Mat target_cos;               // Re R
    Mat target_sin;               // -Im R

    [[nodiscard]] Eigen::Index states() const noexcept { return input.rows(); }
    [[nodiscard]] LosslessLinear system() const;
    [[nodiscard]] Mat target_at(double t) const;
};

/// Factor R = W^* W (W = P + jQ) and build the block.
/// With a signature Sigma, R must satisfy the reciprocal pattern and the factor
/// is chosen so that P lives on the +1 ports and Q on the -1 ports.
[[nodiscard]] HarmonicBlock realize_harmonic(const CMat& r, double omega,
                                             const std::optional<SignatureMatrix>& sigma = std::nullopt,
                                             double psd_tol = kPsdTol);

using KernelFn = std::function<Mat(double)>;

struct DissipativeApproxOptions {
    TailFn tail;                             // analytic tail; fitted from samples when empty
    double window = 0.0;                     // constant-estimation window, default 10 tau0
    std::size_t window_samples = 1 << 16;
    std::size_t quadrature_intervals = 1 << 17;
    std::size_t max_states = 20000;
    std::optional<SignatureMatrix> signature;  // detected (identity) for symmetric kernels when unset
    bool search_empirical_order = true;
    double psd_tol = kPsdTol;
};

/// Output of the Fourier synthesis for a dissipative kernel.
struct FourierLosslessApprox {
    double eps = 0.0;
    double tau0 = 0.0;
    double tau = 0.0;
    int order = 0;      // harmonic count N
    double xi = 0.0;
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c = 0.0;
    double delta = 0.0;
    Eigen::Index ports = 0;
    FourierCoefficients coeffs;
    std::vector<HarmonicBlock> blocks;  // blocks[0] is the DC term
    std::optional<SignatureMatrix> signature;
    LosslessLinear realization;
    double min_residue_eigenvalue = 0.0;  // over all shifted residues
    double l2_error = 0.0;                // on [0, tau0]
    int empirical_order = 0;              // smallest N meeting eps, 0 when not searched

    /// Direct cosine/sine sum for the first `harmonics` terms (all when negative).
    [[nodiscard]] Mat kernel_at(double t, int harmonics = -1) const;
    /// Samples of the same sum on [0, tau] with `intervals` steps, by FFT.
    [[nodiscard]] MatrixTrajectory sample_kernel(std::size_t intervals, int harmonics = -1) const;
    /// tau (|c0/2|^2 + sum (|a_k|^2 + |b_k|^2) / 2), Frobenius norms; equals int_0^tau ||g_N||_F^2.
    [[nodiscard]] double parseval_energy(int harmonics = -1) const;
};

/// Lossless approximation of a dissipative kernel to L2 accuracy eps on [0, tau0].
/// Refuses kernels that fail the positive-real test and orders that exceed the state budget.
[[nodiscard]] FourierLosslessApprox dissipative_lossless_approx(const KernelFn& g, double eps, double tau0,
                                                                const DissipativeApproxOptions& opts = {});

/// sqrt(int ||g - g_N||_2^2) over [0, window] by trapezoid; the last partial interval
/// is interpolated linearly.
[[nodiscard]] double l2_error(const MatrixTrajectory& g, const MatrixTrajectory& g_n, double window);

/// Kernel g(t) = C e^{At} B of a state-space model.
[[nodiscard]] KernelFn state_space_kernel(const LinearStateSpace& sys);

}  // namespace lossless
