#pragma once

#include "lossless/statespace.hpp"
#include "lossless/types.hpp"

#include <cstdint>

namespace lossless {

inline constexpr double kBoltzmannNatural = 1.0;
inline constexpr double kBoltzmannSI = 1.380649e-23;

/// Gibbs ensemble of initial states: Gaussian with covariance k_B T I.
struct ThermalEnsemble {
    double temperature = 0.0;
    double k_b = kBoltzmannNatural;
    Eigen::Index dim = 0;
    Vec mean;  // empty means zero
    std::uint64_t seed = 0;

    [[nodiscard]] Vec center() const;
    /// Sample `index` of the ensemble; depends only on (seed, index).
    [[nodiscard]] Vec draw(std::size_t index) const;
};

[[nodiscard]] std::vector<Vec> sample_gibbs(const ThermalEnsemble& ens, std::size_t count, int threads = 1);

/// U = |x - mean|^2 / 2
[[nodiscard]] double internal_energy(const Vec& x, const Vec& mean);

/// k_B T B^T e^{J (t - s)} B for t >= s, its transpose otherwise.
[[nodiscard]] Mat analytic_fluctuation_covariance(const LosslessLinear& sys, double temperature, double t, double s,
                                                  double k_b = kBoltzmannNatural);

struct FdtReport {
    std::vector<double> lags;
    std::vector<Mat> analytic;   // k_B T g(lag)
    std::vector<Mat> empirical;  // mean of n(lag) n(0)^T
    std::vector<Mat> std_error;
    double max_abs_deviation = 0.0;
    double max_z = 0.0;               // deviation in standard errors
    double max_stationarity_z = 0.0;  // R(lag + h, h) against R(lag, 0)
};

/// Monte-Carlo fluctuation covariance of n(t) = B^T e^{Jt} x0 over Gibbs draws of x0,
/// on lags i * dt, i < lag_count. The stationarity shift is h = shift_steps * dt.
[[nodiscard]] FdtReport empirical_fdt_check(const LosslessLinear& sys, double temperature, std::size_t trials,
                                            double dt, std::size_t lag_count, std::uint64_t seed,
                                            double k_b = kBoltzmannNatural, std::size_t shift_steps = 10,
                                            int threads = 1);

/// dx = ((J - K) x + B u) dt + sqrt(2 k_B T) L dW with L L^T = K.
struct LangevinModel {
    Mat j, k, l, b;
    double temperature = 0.0;
    double k_b = kBoltzmannNatural;

    /// Validates J skew and K symmetric PSD; L is a factor of K.
    static LangevinModel make(const Mat& j, const Mat& k, const Mat& b, double temperature,
                              double k_b = kBoltzmannNatural);
};

/// Euler-Maruyama, keeping every `stride`-th sample.
[[nodiscard]] Trajectory simulate_langevin(const LangevinModel& model, const InputFn& u, const Vec& x0, double dt,
                                           double horizon, std::uint64_t seed, std::size_t stride = 1);

/// White-noise intensity 2 k_B T k_s of a memoryless passive element.
[[nodiscard]] Mat johnson_nyquist_intensity(const Mat& k_s, double temperature, double k_b = kBoltzmannNatural);

/// Step-rate band-limited samples of that noise: covariance 2 k_B T k_s / dt per sample.
[[nodiscard]] Trajectory sample_white_noise(const Mat& k_s, double temperature, double dt, std::size_t samples,
                                            std::uint64_t seed, double k_b = kBoltzmannNatural);

struct ThermalNoiseSplit {
    std::vector<double> deterministic;  // (k^2 / 2E0) u int u^2
    std::vector<double> stochastic;     // k dx0 u / sqrt(2 E0)
};

/// Scalar energy-supply element with perturbed supply state sqrt(2E0) + dx0:
/// y_E = k u + stochastic + deterministic.
[[nodiscard]] ThermalNoiseSplit nonlinear_thermal_decompose(double k, double e0, const Trajectory& u, double dx0);

/// Variance of the stochastic part over Gibbs draws of dx0: k^2 k_B T u^2 / (2 E0).
[[nodiscard]] double nonlinear_thermal_variance(double k, double e0, double temperature, double u_t,
                                                double k_b = kBoltzmannNatural);

}  // namespace lossless
