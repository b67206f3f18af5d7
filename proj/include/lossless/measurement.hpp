#pragma once

#include "lossless/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace lossless {

/// Lossless system x' = J x + B u, y = B^T x started from a fixed x0.
struct MeasuredSystem {
    Mat j;
    Vec b;
    Vec x0;

    MeasuredSystem(Mat j, Vec b, Vec x0);

    /// Three-state LC ladder with unit elements, x0 = e1.
    static MeasuredSystem lc_fixture();

    [[nodiscard]] Eigen::Index states() const noexcept { return j.rows(); }
    /// 1 / (B^T B)
    [[nodiscard]] double capacitance() const { return 1.0 / b.squaredNorm(); }
    [[nodiscard]] double y0() const { return b.dot(x0); }
    /// e^{Jt} x0
    [[nodiscard]] Vec free_state(double t) const;
};

enum class DeviceVariant { M1, M1hat, M2, M2hat };

[[nodiscard]] std::string to_string(DeviceVariant v);
[[nodiscard]] DeviceVariant device_variant_from_string(const std::string& s);

/// Measurement device attached at the port.
///
/// M1: ideal conductance k_m. M1hat: the same with thermal noise at T_m.
/// M2: ideal meter with no back action. M2hat: noisy conductance k_m in
/// parallel with an energy-supply element of conductance -k_m holding E_m.
struct Device {
    DeviceVariant variant = DeviceVariant::M1;
    double k_m = 1.0;
    double t_m = 0.0;  // device temperature
    double e_m = 0.0;  // supply energy (M2hat)
    double k_b = 1.0;

    void validate() const;
    [[nodiscard]] bool noisy() const noexcept {
        return variant == DeviceVariant::M1hat || variant == DeviceVariant::M2hat;
    }
};

/// Which components of x0 the estimator treats as unknown.
enum class PriorMode {
    Potential,  // only the port direction B: y0 unknown, the rest known
    FullState,  // all of x0 unknown
};

enum class FilterMode {
    None,
    Privileged,  // M2hat: supply perturbation and its feedback term known to the filter
    Realistic,   // M2hat: filter assumes the ideal cancelling device
};

struct MeasurementOptions {
    std::size_t steps = 1000;  // per horizon
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
    FilterMode filter = FilterMode::Privileged;
    PriorMode prior = PriorMode::Potential;
    double prior_variance = 1e12;
};

struct MeasurementOutcome {
    DeviceVariant variant = DeviceVariant::M1;
    double horizon = 0.0;
    std::size_t trials = 0;
    Vec b_det;            // back action of the noise-free device
    Vec b_mean;           // trial mean of the back action
    Vec b_mean_se;        // its standard error
    Mat p;                // back-action covariance over trials
    double dy2 = 0.0;     // B^T P B
    double est_var = 0.0;        // Monte-Carlo variance of yhat(t_m) - B^T x(t_m)
    double est_mean = 0.0;       // Monte-Carlo mean of the same error
    double filter_var = 0.0;     // discrete filter covariance projected on B
    double m_star = 0.0;         // continuous Riccati value at the horizon
    double max_correction_residual = 0.0;  // |y - (yhat - e - B^T b)| over trials
    Trajectory y_m;              // measurement record of trial 0
};

/// Monte-Carlo run of a device attached over [0, horizon].
///
/// Noise uses one Gaussian sample per step for both the state kick
/// -sqrt(2 k_m k_B T dt) B xi and the reading sqrt(2 k_B T / (k_m dt)) xi.
[[nodiscard]] MeasurementOutcome simulate_device(const MeasuredSystem& s, const Device& d, double horizon,
                                                 const MeasurementOptions& opts = {});

struct KalmanResult {
    Trajectory estimate;            // B^T xhat_{k|k-1}, filtered at the last sample
    std::vector<double> gain_norm;  // |K_k|
    std::vector<double> variance;   // B^T P_{k|k} B
    bool resymmetrized = false;
};

/// Discrete filter matched to the simulated device on the grid of y_m.
/// For M2hat in privileged mode, `supply_offset` and `feedback` (w_d per sample) must be given.
[[nodiscard]] KalmanResult kalman_estimate(const MeasuredSystem& s, const Device& d, const Trajectory& y_m,
                                           FilterMode mode = FilterMode::Privileged,
                                           PriorMode prior = PriorMode::Potential,
                                           std::optional<double> supply_offset = std::nullopt,
                                           const std::vector<double>& feedback = {},
                                           double prior_variance = 1e12);

struct RiccatiSolution {
    std::vector<double> times;
    std::vector<Mat> x;           // error covariance
    std::vector<double> m_star;   // B^T X B
};

/// Information-form solution with zero initial information along `prior`'s columns:
/// X(t) = Phi Y^{-1} Phi^T, Phi = e^{A t} V, Y' = c Phi^T b b^T Phi, Y(0) = 0.
/// `grid` must be increasing and positive.
[[nodiscard]] RiccatiSolution riccati_solve(const Mat& drift, const Vec& b, double c, const Mat& prior,
                                            const std::vector<double>& grid, double max_step = 1e-2);

/// Device-specific Riccati after decorrelating state and reading noise.
/// `supply_offset` is the M2hat supply perturbation (0 by default).
[[nodiscard]] RiccatiSolution riccati_solve(const MeasuredSystem& s, const Device& d, const std::vector<double>& grid,
                                            PriorMode prior = PriorMode::Potential, double supply_offset = 0.0);

struct TradeoffResult {
    double lhs = 0.0;         // |dy| |dyhat| with |dyhat| = sqrt(M*)
    double lhs_filter = 0.0;  // same with the Monte-Carlo filter spread
    double rhs = 0.0;         // 2 k_B T_m / C
    double ratio = 0.0;
    double dy = 0.0;
    double dyhat = 0.0;
};

[[nodiscard]] TradeoffResult tradeoff_product(const MeasuredSystem& s, const Device& d, double horizon,
                                              const MeasurementOptions& opts = {});

/// Noise-free M2hat back action from a fine RK4 solve of the coupled (x, x_r) system.
[[nodiscard]] Vec m2hat_deterministic_back_action(const MeasuredSystem& s, double k_m, double e_m, double horizon,
                                                  std::size_t steps = 20000);

struct Table1Row {
    DeviceVariant variant;
    double horizon;
    double b_coef;   // B^T b_det / (B^T B)
    double p_trace;  // trace P
    double dy2;
    double m_star;
};

struct CoefficientFit {
    std::string quantity;
    DeviceVariant variant;
    double exponent = 0.0;      // free log-log slope
    double coefficient = 0.0;   // fitted with the leading exponent held fixed
    double expected = 0.0;
    double ratio = 0.0;         // coefficient / expected
};

struct Table1Report {
    std::vector<Table1Row> rows;
    std::vector<CoefficientFit> fits;
    bool m2_rows_zero = false;
    double m2hat_text_coef = 0.0;   // k_m^2 y0^3 / (4 E_m)
    double m2hat_table_coef = 0.0;  // k_m y0^3 / (4 E_m)
    double m2hat_fitted_coef = 0.0;
    std::string m2hat_match;        // "text", "table", or "neither"
};

/// Back action, covariance and estimation error for each device over a horizon grid,
/// with leading-order coefficient fits.
[[nodiscard]] Table1Report table1_summary(const MeasuredSystem& s, const Device& base,
                                          const std::vector<double>& horizons, const MeasurementOptions& opts = {});

}  // namespace lossless
