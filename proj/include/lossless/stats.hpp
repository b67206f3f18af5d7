#pragma once

#include "lossless/types.hpp"

#include <functional>

namespace lossless {

[[nodiscard]] double mean(const std::vector<double>& v);
/// Unbiased sample variance.
[[nodiscard]] double variance(const std::vector<double>& v);
/// Standard error of the sample mean.
[[nodiscard]] double standard_error(const std::vector<double>& v);

[[nodiscard]] Vec mean(const std::vector<Vec>& samples);
/// Sample covariance about a known mean (divides by the count).
[[nodiscard]] Mat covariance_about(const std::vector<Vec>& samples, const Vec& center);
/// Unbiased sample covariance about the sample mean.
[[nodiscard]] Mat covariance(const std::vector<Vec>& samples);

/// Per-statistic sums over Monte-Carlo trials.
struct MomentSums {
    std::size_t count = 0;
    std::vector<double> sum;
    std::vector<double> sum_sq;

    [[nodiscard]] std::vector<double> means() const;
    /// Standard error of each mean (unbiased variance / count).
    [[nodiscard]] std::vector<double> standard_errors() const;
};

/// Runs fn(trial, out) for every trial, where `out` has `width` slots to fill.
/// Trials are summed in fixed blocks and the blocks reduced in index order,
/// so the result is bitwise identical for any thread count.
[[nodiscard]] MomentSums accumulate_moments(std::size_t trials, std::size_t width, int threads,
                                            const std::function<void(std::size_t, std::vector<double>&)>& fn);

}  // namespace lossless
