#pragma once

#include "lossless/types.hpp"

namespace lossless {

/// exp(M) by scaling and squaring with a degree-13 Pade kernel.
/// Throws InvalidArgument for non-square or non-finite input.
[[nodiscard]] Mat matrix_exponential(const Mat& m);

/// Entrywise 1-norm, sum of |m_ij|.
[[nodiscard]] double entry_norm1(const Mat& m);
/// Largest singular value.
[[nodiscard]] double sigma_max(const Mat& m);

[[nodiscard]] inline Mat sym_part(const Mat& m) { return 0.5 * (m + m.transpose()); }
[[nodiscard]] inline Mat skew_part(const Mat& m) { return 0.5 * (m - m.transpose()); }

/// ||M + M^T||_1 (entrywise); zero iff M is skew.
[[nodiscard]] double skew_residual(const Mat& m);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Ordinary least squares y = a + b x, returns {a, b}.
struct LineFit {
    double intercept;
    double slope;
};
[[nodiscard]] LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lossless
