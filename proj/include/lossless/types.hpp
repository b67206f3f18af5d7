#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lossless {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<double>;

/// Input signal evaluated at arbitrary time (RK4 stages sample between grid points).
using InputFn = std::function<Vec(double)>;

inline constexpr double kSkewTol = 1e-10;
inline constexpr double kPsdTol = 1e-8;

/// Rejected precondition: dimensions, signs, missing parameters.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integration or factorization broke down. Carries the simulation time
/// at which it happened (NaN when not time-related).
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double time);
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Uniformly sampled vector signal, sample i at t_i = i * dt.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double dt, std::vector<Vec> values);

    /// Sample `f` on [0, horizon] with step dt (horizon/dt rounded to the nearest integer).
    static Trajectory sample(const InputFn& f, double dt, double horizon);
    static Trajectory zeros(std::size_t dim, double dt, std::size_t samples);

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }
    [[nodiscard]] double horizon() const noexcept {
        return values_.empty() ? 0.0 : time(values_.size() - 1);
    }
    [[nodiscard]] const Vec& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<Vec>& values() const noexcept { return values_; }

    /// Piecewise-linear interpolation; clamps outside the sample window.
    [[nodiscard]] Vec at(double t) const;
    /// Component `k` of every sample.
    [[nodiscard]] std::vector<double> component(Eigen::Index k) const;

private:
    double dt_ = 1.0;
    Eigen::Index dim_ = 0;
    std::vector<Vec> values_;
};

/// Uniformly sampled p x p matrix signal (impulse responses, covariances).
class MatrixTrajectory {
public:
    MatrixTrajectory() = default;
    MatrixTrajectory(double dt, std::vector<Mat> values);

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Eigen::Index rows() const noexcept { return rows_; }
    [[nodiscard]] Eigen::Index cols() const noexcept { return cols_; }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }
    [[nodiscard]] double horizon() const noexcept {
        return values_.empty() ? 0.0 : time(values_.size() - 1);
    }
    [[nodiscard]] const Mat& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<Mat>& values() const noexcept { return values_; }

private:
    double dt_ = 1.0;
    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<Mat> values_;
};

/// Diagonal +1/-1 matrix classifying port variables under time reversal.
class SignatureMatrix {
public:
    SignatureMatrix() = default;
    explicit SignatureMatrix(std::vector<int> diag);
    static SignatureMatrix identity(Eigen::Index p);

    [[nodiscard]] Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(diag_.size()); }
    [[nodiscard]] int operator[](Eigen::Index i) const { return diag_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<int>& diag() const noexcept { return diag_; }
    [[nodiscard]] Mat matrix() const;

private:
    std::vector<int> diag_;
};

[[nodiscard]] bool all_finite(const Mat& m);
void require_finite(const Mat& m, const char* what);

}  // namespace lossless
