#include "lossless/types.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lossless {

NumericalFailure::NumericalFailure(const std::string& what, double time)
    : std::runtime_error(what), time_(time) {}

bool all_finite(const Mat& m) { return m.allFinite(); }

void require_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite entry");
    }
}

Trajectory::Trajectory(double dt, std::vector<Vec> values) : dt_(dt), values_(std::move(values)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("Trajectory: dt must be positive and finite");
    }
    if (!values_.empty()) {
        dim_ = values_.front().size();
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i].size() != dim_) {
            std::ostringstream os;
            os << "Trajectory: sample " << i << " has dimension " << values_[i].size()
               << ", expected " << dim_;
            throw InvalidArgument(os.str());
        }
        if (!values_[i].allFinite()) {
            std::ostringstream os;
            os << "Trajectory: non-finite sample at t=" << time(i);
            throw InvalidArgument(os.str());
        }
    }
}

Trajectory Trajectory::sample(const InputFn& f, double dt, double horizon) {
    if (!(dt > 0.0) || horizon < 0.0) {
        throw InvalidArgument("Trajectory::sample: need dt > 0 and horizon >= 0");
    }
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    std::vector<Vec> v;
    v.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        v.push_back(f(static_cast<double>(i) * dt));
    }
    return Trajectory(dt, std::move(v));
}

Trajectory Trajectory::zeros(std::size_t dim, double dt, std::size_t samples) {
    return Trajectory(dt, std::vector<Vec>(samples, Vec::Zero(static_cast<Eigen::Index>(dim))));
}

Vec Trajectory::at(double t) const {
    if (values_.empty()) {
        throw InvalidArgument("Trajectory::at on empty trajectory");
    }
    if (t <= 0.0) {
        return values_.front();
    }
    const double s = t / dt_;
    const auto i = static_cast<std::size_t>(std::floor(s));
    if (i + 1 >= values_.size()) {
        return values_.back();
    }
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
}

std::vector<double> Trajectory::component(Eigen::Index k) const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& v : values_) {
        out.push_back(v(k));
    }
    return out;
}

MatrixTrajectory::MatrixTrajectory(double dt, std::vector<Mat> values)
    : dt_(dt), values_(std::move(values)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("MatrixTrajectory: dt must be positive and finite");
    }
    if (!values_.empty()) {
        rows_ = values_.front().rows();
        cols_ = values_.front().cols();
    }
    for (const auto& m : values_) {
        if (m.rows() != rows_ || m.cols() != cols_) {
            throw InvalidArgument("MatrixTrajectory: inconsistent sample shapes");
        }
        if (!m.allFinite()) {
            throw InvalidArgument("MatrixTrajectory: non-finite sample");
        }
    }
}

SignatureMatrix::SignatureMatrix(std::vector<int> diag) : diag_(std::move(diag)) {
    for (int d : diag_) {
        if (d != 1 && d != -1) {
            throw InvalidArgument("SignatureMatrix: entries must be +1 or -1");
        }
    }
}

SignatureMatrix SignatureMatrix::identity(Eigen::Index p) {
    return SignatureMatrix(std::vector<int>(static_cast<std::size_t>(p), 1));
}

Mat SignatureMatrix::matrix() const {
    Mat m = Mat::Zero(size(), size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        m(i, i) = (*this)[i];
    }
    return m;
}

}  // namespace lossless
