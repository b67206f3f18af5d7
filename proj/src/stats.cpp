#include "lossless/stats.hpp"

#include "lossless/random.hpp"

#include <cmath>

namespace lossless {

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        throw InvalidArgument("mean: empty sample");
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) {
        throw InvalidArgument("variance: need at least two samples");
    }
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size() - 1);
}

double standard_error(const std::vector<double>& v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

Vec mean(const std::vector<Vec>& samples) {
    if (samples.empty()) {
        throw InvalidArgument("mean: empty sample");
    }
    Vec s = Vec::Zero(samples.front().size());
    for (const auto& x : samples) {
        s += x;
    }
    return s / static_cast<double>(samples.size());
}

Mat covariance_about(const std::vector<Vec>& samples, const Vec& center) {
    if (samples.empty()) {
        throw InvalidArgument("covariance_about: empty sample");
    }
    Mat s = Mat::Zero(center.size(), center.size());
    for (const auto& x : samples) {
        const Vec d = x - center;
        s.noalias() += d * d.transpose();
    }
    return s / static_cast<double>(samples.size());
}

Mat covariance(const std::vector<Vec>& samples) {
    if (samples.size() < 2) {
        throw InvalidArgument("covariance: need at least two samples");
    }
    const Vec m = mean(samples);
    const auto n = static_cast<double>(samples.size());
    return covariance_about(samples, m) * (n / (n - 1.0));
}

std::vector<double> MomentSums::means() const {
    std::vector<double> m(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        m[i] = sum[i] / static_cast<double>(count);
    }
    return m;
}

std::vector<double> MomentSums::standard_errors() const {
    std::vector<double> se(sum.size(), 0.0);
    if (count < 2) {
        return se;
    }
    const auto n = static_cast<double>(count);
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const double m = sum[i] / n;
        const double var = std::max(0.0, (sum_sq[i] - n * m * m) / (n - 1.0));
        se[i] = std::sqrt(var / n);
    }
    return se;
}

MomentSums accumulate_moments(std::size_t trials, std::size_t width, int threads,
                              const std::function<void(std::size_t, std::vector<double>&)>& fn) {
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> block_sum(blocks, std::vector<double>(width, 0.0));
    std::vector<std::vector<double>> block_sq(blocks, std::vector<double>(width, 0.0));
    parallel_trials(blocks, threads, [&](std::size_t b) {
        std::vector<double> out(width);
        auto& s = block_sum[b];
        auto& q = block_sq[b];
        const std::size_t end = std::min(trials, (b + 1) * kBlock);
        for (std::size_t t = b * kBlock; t < end; ++t) {
            std::fill(out.begin(), out.end(), 0.0);
            fn(t, out);
            for (std::size_t i = 0; i < width; ++i) {
                s[i] += out[i];
                q[i] += out[i] * out[i];
            }
        }
    });
    MomentSums m;
    m.count = trials;
    m.sum.assign(width, 0.0);
    m.sum_sq.assign(width, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < width; ++i) {
            m.sum[i] += block_sum[b][i];
            m.sum_sq[i] += block_sq[b][i];
        }
    }
    return m;
}

}  // namespace lossless
