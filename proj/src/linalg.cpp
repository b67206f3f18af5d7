#include "lossless/linalg.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace lossless {

namespace {

// Pade(13,13) coefficients and the 1-norm threshold below which the
// unscaled approximant is accurate to double precision (Higham 2005).
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,    33522128640.0,
    1323241920.0,        40840800.0,          960960.0,          16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

double induced_norm1(const Mat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Mat matrix_exponential(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw InvalidArgument("matrix_exponential: matrix must be square");
    }
    require_finite(m, "matrix_exponential");
    const Eigen::Index n = m.rows();
    if (n == 0) {
        return m;
    }
    const double norm = induced_norm1(m);
    int squarings = 0;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    }
    const Mat a = m / std::ldexp(1.0, squarings);
    const Mat ident = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;
    const auto& b = kPade13;
    const Mat u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                        b[3] * a2 + b[1] * ident;
    const Mat u = a * u_inner;
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                  b[2] * a2 + b[0] * ident;
    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) {
        r = r * r;
    }
    return r;
}

double entry_norm1(const Mat& m) { return m.cwiseAbs().sum(); }

double sigma_max(const Mat& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double skew_residual(const Mat& m) { return entry_norm1(m + m.transpose()); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("fit_line: need at least two paired points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw InvalidArgument("fit_line: degenerate abscissae");
    }
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw InvalidArgument("loglog_slope: non-positive value");
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly).slope;
}

}  // namespace lossless
