#include "catch_amalgamated.hpp"

#include "lossless/approx_linear.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"

#include <cmath>
#include <numbers>

using namespace lossless;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Mat test_kernel(double t) { return Mat{{std::exp(-t), 0.3 * std::sin(t)}, {0.1 * t, std::cos(2.0 * t)}}; }

// Naive trapezoid sums, independent of the FFT path.
Mat naive_coefficient(const MatrixTrajectory& g, int k, bool cosine) {
    const double tau = g.horizon();
    const std::size_t m = g.size() - 1;
    Mat acc = Mat::Zero(g.rows(), g.cols());
    for (std::size_t i = 0; i <= m; ++i) {
        const double t = g.time(i);
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        const Mat part = cosine ? Mat(g[i] + g[i].transpose()) : Mat(g[i] - g[i].transpose());
        const double basis = cosine ? std::cos(k * kPi * t / tau) : std::sin(k * kPi * t / tau);
        acc += w * basis * part;
    }
    return acc * g.dt() / tau;
}

}  // namespace

TEST_CASE("symmetric split and PSD factor", "[approx_linear]") {
    const Mat k{{2.0, 1.0}, {-1.0, 1.0}};
    const auto s = split_symmetric(k);
    CHECK((s.symmetric + s.antisymmetric - k).norm() == 0.0);
    const Mat f = factor_psd(s.symmetric);
    CHECK((f.transpose() * f - s.symmetric).norm() < 1e-14);
    // Rank-deficient: one row.
    const Mat f1 = factor_psd(Mat{{1.0, 1.0}, {1.0, 1.0}});
    CHECK(f1.rows() == 1);
    CHECK_THROWS_AS(factor_psd(Mat{{1.0, 0.0}, {0.0, -0.5}}), InvalidArgument);
}

TEST_CASE("harmonic approximation of a memoryless map", "[approx_linear]") {
    const Mat k{{1.0, 0.5}, {-0.5, 2.0}};
    const double tau = 1.5;
    const int n = 6;
    const auto h = memoryless_lossless_approx(k, tau, n);
    CHECK(h.realization.states() == (2 * n - 1) * h.k.rank);
    CHECK(skew_residual(h.realization.J()) == 0.0);
    CHECK((h.realization.D() - Mat{{0.0, 0.5}, {-0.5, 0.0}}).norm() == 0.0);
    const Mat ks = Mat{{1.0, 0.0}, {0.0, 2.0}};
    for (double t : {0.0, 0.2, 1.1}) {
        Mat expected = ks / tau;
        for (int l = 1; l < n; ++l) expected += 2.0 * ks / tau * std::cos(l * kPi * t / tau);
        CHECK((h.kernel_at(t) - expected).norm() < 1e-12);
        CHECK((impulse_response_at(h.realization, t) - expected).norm() < 1e-11);
    }
    CHECK_THROWS_AS(memoryless_lossless_approx(Mat{{-1.0}}, 1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(memoryless_lossless_approx(Mat{{1.0}}, 1.0, 1), InvalidArgument);
}

TEST_CASE("error bound rejects inputs that start away from zero", "[approx_linear]") {
    const Trajectory u = Trajectory::sample([](double) { return Vec::Ones(1); }, 0.01, 1.0);
    CHECK_THROWS_AS(memoryless_error_bound(Mat{{1.0}}, 1.0, 4, u), InvalidArgument);
}

TEST_CASE("Fourier coefficients match the naive trapezoid sums", "[approx_linear]") {
    const double tau = 2.0;
    const std::size_t m = 64;
    std::vector<Mat> samples;
    for (std::size_t i = 0; i <= m; ++i) samples.push_back(test_kernel(tau * static_cast<double>(i) / m));
    const MatrixTrajectory g(tau / m, samples);
    const auto c = fourier_coefficients(g, 9);
    REQUIRE(c.cos.size() == 9);
    CHECK(c.sin[0].norm() == 0.0);
    for (int k = 0; k < 9; ++k) {
        CHECK((c.cos[k] - naive_coefficient(g, k, true)).cwiseAbs().maxCoeff() < 1e-13);
        CHECK((c.sin[k] - naive_coefficient(g, k, false)).cwiseAbs().maxCoeff() < 1e-13);
    }
    CHECK_THROWS_AS(fourier_coefficients(g, 65), InvalidArgument);
}

TEST_CASE("realized harmonic blocks reproduce their targets", "[approx_linear]") {
    CounterRng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        CMat w(2, 2);
        for (Eigen::Index i = 0; i < 4; ++i) w(i) = {rng.normal(), rng.normal()};
        const CMat r = w.adjoint() * w;
        const double omega = 1.0 + trial;
        const auto block = realize_harmonic(r, omega);
        const LosslessLinear sys = block.system();
        CHECK(skew_residual(sys.J()) == 0.0);
        for (double t : {0.0, 0.4, 3.3}) {
            const Mat expected = (std::cos(omega * t) * r.real() - std::sin(omega * t) * r.imag());
            CHECK((impulse_response_at(sys, t) - expected).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("realized harmonic rejects residues that are not PSD", "[approx_linear]") {
    CMat r(1, 1);
    r(0, 0) = -1.0;
    CHECK_THROWS_AS(realize_harmonic(r, 1.0), InvalidArgument);
}

TEST_CASE("tau selection with an exponential tail", "[approx_linear]") {
    const TailFn tail = [](double tau) { return std::exp(-tau); };
    const auto sel = select_tau(tail, 0.1, 1.0, 2.0, 1);
    CHECK_THAT(sel.target, WithinRel(0.01 / 4.0, 1e-15));
    CHECK_THAT(sel.tau, WithinRel(-std::log(0.0025), 1e-12));
    CHECK(sel.delta <= sel.target);
    // Already short enough at tau0.
    CHECK(select_tau(tail, 0.1, 10.0, 2.0, 1).tau == 10.0);
}

TEST_CASE("dissipative pipeline on a fast exponential", "[approx_linear]") {
    const KernelFn g = [](double t) { return Mat::Constant(1, 1, 2.0 * std::exp(-4.0 * t)); };
    DissipativeApproxOptions opts;
    opts.tail = [](double tau) { return 0.5 * std::exp(-4.0 * tau); };
    opts.window_samples = 1 << 14;
    opts.quadrature_intervals = 1 << 15;
    const auto a = dissipative_lossless_approx(g, 0.3, 2.0, opts);
    CHECK(skew_residual(a.realization.J()) == 0.0);
    CHECK(a.min_residue_eigenvalue >= -1e-10);
    CHECK(a.l2_error <= 0.3);
    CHECK(a.realization.states() == 2 * a.order - 1);
    CHECK(a.signature.has_value());
    // Parseval against a direct quadrature of the synthesized kernel.
    const auto samples = a.sample_kernel(1 << 14);
    std::vector<double> sq;
    for (const auto& s : samples.values()) sq.push_back(s.squaredNorm());
    double direct = 0.0;
    for (std::size_t i = 0; i + 1 < sq.size(); ++i) direct += 0.5 * (sq[i] + sq[i + 1]) * samples.dt();
    CHECK_THAT(a.parseval_energy(), WithinRel(direct, 1e-6));
    // Synthesis by FFT against the direct sum.
    for (double t : {0.0, 0.37, 1.9}) {
        const std::size_t i = static_cast<std::size_t>(std::lround(t / samples.dt()));
        CHECK_THAT(samples[i](0, 0), WithinAbs(a.kernel_at(samples.time(i))(0, 0), 1e-9));
    }
}

TEST_CASE("dissipative pipeline refusals", "[approx_linear]") {
    const KernelFn active = [](double t) { return Mat::Constant(1, 1, -std::exp(-t)); };
    CHECK_THROWS_AS(dissipative_lossless_approx(active, 0.1, 5.0), InvalidArgument);
    DissipativeApproxOptions opts;
    opts.tail = [](double tau) { return std::exp(-tau); };
    opts.max_states = 100;
    const KernelFn g = [](double t) { return Mat::Constant(1, 1, std::exp(-t)); };
    CHECK_THROWS_AS(dissipative_lossless_approx(g, 0.1, 5.0, opts), InvalidArgument);
}
