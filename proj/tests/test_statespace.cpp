#include "catch_amalgamated.hpp"

#include "lossless/statespace.hpp"

#include <cmath>
#include <numbers>

using namespace lossless;
using Catch::Matchers::WithinAbs;

namespace {

Mat ladder() { return Mat{{0.0, -1.0, 0.0}, {1.0, 0.0, -1.0}, {0.0, 1.0, 0.0}}; }
Mat port() { return Mat{{1.0}, {0.0}, {0.0}}; }

LinearStateSpace first_order(double c) {
    return LinearStateSpace(Mat::Constant(1, 1, -1.0), Mat::Ones(1, 1), Mat::Constant(1, 1, c), Mat::Zero(1, 1));
}

}  // namespace

TEST_CASE("lossless model rejects a non-skew J", "[statespace]") {
    CHECK_THROWS_AS(LosslessLinear(Mat{{0.0, 1.0}, {1.0, 0.0}}, Mat::Ones(2, 1), Mat::Zero(1, 1)), InvalidArgument);
    CHECK_THROWS_AS(LosslessLinear(ladder(), Mat::Ones(2, 1), Mat::Zero(1, 1)), InvalidArgument);
}

TEST_CASE("LC ladder passes the lossless check", "[statespace]") {
    const LosslessLinear lc(ladder(), port(), Mat::Zero(1, 1));
    const auto v = check_lossless(lc, 3, 42);
    CHECK(v.skew_residual == 0.0);
    CHECK(v.max_energy_balance_error < 1e-6);
    CHECK(v.lossless);
}

TEST_CASE("a damped candidate fails the lossless check", "[statespace]") {
    const auto damped = LosslessLinear::candidate(Mat{{-0.1, -1.0}, {1.0, 0.0}}, Mat{{1.0}, {0.0}}, Mat::Zero(1, 1));
    const auto v = check_lossless(damped, 2, 1);
    CHECK_FALSE(v.lossless);
    CHECK(v.skew_residual > 0.0);
}

TEST_CASE("oscillator impulse response is cos t", "[statespace]") {
    const LosslessLinear osc(Mat{{0.0, -1.0}, {1.0, 0.0}}, Mat{{1.0}, {0.0}}, Mat::Zero(1, 1));
    for (double t : {0.0, 0.3, 1.7, 12.0})
        CHECK_THAT(impulse_response_at(osc, t)(0, 0), WithinAbs(std::cos(t), 1e-13));
    const auto g = impulse_response(osc, 0.1, 50);
    CHECK_THAT(g[49](0, 0), WithinAbs(std::cos(4.9), 1e-13));
}

TEST_CASE("step response of a first-order lag", "[statespace]") {
    const InputFn one = [](double) { return Vec::Ones(1); };
    const auto r = simulate_linear(first_order(1.0), one, Vec::Zero(1), 1e-3, 2.0);
    CHECK_THAT(r.y[r.y.size() - 1](0), WithinAbs(1.0 - std::exp(-2.0), 1e-10));
}

TEST_CASE("energy ledger balances for a driven LC ladder", "[statespace]") {
    const LosslessLinear lc(ladder(), port(), Mat::Zero(1, 1));
    const InputFn u = [](double t) { return Vec::Constant(1, std::sin(3.0 * t)); };
    const auto r = simulate_linear(lc, u, Vec::Zero(3), 1e-3, 5.0);
    const auto ledger = energy_ledger(r.x, Trajectory::sample(u, 1e-3, 5.0), r.y);
    CHECK(ledger.balance_error() < 1e-9);
}

TEST_CASE("positive-real test", "[statespace]") {
    const auto grid = log_frequency_grid(1e-3, 1e3, 200);
    CHECK(check_dissipative(first_order(1.0), grid).dissipative);
    CHECK_FALSE(check_dissipative(first_order(-1.0), grid).dissipative);
    const LosslessLinear lc(ladder(), port(), Mat::Zero(1, 1));
    CHECK(check_dissipative(lc, grid).dissipative);
}

TEST_CASE("positive-real test on sampled kernels", "[statespace]") {
    const auto grid = log_frequency_grid(1e-2, 1e2, 100);
    std::vector<Mat> good, bad;
    for (int i = 0; i <= 4000; ++i) {
        const double t = i * 5e-3;
        good.push_back(Mat::Constant(1, 1, std::exp(-t)));
        bad.push_back(Mat::Constant(1, 1, -std::exp(-t)));
    }
    CHECK(check_dissipative(MatrixTrajectory(5e-3, good), grid).dissipative);
    CHECK_FALSE(check_dissipative(MatrixTrajectory(5e-3, bad), grid).dissipative);
}

TEST_CASE("reciprocity of sampled kernels", "[statespace]") {
    std::vector<Mat> sym, asym;
    for (int i = 0; i < 100; ++i) {
        const double t = i * 0.01;
        sym.push_back(Mat{{std::exp(-t), t}, {t, 1.0}});
        asym.push_back(Mat{{std::exp(-t), t}, {0.0, 1.0}});
    }
    CHECK(check_reciprocal(MatrixTrajectory(0.01, sym), SignatureMatrix::identity(2)).reciprocal);
    CHECK_FALSE(check_reciprocal(MatrixTrajectory(0.01, asym), SignatureMatrix::identity(2)).reciprocal);
}

TEST_CASE("time reversal separates the LC ladder from a non-normal lag", "[statespace]") {
    const double horizon = 2.0;
    const InputFn pulse = [horizon](double t) {
        const double s = std::sin(std::numbers::pi * t / horizon);
        return Vec::Constant(1, s * s);
    };
    const LosslessLinear lc(ladder(), port(), Mat::Zero(1, 1));
    const auto good = check_time_reversible(lc, SignatureMatrix::identity(1), pulse, 1e-3, horizon, 1e-6);
    CHECK(good.reversible);
    CHECK(good.structural_match);
    CHECK(good.state_signature == std::vector<int>{1, -1, 1});

    const LinearStateSpace lag(Mat{{-1.0, 1.0}, {0.0, -1.0}}, Mat::Identity(2, 2), Mat::Identity(2, 2),
                               Mat::Zero(2, 2));
    const InputFn pulse2 = [&](double t) { return Vec::Constant(2, pulse(t)(0)); };
    const auto bad = check_time_reversible(lag, SignatureMatrix::identity(2), pulse2, 1e-3, horizon, 1e-6);
    CHECK_FALSE(bad.reversible);
    CHECK(bad.residual > 1e-2);
}
