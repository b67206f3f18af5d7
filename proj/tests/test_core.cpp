#include "catch_amalgamated.hpp"

#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"
#include "lossless/stats.hpp"
#include "lossless/types.hpp"

#include <cmath>

using namespace lossless;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("matrix exponential of a rotation generator is a rotation", "[core]") {
    const double t = 2.7;
    const Mat e = matrix_exponential(Mat{{0.0, -t}, {t, 0.0}});
    CHECK_THAT(e(0, 0), WithinAbs(std::cos(t), 1e-14));
    CHECK_THAT(e(1, 0), WithinAbs(std::sin(t), 1e-14));
    CHECK_THAT(e(0, 1), WithinAbs(-std::sin(t), 1e-14));
}

TEST_CASE("matrix exponential of a Jordan block", "[core]") {
    // exp([[a, 1], [0, a]]) = e^a [[1, 1], [0, 1]]
    const Mat e = matrix_exponential(Mat{{-0.5, 1.0}, {0.0, -0.5}});
    CHECK_THAT(e(0, 1), WithinRel(std::exp(-0.5), 1e-13));
    CHECK_THAT(e(0, 0), WithinRel(std::exp(-0.5), 1e-13));
    CHECK_THAT(e(1, 0), WithinAbs(0.0, 1e-15));
}

TEST_CASE("skew residual and norms", "[core]") {
    const Mat j{{0.0, -2.0}, {2.0, 0.0}};
    CHECK(skew_residual(j) == 0.0);
    CHECK(skew_residual(Mat{{1.0, 0.0}, {0.0, 0.0}}) > 0.0);
    CHECK_THAT(sigma_max(Mat{{3.0, 0.0}, {0.0, -4.0}}), WithinRel(4.0, 1e-14));
    CHECK_THAT(entry_norm1(Mat{{1.0, -2.0}, {0.5, 0.0}}), WithinRel(3.5, 1e-15));
}

TEST_CASE("line fits recover exact power laws", "[core]") {
    const std::vector<double> x{1.0, 10.0, 100.0, 1000.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -1.5));
    CHECK_THAT(loglog_slope(x, y), WithinAbs(-1.5, 1e-12));
    const auto fit = fit_line({0.0, 1.0, 2.0}, {1.0, 3.0, 5.0});
    CHECK_THAT(fit.slope, WithinAbs(2.0, 1e-14));
    CHECK_THAT(fit.intercept, WithinAbs(1.0, 1e-14));
}

TEST_CASE("quadrature rules", "[core]") {
    // Simpson is exact on cubics, also with an odd interval count (3/8 tail).
    for (std::size_t intervals : {6u, 7u}) {
        const double dt = 1.0 / static_cast<double>(intervals);
        std::vector<double> v;
        for (std::size_t i = 0; i <= intervals; ++i) {
            const double t = static_cast<double>(i) * dt;
            v.push_back(t * t * t - t + 2.0);
        }
        CHECK_THAT(simpson(v, dt), WithinAbs(0.25 - 0.5 + 2.0, 1e-13));
    }
    const std::vector<double> lin{0.0, 1.0, 2.0, 3.0};
    CHECK_THAT(trapezoid(lin, 0.5), WithinAbs(2.25, 1e-15));
    const auto cum = cumulative_trapezoid(lin, 0.5);
    CHECK(cum.front() == 0.0);
    CHECK_THAT(cum.back(), WithinAbs(2.25, 1e-15));
}

TEST_CASE("step count rejects horizons that are not a multiple of dt", "[core]") {
    CHECK(step_count(0.1, 1.0) == 10);
    CHECK_THROWS_AS(step_count(0.3, 1.0), InvalidArgument);
    CHECK_THROWS_AS(step_count(-0.1, 1.0), InvalidArgument);
}

TEST_CASE("RK4 matches the exponential solution", "[core]") {
    const VectorField f = [](double, const Vec& x) { return Vec(-x); };
    const Trajectory tr = integrate_ode(f, Vec::Ones(1), 1e-2, 1.0);
    CHECK_THAT(tr[tr.size() - 1](0), WithinRel(std::exp(-1.0), 1e-9));
}

TEST_CASE("trajectory interpolation", "[core]") {
    const Trajectory tr(0.5, {Vec::Constant(1, 0.0), Vec::Constant(1, 1.0), Vec::Constant(1, 4.0)});
    CHECK_THAT(tr.at(0.25)(0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(tr.at(0.75)(0), WithinAbs(2.5, 1e-15));
    CHECK(tr.horizon() == 1.0);
}

TEST_CASE("counter RNG streams are reproducible and distinct", "[core]") {
    CounterRng a(derive_seed(1, 4)), b(derive_seed(1, 4)), c(derive_seed(1, 5));
    for (int i = 0; i < 10; ++i) {
        const double x = a.normal();
        CHECK(x == b.normal());
        CHECK(x != c.normal());
    }
}

TEST_CASE("normal variates have unit variance", "[core]") {
    CounterRng rng(7);
    std::vector<double> v(200000);
    for (auto& x : v) x = rng.normal();
    CHECK_THAT(mean(v), WithinAbs(0.0, 5.0 / std::sqrt(2e5)));
    CHECK_THAT(variance(v), WithinAbs(1.0, 5.0 * std::sqrt(2.0 / 2e5)));
}

TEST_CASE("moment sums do not depend on the thread count", "[core]") {
    const auto fn = [](std::size_t trial, std::vector<double>& out) {
        CounterRng rng(derive_seed(9, trial));
        out[0] = rng.normal();
        out[1] = out[0] * out[0] + 1e-3 * rng.uniform();
    };
    const auto one = accumulate_moments(1001, 2, 1, fn);
    const auto four = accumulate_moments(1001, 2, 4, fn);
    CHECK(one.sum == four.sum);
    CHECK(one.sum_sq == four.sum_sq);
    CHECK(one.count == 1001);
}

TEST_CASE("covariance of a fixed sample", "[core]") {
    const std::vector<Vec> s{Vec::Constant(1, 1.0), Vec::Constant(1, 3.0)};
    CHECK_THAT(covariance(s)(0, 0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(mean(s)(0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(standard_error(std::vector<double>{1.0, 3.0}), WithinAbs(1.0, 1e-15));
}
