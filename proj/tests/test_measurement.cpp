#include "catch_amalgamated.hpp"

#include "lossless/linalg.hpp"
#include "lossless/measurement.hpp"

#include <cmath>

using namespace lossless;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Device device(DeviceVariant v, double k_m = 1.0, double t_m = 1.0, double e_m = 100.0) {
    Device d;
    d.variant = v;
    d.k_m = k_m;
    d.t_m = t_m;
    d.e_m = e_m;
    return d;
}

MeasurementOptions small(std::size_t trials = 400) {
    MeasurementOptions o;
    o.trials = trials;
    o.steps = 200;
    o.seed = 3;
    return o;
}

}  // namespace

TEST_CASE("LC fixture", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    CHECK(s.capacitance() == 1.0);
    CHECK(s.y0() == 1.0);
    CHECK((s.free_state(0.0) - s.x0).norm() < 1e-15);
}

TEST_CASE("device validation", "[measurement]") {
    CHECK_THROWS_AS(device(DeviceVariant::M1, -1.0).validate(), InvalidArgument);
    CHECK_THROWS_AS(device(DeviceVariant::M2hat, 1.0, 1.0, 0.0).validate(), InvalidArgument);
    CHECK(device_variant_from_string("M2hat") == DeviceVariant::M2hat);
    CHECK(to_string(DeviceVariant::M1hat) == "M1hat");
    CHECK_THROWS_AS(device_variant_from_string("M3"), InvalidArgument);
}

TEST_CASE("ideal meter leaves the system untouched", "[measurement]") {
    const auto out = simulate_device(MeasuredSystem::lc_fixture(), device(DeviceVariant::M2), 0.01, small());
    CHECK(out.trials == 1);
    CHECK(out.b_det.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.b_mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conductance back action to first order", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    const double t = 1e-4;
    const auto out = simulate_device(s, device(DeviceVariant::M1, 2.0), t, small());
    // b ~ -k_m y0 t B
    CHECK_THAT(out.b_det(0), WithinRel(-2.0 * t, 1e-3));
}

TEST_CASE("noisy conductance: mean back action matches the noise-free one", "[measurement]") {
    const auto out =
        simulate_device(MeasuredSystem::lc_fixture(), device(DeviceVariant::M1hat), 0.01, small(4000));
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(std::abs(out.b_mean(i) - out.b_det(i)) <= 5.0 * out.b_mean_se(i) + 1e-15);
    // P ~ 2 k_m k_B T t B B^T to leading order.
    CHECK_THAT(out.p(0, 0), WithinRel(0.02, 0.1));
    CHECK(out.max_correction_residual < 1e-9);
}

TEST_CASE("generic Riccati solution against a closed form", "[measurement]") {
    // A = 0, b = 1, V = 1: Y(t) = c t, so X(t) = 1 / (c t).
    const auto sol = riccati_solve(Mat::Zero(1, 1), Vec::Ones(1), 0.5, Mat::Ones(1, 1), {0.1, 1.0, 10.0});
    CHECK_THAT(sol.m_star[0], WithinRel(20.0, 1e-10));
    CHECK_THAT(sol.m_star[2], WithinRel(0.2, 1e-10));
    CHECK_THROWS_AS(riccati_solve(Mat::Zero(1, 1), Vec::Ones(1), 0.5, Mat::Ones(1, 1), {1.0, 0.5}),
                    InvalidArgument);
}

TEST_CASE("device Riccati small-time law", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    for (double k_m : {0.5, 2.0}) {
        const auto sol = riccati_solve(s, device(DeviceVariant::M1hat, k_m, 1.5), {1e-4});
        CHECK_THAT(1e-4 * sol.m_star[0], WithinRel(2.0 * 1.5 / k_m, 1e-3));
    }
    const auto none = riccati_solve(s, device(DeviceVariant::M1), {1e-3});
    CHECK(none.m_star[0] == 0.0);
}

TEST_CASE("Kalman estimate reproduces the filter variance", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    const auto d = device(DeviceVariant::M1hat);
    const auto out = simulate_device(s, d, 0.01, small(4000));
    CHECK_THAT(out.est_var, WithinRel(out.filter_var, 0.1));
    CHECK_THAT(out.filter_var, WithinRel(out.m_star, 0.05));
    const auto k = kalman_estimate(s, d, out.y_m);
    CHECK(k.estimate.size() == out.y_m.size());
}

TEST_CASE("trade-off product near its floor", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    const auto tr = tradeoff_product(s, device(DeviceVariant::M1hat), 1e-3, small(2000));
    CHECK(tr.rhs == 2.0);
    CHECK(tr.ratio > 0.9);
    CHECK(tr.ratio < 1.5);
    CHECK_THROWS_AS(tradeoff_product(s, device(DeviceVariant::M1), 1e-3, small()), InvalidArgument);
}

TEST_CASE("M2hat deterministic back action is second order", "[measurement]") {
    const auto s = MeasuredSystem::lc_fixture();
    const double k_m = 2.0, e_m = 10.0;
    const double b1 = m2hat_deterministic_back_action(s, k_m, e_m, 1e-3)(0);
    const double b2 = m2hat_deterministic_back_action(s, k_m, e_m, 2e-3)(0);
    CHECK_THAT(std::log(b2 / b1) / std::log(2.0), WithinAbs(2.0, 0.01));
}
