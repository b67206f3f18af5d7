#include "catch_amalgamated.hpp"

#include "lossless/approx_nonlinear.hpp"
#include "lossless/stats.hpp"
#include "lossless/thermal.hpp"

#include <cmath>

using namespace lossless;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LosslessLinear oscillator() { return LosslessLinear(Mat{{0.0, -1.0}, {1.0, 0.0}}, Mat{{1.0}, {0.0}}, Mat::Zero(1, 1)); }

}  // namespace

TEST_CASE("fluctuation covariance of an oscillator", "[thermal]") {
    const auto sys = oscillator();
    CHECK_THAT(analytic_fluctuation_covariance(sys, 2.0, 1.3, 0.4)(0, 0), WithinAbs(2.0 * std::cos(0.9), 1e-13));
    CHECK_THAT(analytic_fluctuation_covariance(sys, 2.0, 0.4, 1.3)(0, 0), WithinAbs(2.0 * std::cos(0.9), 1e-13));
    CHECK_THAT(analytic_fluctuation_covariance(sys, 1.0, 1.0, 0.0, kBoltzmannSI)(0, 0),
               WithinRel(kBoltzmannSI * std::cos(1.0), 1e-12));
    CHECK_THROWS_AS(analytic_fluctuation_covariance(sys, -1.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("Gibbs draws are reproducible and have covariance k_B T I", "[thermal]") {
    const ThermalEnsemble ens{1.5, 1.0, 3, Vec(), 21};
    CHECK(ens.draw(17) == ens.draw(17));
    const auto xs = sample_gibbs(ens, 40000, 2);
    CHECK(xs[17] == ens.draw(17));
    const Mat c = covariance_about(xs, Vec::Zero(3));
    CHECK((c - 1.5 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
    std::vector<double> u;
    for (const auto& x : xs) u.push_back(internal_energy(x, Vec::Zero(3)));
    CHECK_THAT(mean(u), WithinAbs(2.25, 4.0 * standard_error(u)));
}

TEST_CASE("empirical FDT check on an oscillator", "[thermal]") {
    const auto rep = empirical_fdt_check(oscillator(), 1.0, 20000, 0.2, 15, 3);
    CHECK(rep.lags.size() == 15);
    CHECK_THAT(rep.analytic[5](0, 0), WithinAbs(std::cos(1.0), 1e-13));
    CHECK(rep.max_z < 5.0);
    CHECK(rep.max_stationarity_z < 5.0);
}

TEST_CASE("Langevin model validation", "[thermal]") {
    CHECK_THROWS_AS(LangevinModel::make(Mat{{1.0}}, Mat{{1.0}}, Mat{{1.0}}, 1.0), InvalidArgument);
    CHECK_THROWS_AS(LangevinModel::make(Mat{{0.0}}, Mat{{-1.0}}, Mat{{1.0}}, 1.0), InvalidArgument);
    const auto m = LangevinModel::make(Mat{{0.0}}, Mat{{4.0}}, Mat{{1.0}}, 1.0);
    CHECK_THAT(m.l(0, 0) * m.l(0, 0), WithinRel(4.0, 1e-14));
}

TEST_CASE("Ornstein-Uhlenbeck path settles at k_B T", "[thermal]") {
    const auto m = LangevinModel::make(Mat{{0.0}}, Mat{{1.0}}, Mat{{1.0}}, 2.0);
    const InputFn zero = [](double) { return Vec::Zero(1); };
    const auto x = simulate_langevin(m, zero, Vec::Zero(1), 0.01, 2000.0, 5);
    std::vector<double> sq;
    for (std::size_t i = 1000; i < x.size(); ++i) sq.push_back(x[i](0) * x[i](0));
    CHECK_THAT(mean(sq), WithinRel(2.0, 0.1));
}

TEST_CASE("band-limited white noise", "[thermal]") {
    const Mat ks{{2.0}};
    CHECK_THAT(johnson_nyquist_intensity(ks, 3.0)(0, 0), WithinRel(12.0, 1e-15));
    const auto n = sample_white_noise(ks, 3.0, 0.1, 50000, 4);
    const Mat c = covariance_about(n.values(), Vec::Zero(1));
    CHECK_THAT(c(0, 0), WithinRel(120.0, 0.03));
    CHECK_THROWS_AS(johnson_nyquist_intensity(Mat{{-1.0}}, 1.0), InvalidArgument);
}

TEST_CASE("thermal split of the energy-supply element", "[thermal]") {
    const double k = 1.3, e0 = 4.0, dx0 = 0.2;
    const Trajectory u =
        Trajectory::sample([](double t) { return Vec::Constant(1, std::sin(5.0 * t) + 0.3); }, 1e-3, 1.0);
    const auto split = nonlinear_thermal_decompose(k, e0, u, dx0);
    const auto direct = simulate_energy_supply(Mat{{k}}, e0, u, dx0);
    for (std::size_t i : {std::size_t{10}, std::size_t{500}, u.size() - 1}) {
        const double rebuilt = k * u[i](0) + split.stochastic[i] + split.deterministic[i];
        CHECK_THAT(rebuilt, WithinAbs(direct.y[i](0), 1e-12));
    }
    CHECK_THAT(nonlinear_thermal_variance(k, e0, 2.0, 0.5), WithinRel(k * k * 2.0 * 0.25 / 8.0, 1e-15));
}
