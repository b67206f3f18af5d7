#include "catch_amalgamated.hpp"

#include "lossless/approx_nonlinear.hpp"
#include "lossless/integrate.hpp"

#include <cmath>
#include <numbers>

using namespace lossless;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Trajectory sine(double freq, double dt, double horizon) {
    return Trajectory::sample([freq](double t) { return Vec::Constant(1, std::sin(2.0 * std::numbers::pi * freq * t)); },
                              dt, horizon);
}

}  // namespace

TEST_CASE("energy supply element stores exactly the work done on it", "[approx_nonlinear]") {
    const double e0 = 3.0;
    const Mat k{{1.5}};
    const Trajectory u = sine(1.0, 1e-4, 1.0);
    const auto r = simulate_energy_supply(k, e0, u);
    // Oracle: x_E^2 / 2 - E0 equals the running integral of y_E u.
    std::vector<double> power(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) power[i] = r.y[i].dot(u[i]);
    const auto work = cumulative_trapezoid(power, u.dt());
    for (std::size_t i : {std::size_t{0}, u.size() / 3, u.size() - 1})
        CHECK_THAT(0.5 * r.supply[i] * r.supply[i] - e0, WithinAbs(work[i], 1e-7));
}

TEST_CASE("energy supply error obeys the L2 and pointwise bounds", "[approx_nonlinear]") {
    const Mat k{{2.0}};
    const double e0 = 5.0;
    const Trajectory u = sine(2.0, 1e-3, 1.0);
    const auto r = simulate_energy_supply(k, e0, u);
    const auto pw = pointwise_supply_bound(k, u, e0);
    std::vector<double> e2(u.size()), u2(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double err = (r.y[i] - k * u[i]).norm();
        CHECK(err <= pw[i] + 1e-12);
        e2[i] = err * err;
        u2[i] = u[i].squaredNorm();
    }
    const double eps = theorem4_bound(k, 1.0, 1.0, e0);
    CHECK_THAT(eps, WithinRel(4.0 / 10.0, 1e-15));
    CHECK(std::sqrt(trapezoid(e2, u.dt())) <= eps * std::sqrt(trapezoid(u2, u.dt())));
}

TEST_CASE("wrapped system conserves energy and tracks the original", "[approx_nonlinear]") {
    const StateMap f = [](const Vec& x, const Vec& u) { return Vec((-x.array() * x.array().abs() + u(0)).matrix()); };
    const StateMap g = [](const Vec& x, const Vec&) { return x; };
    const InputFn u = [](double t) { return Vec::Constant(1, std::cos(3.0 * t)); };
    const auto ws = wrap_lossless(f, g, Vec::Constant(1, 0.2), 1e3);
    const auto r = simulate_wrapped(ws, u, 1e-3, 2.0);
    CHECK(r.balance_error < 1e-8);
    const double err_lo = wrapper_state_error(f, g, Vec::Constant(1, 0.2), 1e3, u, 1e-3, 2.0);
    const double err_hi = wrapper_state_error(f, g, Vec::Constant(1, 0.2), 1e5, u, 1e-3, 2.0);
    CHECK(err_hi < err_lo);
}

TEST_CASE("convergence order of an exact power law", "[approx_nonlinear]") {
    const auto rep = convergence_order({1e1, 1e2, 1e3, 1e4}, [](double e) { return 5.0 / e; });
    CHECK_THAT(rep.slope, WithinAbs(-1.0, 1e-12));
    CHECK(rep.excluded == 0);
    const auto floored = convergence_order({1e1, 1e2, 1e3, 1e4, 1e20}, [](double e) { return 1.0 / e; });
    CHECK(floored.excluded == 1);
    CHECK_THAT(floored.slope, WithinAbs(-1.0, 1e-12));
    CHECK_THROWS_AS(convergence_order({1.0, 10.0}, [](double e) { return 1.0 / e; }), InvalidArgument);
}
