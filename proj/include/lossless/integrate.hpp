#pragma once

#include "lossless/types.hpp"

namespace lossless {

/// dx/dt = f(t, x)
using VectorField = std::function<Vec(double, const Vec&)>;

/// Classical fixed-step RK4 on [0, horizon]. The returned trajectory has
/// one sample per step (horizon/dt rounded to an integer step count).
/// Throws NumericalFailure with the time stamp if the state leaves the finite range.
[[nodiscard]] Trajectory integrate_ode(const VectorField& f, const Vec& x0, double dt, double horizon);

/// One RK4 step from (t, x).
[[nodiscard]] Vec rk4_step(const VectorField& f, double t, const Vec& x, double dt);

/// Number of steps for a horizon, rejecting horizons that are not a multiple of dt.
[[nodiscard]] std::size_t step_count(double dt, double horizon);

/// Trapezoid integral of uniformly sampled values.
[[nodiscard]] double trapezoid(const std::vector<double>& values, double dt);
/// Running trapezoid integral, out[0] = 0.
[[nodiscard]] std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double dt);
/// Composite Simpson when the interval count is even, Simpson + 3/8 tail otherwise.
[[nodiscard]] double simpson(const std::vector<double>& values, double dt);

}  // namespace lossless
