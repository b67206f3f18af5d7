#pragma once

#include "lossless/types.hpp"

#include <functional>

namespace lossless {

struct EnergySupplyResult {
    Trajectory y;                 // y_E
    std::vector<double> supply;   // x_E
};

/// Closed-form response of the energy-supply construction for y = k u.
///
/// With s(t) = int_0^t u^T k u (running trapezoid) and a = sqrt(2 E0):
/// x_E = a + offset + s / a,  y_E = (x_E / a) k u.
/// `offset` perturbs the initial supply state (thermal case).
[[nodiscard]] EnergySupplyResult simulate_energy_supply(const Mat& k, double e0, const Trajectory& u,
                                                        double offset = 0.0);

/// eps = sigma(k)^2 ubar^2 sqrt(tau) / (2 E0); bounds ||y_E - y||_L2 by eps ||u||_L2 on [0, tau].
[[nodiscard]] double theorem4_bound(const Mat& k, double ubar, double tau, double e0);

/// Pointwise bound sigma(k)^2 |u(t)| int_0^t |u|^2 / (2 E0) on |y_E(t) - k u(t)|.
[[nodiscard]] std::vector<double> pointwise_supply_bound(const Mat& k, const Trajectory& u, double e0);

/// x' = f(x, u), y = g(x, u)
using StateMap = std::function<Vec(const Vec&, const Vec&)>;

/// Lossless wrapper of an arbitrary system with an energy-supply state.
struct WrappedSystem {
    StateMap f;
    StateMap g;
    Vec x0;
    double e0 = 0.0;
};

[[nodiscard]] WrappedSystem wrap_lossless(StateMap f, StateMap g, Vec x0, double e0);

struct WrappedResult {
    Trajectory x_hat;
    std::vector<double> supply;  // x_E
    Trajectory y;                // y_E
    std::vector<double> energy;  // |x_hat|^2 / 2 + x_E^2 / 2
    double balance_error = 0.0;  // |E(T) - E(0) - int y_E^T u|, Simpson
};

/// RK4 on the augmented state (x_hat, x_E), x_E(0) = sqrt(2 E0).
[[nodiscard]] WrappedResult simulate_wrapped(const WrappedSystem& ws, const InputFn& u, double dt, double horizon);

struct PlainResult {
    Trajectory x;
    Trajectory y;
};

/// RK4 of the unwrapped system, the reference for the wrapper.
[[nodiscard]] PlainResult simulate_plain(const StateMap& f, const StateMap& g, const Vec& x0, const InputFn& u,
                                         double dt, double horizon);

struct ConvergenceReport {
    std::vector<double> energies;
    std::vector<double> errors;
    std::vector<bool> used;   // false where the error sits at or below the floor
    std::size_t excluded = 0;
    double slope = 0.0;       // least squares, log(error) against log(E0)
};

/// Fits the decay of error(E0) over a grid spanning at least three decades.
/// Errors at or below `floor` are excluded from the fit and counted.
[[nodiscard]] ConvergenceReport convergence_order(const std::vector<double>& energies,
                                                  const std::function<double(double)>& error_at,
                                                  double floor = 1e-12);

/// max_t |x(t) - x_hat(t)| between the wrapper and the unwrapped reference.
[[nodiscard]] double wrapper_state_error(const StateMap& f, const StateMap& g, const Vec& x0, double e0,
                                         const InputFn& u, double dt, double horizon);

}  // namespace lossless
