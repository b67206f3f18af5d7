#include "lossless/integrate.hpp"

#include <cmath>
#include <sstream>

namespace lossless {

std::size_t step_count(double dt, double horizon) {
    if (!(dt > 0.0) || !(horizon >= 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("step_count: need dt > 0 and finite horizon >= 0");
    }
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
        std::ostringstream os;
        os << "step size " << dt << " does not divide horizon " << horizon;
        throw InvalidArgument(os.str());
    }
    return static_cast<std::size_t>(rounded);
}

Vec rk4_step(const VectorField& f, double t, const Vec& x, double dt) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const Vec k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const Vec k4 = f(t + dt, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate_ode(const VectorField& f, const Vec& x0, double dt, double horizon) {
    require_finite(x0, "integrate_ode: x0");
    const std::size_t steps = step_count(dt, horizon);
    std::vector<Vec> xs;
    xs.reserve(steps + 1);
    xs.push_back(x0);
    Vec x = x0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        x = rk4_step(f, t, x, dt);
        if (!x.allFinite()) {
            std::ostringstream os;
            os << "integrate_ode: state blew up at t=" << t + dt;
            throw NumericalFailure(os.str(), t + dt);
        }
        xs.push_back(x);
    }
    return Trajectory(dt, std::move(xs));
}

double trapezoid(const std::vector<double>& values, double dt) {
    if (values.size() < 2) {
        return 0.0;
    }
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        s += values[i];
    }
    return s * dt;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double dt) {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * dt * (values[i - 1] + values[i]);
    }
    return out;
}

double simpson(const std::vector<double>& v, double dt) {
    const std::size_t intervals = v.empty() ? 0 : v.size() - 1;
    if (intervals < 2) {
        return trapezoid(v, dt);
    }
    auto simpson_range = [&](std::size_t first, std::size_t last) {
        double s = v[first] + v[last];
        for (std::size_t i = first + 1; i < last; ++i) {
            s += ((i - first) % 2 == 1 ? 4.0 : 2.0) * v[i];
        }
        return s * dt / 3.0;
    };
    if (intervals % 2 == 0) {
        return simpson_range(0, intervals);
    }
    if (intervals == 3) {
        return 3.0 * dt / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
    }
    const std::size_t n = intervals;
    return simpson_range(0, n - 3) +
           3.0 * dt / 8.0 * (v[n - 3] + 3.0 * v[n - 2] + 3.0 * v[n - 1] + v[n]);
}

}  // namespace lossless
