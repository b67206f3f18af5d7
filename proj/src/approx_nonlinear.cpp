#include "lossless/approx_nonlinear.hpp"

#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace lossless {

EnergySupplyResult simulate_energy_supply(const Mat& k, double e0, const Trajectory& u, double offset) {
    if (!(e0 > 0.0)) {
        throw InvalidArgument("simulate_energy_supply: E0 must be positive");
    }
    if (k.rows() != k.cols() || k.rows() != u.dim()) {
        throw InvalidArgument("simulate_energy_supply: k must be p x p with p the input dimension");
    }
    const double a = std::sqrt(2.0 * e0);
    std::vector<double> quad(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        quad[i] = u[i].dot(k * u[i]);
    }
    const auto s = cumulative_trapezoid(quad, u.dt());
    EnergySupplyResult r;
    r.supply.resize(u.size());
    std::vector<Vec> y(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        r.supply[i] = a + offset + s[i] / a;
        y[i] = (r.supply[i] / a) * (k * u[i]);
    }
    r.y = Trajectory(u.dt(), std::move(y));
    return r;
}

double theorem4_bound(const Mat& k, double ubar, double tau, double e0) {
    if (!(ubar > 0.0) || !(tau > 0.0) || !(e0 > 0.0)) {
        throw InvalidArgument("theorem4_bound: arguments must be positive");
    }
    const double s = sigma_max(k);
    return s * s * ubar * ubar * std::sqrt(tau) / (2.0 * e0);
}

std::vector<double> pointwise_supply_bound(const Mat& k, const Trajectory& u, double e0) {
    if (!(e0 > 0.0)) {
        throw InvalidArgument("pointwise_supply_bound: E0 must be positive");
    }
    const double s = sigma_max(k);
    std::vector<double> sq(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        sq[i] = u[i].squaredNorm();
    }
    const auto acc = cumulative_trapezoid(sq, u.dt());
    std::vector<double> b(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        b[i] = s * s * u[i].norm() * acc[i] / (2.0 * e0);
    }
    return b;
}

WrappedSystem wrap_lossless(StateMap f, StateMap g, Vec x0, double e0) {
    if (!(e0 > 0.0)) {
        throw InvalidArgument("wrap_lossless: E0 must be positive");
    }
    if (!f || !g) {
        throw InvalidArgument("wrap_lossless: state and output maps are required");
    }
    require_finite(x0, "wrap_lossless: x0");
    return {std::move(f), std::move(g), std::move(x0), e0};
}

WrappedResult simulate_wrapped(const WrappedSystem& ws, const InputFn& u, double dt, double horizon) {
    const Eigen::Index n = ws.x0.size();
    const double a = std::sqrt(2.0 * ws.e0);
    const VectorField field = [&](double t, const Vec& z) {
        const Vec xh = z.head(n);
        const double xe = z(n);
        const Vec ut = u(t);
        const Vec fx = ws.f(xh, ut);
        const Vec gx = ws.g(xh, ut);
        Vec dz(n + 1);
        dz.head(n) = (xe / a) * fx;
        dz(n) = (gx.dot(ut) - xh.dot(fx)) / a;
        return dz;
    };
    Vec z0(n + 1);
    z0.head(n) = ws.x0;
    z0(n) = a;
    const Trajectory z = integrate_ode(field, z0, dt, horizon);

    WrappedResult r;
    std::vector<Vec> xs(z.size()), ys(z.size());
    std::vector<double> work(z.size());
    r.supply.resize(z.size());
    r.energy.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Vec ut = u(z.time(i));
        xs[i] = z[i].head(n);
        r.supply[i] = z[i](n);
        ys[i] = (r.supply[i] / a) * ws.g(xs[i], ut);
        work[i] = ys[i].dot(ut);
        r.energy[i] = 0.5 * z[i].squaredNorm();
    }
    r.balance_error = std::abs(r.energy.back() - r.energy.front() - simpson(work, dt));
    r.x_hat = Trajectory(dt, std::move(xs));
    r.y = Trajectory(dt, std::move(ys));
    return r;
}

PlainResult simulate_plain(const StateMap& f, const StateMap& g, const Vec& x0, const InputFn& u, double dt,
                           double horizon) {
    const VectorField field = [&](double t, const Vec& x) { return f(x, u(t)); };
    PlainResult r;
    r.x = integrate_ode(field, x0, dt, horizon);
    std::vector<Vec> ys(r.x.size());
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        ys[i] = g(r.x[i], u(r.x.time(i)));
    }
    r.y = Trajectory(dt, std::move(ys));
    return r;
}

ConvergenceReport convergence_order(const std::vector<double>& energies,
                                    const std::function<double(double)>& error_at, double floor) {
    if (energies.size() < 3) {
        throw InvalidArgument("convergence_order: need at least three grid points");
    }
    const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
    if (!(*lo > 0.0) || *hi / *lo < 1e3 * (1.0 - 1e-12)) {
        throw InvalidArgument("convergence_order: the E0 grid must be positive and span three decades");
    }
    ConvergenceReport rep;
    rep.energies = energies;
    std::vector<double> xs, ys;
    for (double e : energies) {
        const double err = error_at(e);
        rep.errors.push_back(err);
        const bool ok = err > floor && std::isfinite(err);
        rep.used.push_back(ok);
        if (ok) {
            xs.push_back(e);
            ys.push_back(err);
        } else {
            ++rep.excluded;
        }
    }
    if (xs.size() < 2) {
        throw InvalidArgument("convergence_order: fewer than two points above the error floor");
    }
    rep.slope = loglog_slope(xs, ys);
    return rep;
}

double wrapper_state_error(const StateMap& f, const StateMap& g, const Vec& x0, double e0, const InputFn& u,
                           double dt, double horizon) {
    const auto ref = simulate_plain(f, g, x0, u, dt, horizon);
    const auto wr = simulate_wrapped(wrap_lossless(f, g, x0, e0), u, dt, horizon);
    double err = 0.0;
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
        err = std::max(err, (ref.x[i] - wr.x_hat[i]).norm());
    }
    return err;
}

}  // namespace lossless
