#include "lossless/thermal.hpp"

#include "lossless/approx_linear.hpp"
#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"
#include "lossless/random.hpp"
#include "lossless/stats.hpp"

#include <cmath>
#include <sstream>

namespace lossless {

namespace {

void check_temperature(double temperature, double k_b) {
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
        throw InvalidArgument("temperature must be finite and >= 0");
    }
    if (!(k_b > 0.0)) {
        throw InvalidArgument("Boltzmann constant must be positive");
    }
}

}  // namespace

Vec ThermalEnsemble::center() const {
    if (mean.size() == 0) {
        return Vec::Zero(dim);
    }
    if (mean.size() != dim) {
        throw InvalidArgument("ThermalEnsemble: mean has the wrong dimension");
    }
    return mean;
}

Vec ThermalEnsemble::draw(std::size_t index) const {
    check_temperature(temperature, k_b);
    CounterRng rng(derive_seed(seed, index));
    const double sd = std::sqrt(k_b * temperature);
    Vec x = center();
    for (Eigen::Index i = 0; i < dim; ++i) {
        x(i) += sd * rng.normal();
    }
    return x;
}

std::vector<Vec> sample_gibbs(const ThermalEnsemble& ens, std::size_t count, int threads) {
    check_temperature(ens.temperature, ens.k_b);
    std::vector<Vec> out(count);
    parallel_trials(count, threads, [&](std::size_t i) { out[i] = ens.draw(i); });
    return out;
}

double internal_energy(const Vec& x, const Vec& mean) {
    if (x.size() != mean.size()) {
        throw InvalidArgument("internal_energy: dimension mismatch");
    }
    return 0.5 * (x - mean).squaredNorm();
}

Mat analytic_fluctuation_covariance(const LosslessLinear& sys, double temperature, double t, double s, double k_b) {
    check_temperature(temperature, k_b);
    if (t < 0.0 || s < 0.0) {
        throw InvalidArgument("analytic_fluctuation_covariance: times must be >= 0");
    }
    if (t >= s) {
        return k_b * temperature * impulse_response_at(sys, t - s);
    }
    return k_b * temperature * impulse_response_at(sys, s - t).transpose();
}

FdtReport empirical_fdt_check(const LosslessLinear& sys, double temperature, std::size_t trials, double dt,
                              std::size_t lag_count, std::uint64_t seed, double k_b, std::size_t shift_steps,
                              int threads) {
    check_temperature(temperature, k_b);
    if (trials < 2 || lag_count == 0 || !(dt > 0.0)) {
        throw InvalidArgument("empirical_fdt_check: need trials >= 2, lags >= 1 and dt > 0");
    }
    const Eigen::Index n = sys.states();
    const Eigen::Index p = sys.ports();
    const std::size_t points = lag_count + shift_steps;
    // Observation maps B^T e^{J t_i}.
    std::vector<Mat> obs(points);
    const Mat step = sys.states() > 0 ? matrix_exponential(sys.J() * dt) : Mat(0, 0);
    Mat prop = Mat::Identity(n, n);
    for (std::size_t i = 0; i < points; ++i) {
        obs[i] = sys.B().transpose() * prop;
        prop = step * prop;
    }
    const ThermalEnsemble ens{temperature, k_b, n, Vec(), seed};
    const std::size_t pp = static_cast<std::size_t>(p * p);
    const std::size_t width = 2 * lag_count * pp;
    const MomentSums sums = accumulate_moments(trials, width, threads, [&](std::size_t trial, std::vector<double>& out) {
        const Vec x0 = ens.draw(trial);
        std::vector<Vec> noise(points);
        for (std::size_t i = 0; i < points; ++i) {
            noise[i] = obs[i] * x0;
        }
        for (std::size_t l = 0; l < lag_count; ++l) {
            const Mat r0 = noise[l] * noise[0].transpose();
            const Mat rh = noise[l + shift_steps] * noise[shift_steps].transpose();
            for (std::size_t e = 0; e < pp; ++e) {
                out[l * pp + e] = r0(static_cast<Eigen::Index>(e));
                out[(lag_count + l) * pp + e] = rh(static_cast<Eigen::Index>(e)) - r0(static_cast<Eigen::Index>(e));
            }
        }
    });
    const auto means = sums.means();
    const auto ses = sums.standard_errors();
    FdtReport rep;
    for (std::size_t l = 0; l < lag_count; ++l) {
        const double lag = static_cast<double>(l) * dt;
        rep.lags.push_back(lag);
        rep.analytic.push_back(analytic_fluctuation_covariance(sys, temperature, lag, 0.0, k_b));
        Mat emp(p, p), se(p, p);
        for (std::size_t e = 0; e < pp; ++e) {
            emp(static_cast<Eigen::Index>(e)) = means[l * pp + e];
            se(static_cast<Eigen::Index>(e)) = ses[l * pp + e];
            const double dev = std::abs(means[l * pp + e] - rep.analytic.back()(static_cast<Eigen::Index>(e)));
            rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
            if (ses[l * pp + e] > 0.0) {
                rep.max_z = std::max(rep.max_z, dev / ses[l * pp + e]);
            } else if (dev > 1e-12) {
                rep.max_z = std::numeric_limits<double>::infinity();
            }
            const double sd = ses[(lag_count + l) * pp + e];
            const double sm = std::abs(means[(lag_count + l) * pp + e]);
            if (sd > 0.0) {
                rep.max_stationarity_z = std::max(rep.max_stationarity_z, sm / sd);
            }
        }
        rep.empirical.push_back(emp);
        rep.std_error.push_back(se);
    }
    return rep;
}

LangevinModel LangevinModel::make(const Mat& j, const Mat& k, const Mat& b, double temperature, double k_b) {
    check_temperature(temperature, k_b);
    if (j.rows() != j.cols() || k.rows() != j.rows() || k.cols() != j.cols() || b.rows() != j.rows()) {
        throw InvalidArgument("LangevinModel: J, K must be n x n and B n x p");
    }
    if (skew_residual(j) > kSkewTol) {
        throw InvalidArgument("LangevinModel: J must be skew");
    }
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("LangevinModel: K must be symmetric");
    }
    LangevinModel m;
    m.j = j;
    m.k = k;
    m.b = b;
    m.l = factor_psd(k).transpose();
    if (m.l.cols() > 0 && (m.l * m.l.transpose() - k).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalFailure("LangevinModel: factor does not reproduce K", std::nan(""));
    }
    m.temperature = temperature;
    m.k_b = k_b;
    return m;
}

Trajectory simulate_langevin(const LangevinModel& model, const InputFn& u, const Vec& x0, double dt, double horizon,
                             std::uint64_t seed, std::size_t stride) {
    if (stride == 0) {
        throw InvalidArgument("simulate_langevin: stride must be positive");
    }
    if (x0.size() != model.j.rows()) {
        throw InvalidArgument("simulate_langevin: x0 has the wrong dimension");
    }
    const std::size_t steps = step_count(dt, horizon);
    const Mat drift = model.j - model.k;
    const Mat noise = std::sqrt(2.0 * model.k_b * model.temperature * dt) * model.l;
    const Eigen::Index m = model.l.cols();
    CounterRng rng(seed);
    Vec x = x0;
    Vec xi(m);
    std::vector<Vec> xs;
    xs.reserve(steps / stride + 1);
    xs.push_back(x);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        for (Eigen::Index q = 0; q < m; ++q) {
            xi(q) = rng.normal();
        }
        x += dt * (drift * x + model.b * u(t)) + noise * xi;
        if (!x.allFinite()) {
            std::ostringstream os;
            os << "simulate_langevin: state blew up at t=" << t + dt;
            throw NumericalFailure(os.str(), t + dt);
        }
        if ((i + 1) % stride == 0) {
            xs.push_back(x);
        }
    }
    return Trajectory(dt * static_cast<double>(stride), std::move(xs));
}

Mat johnson_nyquist_intensity(const Mat& k_s, double temperature, double k_b) {
    check_temperature(temperature, k_b);
    (void)factor_psd(k_s);
    return 2.0 * k_b * temperature * k_s;
}

Trajectory sample_white_noise(const Mat& k_s, double temperature, double dt, std::size_t samples, std::uint64_t seed,
                              double k_b) {
    check_temperature(temperature, k_b);
    if (!(dt > 0.0)) {
        throw InvalidArgument("sample_white_noise: dt must be positive");
    }
    const Mat l = std::sqrt(2.0 * k_b * temperature / dt) * factor_psd(k_s).transpose();
    CounterRng rng(seed);
    Vec xi(l.cols());
    std::vector<Vec> out(samples);
    for (auto& v : out) {
        for (Eigen::Index q = 0; q < xi.size(); ++q) {
            xi(q) = rng.normal();
        }
        v = l.cols() > 0 ? Vec(l * xi) : Vec(Vec::Zero(k_s.rows()));
    }
    return Trajectory(dt, std::move(out));
}

ThermalNoiseSplit nonlinear_thermal_decompose(double k, double e0, const Trajectory& u, double dx0) {
    if (!(e0 > 0.0)) {
        throw InvalidArgument("nonlinear_thermal_decompose: E0 must be positive");
    }
    if (u.dim() != 1) {
        throw InvalidArgument("nonlinear_thermal_decompose: scalar input required");
    }
    std::vector<double> sq(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        sq[i] = u[i](0) * u[i](0);
    }
    const auto acc = cumulative_trapezoid(sq, u.dt());
    const double a = std::sqrt(2.0 * e0);
    ThermalNoiseSplit s;
    s.deterministic.resize(u.size());
    s.stochastic.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        s.deterministic[i] = k * k / (2.0 * e0) * u[i](0) * acc[i];
        s.stochastic[i] = k * dx0 / a * u[i](0);
    }
    return s;
}

double nonlinear_thermal_variance(double k, double e0, double temperature, double u_t, double k_b) {
    check_temperature(temperature, k_b);
    if (!(e0 > 0.0)) {
        throw InvalidArgument("nonlinear_thermal_variance: E0 must be positive");
    }
    return k * k * k_b * temperature * u_t * u_t / (2.0 * e0);
}

}  // namespace lossless
