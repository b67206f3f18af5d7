#include "lossless/approx_linear.hpp"

#include "lossless/integrate.hpp"
#include "lossless/linalg.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

namespace lossless {

namespace {

using cd = std::complex<double>;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// FFTW real-to-real transform of the given kind; planning is serialized.
std::vector<double> r2r(std::vector<double> in, fftw_r2r_kind kind) {
    std::vector<double> out(in.size());
    const int n = static_cast<int>(in.size());
    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_r2r_1d(n, in.data(), out.data(), kind, FFTW_ESTIMATE);
    }
    if (plan == nullptr) {
        throw NumericalFailure("fftw: plan creation failed", std::nan(""));
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

/// Y_k = x_0 + (-1)^k x_n + 2 sum_{m=1}^{n-1} x_m cos(pi k m / n), k = 0..n.
std::vector<double> dct1(std::vector<double> x) { return r2r(std::move(x), FFTW_REDFT00); }
/// Y_k = 2 sum_{m=1}^{n-1} x_m sin(pi k m / n), k = 1..n-1 (input and output skip the zero ends).
std::vector<double> dst1(std::vector<double> x) { return r2r(std::move(x), FFTW_RODFT00); }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double spectral_norm(const Mat& m) {
    if (m.size() == 1) {
        return std::abs(m(0, 0));
    }
    return sigma_max(m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Memoryless systems

SymmetricSplit split_symmetric(const Mat& k) {
    if (k.rows() != k.cols()) {
        throw InvalidArgument("split_symmetric: k must be square");
    }
    require_finite(k, "split_symmetric: k");
    return {sym_part(k), skew_part(k)};
}

Mat factor_psd(const Mat& k_s, double rank_tol, double psd_tol) {
    if (k_s.rows() != k_s.cols()) {
        throw InvalidArgument("factor_psd: matrix must be square");
    }
    require_finite(k_s, "factor_psd");
    const Eigen::Index p = k_s.rows();
    if (p == 0) {
        return Mat(0, 0);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(sym_part(k_s));
    const Vec& lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    if (lam.minCoeff() < -psd_tol * std::max(1.0, std::abs(lmax))) {
        std::ostringstream os;
        os << "factor_psd: matrix is indefinite, most negative eigenvalue " << lam.minCoeff();
        throw InvalidArgument(os.str());
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (lmax > 0.0 && lam(i) > rank_tol * lmax) {
            keep.push_back(i);
        }
    }
    Mat f(static_cast<Eigen::Index>(keep.size()), p);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const auto i = keep[r];
        f.row(static_cast<Eigen::Index>(r)) = std::sqrt(lam(i)) * es.eigenvectors().col(i).transpose();
    }
    return f;
}

MemorylessSystem MemorylessSystem::from(const Mat& k, double psd_tol) {
    const auto split = split_symmetric(k);
    MemorylessSystem m;
    m.k = k;
    m.k_s = split.symmetric;
    m.k_a = split.antisymmetric;
    m.k_f = factor_psd(m.k_s, 1e-12, psd_tol);
    m.rank = m.k_f.rows();
    return m;
}

HarmonicApprox memoryless_lossless_approx(const Mat& k, double tau, int order) {
    if (!(tau > 0.0)) {
        throw InvalidArgument("memoryless_lossless_approx: tau must be positive");
    }
    if (order < 2) {
        throw InvalidArgument("memoryless_lossless_approx: order must be >= 2");
    }
    HarmonicApprox h;
    h.tau = tau;
    h.order = order;
    h.omega0 = std::numbers::pi / tau;
    h.k = MemorylessSystem::from(k);
    const Eigen::Index r = h.k.rank;
    const Eigen::Index p = k.rows();
    const Eigen::Index harmonics = order - 1;
    const Eigen::Index n = (2 * harmonics + 1) * r;
    const Eigen::Index cos0 = r;
    const Eigen::Index sin0 = r + harmonics * r;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(2 * harmonics * r));
    h.b_n = Mat::Zero(n, p);
    const double scale = 1.0 / std::sqrt(tau);
    h.b_n.topRows(r) = h.k.k_f * (scale / std::numbers::sqrt2);
    for (Eigen::Index l = 1; l <= harmonics; ++l) {
        const double w = static_cast<double>(l) * h.omega0;
        for (Eigen::Index i = 0; i < r; ++i) {
            const Eigen::Index c = cos0 + (l - 1) * r + i;
            const Eigen::Index s = sin0 + (l - 1) * r + i;
            trip.emplace_back(c, s, w);
            trip.emplace_back(s, c, -w);
        }
        h.b_n.middleRows(cos0 + (l - 1) * r, r) = h.k.k_f * scale;
    }
    SpMat j(n, n);
    j.setFromTriplets(trip.begin(), trip.end());

    std::vector<int> sig(static_cast<std::size_t>(n), 1);
    for (Eigen::Index i = sin0; i < n; ++i) {
        sig[static_cast<std::size_t>(i)] = -1;
    }
    h.realization = LosslessLinear(std::move(j), std::numbers::sqrt2 * h.b_n, h.k.k_a).with_state_signature(sig);
    return h;
}

Mat HarmonicApprox::kernel_at(double t) const {
    Mat g = k.k_s / tau;
    for (int l = 1; l < order; ++l) {
        g += (2.0 / tau) * std::cos(l * omega0 * t) * k.k_s;
    }
    return g;
}

Trajectory memoryless_error_bound(const Mat& k_s, double tau, int order, const Trajectory& u) {
    if (order < 2 || !(tau > 0.0)) {
        throw InvalidArgument("memoryless_error_bound: need order >= 2 and tau > 0");
    }
    if (u.size() < 4) {
        throw InvalidArgument("memoryless_error_bound: input needs at least 4 samples");
    }
    double umax = 0.0;
    for (const auto& v : u.values()) {
        umax = std::max(umax, v.norm());
    }
    if (u[0].norm() > 1e-12 * std::max(1.0, umax)) {
        throw InvalidArgument("memoryless_error_bound: the bound requires u(0) = 0");
    }
    const std::size_t m = u.size();
    const double dt = u.dt();
    std::vector<double> du(m), ddu(m);
    for (std::size_t i = 0; i < m; ++i) {
        Vec d1, d2;
        if (i == 0) {
            d1 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt);
            d2 = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (dt * dt);
        } else if (i + 1 == m) {
            d1 = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * dt);
            d2 = (2.0 * u[i] - 5.0 * u[i - 1] + 4.0 * u[i - 2] - u[i - 3]) / (dt * dt);
        } else {
            d1 = (u[i + 1] - u[i - 1]) / (2.0 * dt);
            d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dt * dt);
        }
        du[i] = d1.norm();
        ddu[i] = d2.norm();
    }
    const auto acc = cumulative_trapezoid(ddu, dt);
    const double factor = 2.0 * spectral_norm(k_s) * tau / (std::numbers::pi * std::numbers::pi * (order - 1));
    std::vector<Vec> bound(m, Vec(1));
    for (std::size_t i = 0; i < m; ++i) {
        bound[i](0) = factor * (du[i] + du[0] + acc[i]);
    }
    return Trajectory(dt, std::move(bound));
}

// ---------------------------------------------------------------------------
// Fourier coefficients

FourierCoefficients fourier_coefficients(const MatrixTrajectory& g, int harmonics) {
    if (harmonics < 1) {
        throw InvalidArgument("fourier_coefficients: need at least one harmonic");
    }
    if (g.rows() != g.cols()) {
        throw InvalidArgument("fourier_coefficients: kernel must be square");
    }
    const std::size_t m = g.size() - 1;
    if (g.size() < 3 || static_cast<std::size_t>(harmonics) > m) {
        throw InvalidArgument("fourier_coefficients: need at least max(2, N) sample intervals");
    }
    const Eigen::Index p = g.rows();
    const double norm = 1.0 / (2.0 * static_cast<double>(m));
    FourierCoefficients fc;
    fc.cos.assign(static_cast<std::size_t>(harmonics), Mat::Zero(p, p));
    fc.sin.assign(static_cast<std::size_t>(harmonics), Mat::Zero(p, p));
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            std::vector<double> s(m + 1);
            for (std::size_t q = 0; q <= m; ++q) {
                s[q] = g[q](i, j) + g[q](j, i);
            }
            const auto y = dct1(std::move(s));
            for (int k = 0; k < harmonics; ++k) {
                fc.cos[static_cast<std::size_t>(k)](i, j) = y[static_cast<std::size_t>(k)] * norm;
                fc.cos[static_cast<std::size_t>(k)](j, i) = y[static_cast<std::size_t>(k)] * norm;
            }
            if (i == j || harmonics < 2) {
                continue;
            }
            std::vector<double> d(m - 1);
            for (std::size_t q = 1; q < m; ++q) {
                d[q - 1] = g[q](i, j) - g[q](j, i);
            }
            const auto z = dst1(std::move(d));
            for (int k = 1; k < harmonics; ++k) {
                const double v = z[static_cast<std::size_t>(k - 1)] * norm;
                fc.sin[static_cast<std::size_t>(k)](i, j) = v;
                fc.sin[static_cast<std::size_t>(k)](j, i) = -v;
            }
        }
    }
    return fc;
}

// ---------------------------------------------------------------------------
// Horizon selection

TauSelection select_tau(const TailFn& tail, double eps, double tau0, double c, Eigen::Index ports) {
    if (!(eps > 0.0) || !(tau0 > 0.0) || !(c > 0.0) || ports < 1) {
        throw InvalidArgument("select_tau: need eps, tau0, C > 0 and p >= 1");
    }
    TauSelection sel;
    sel.target = eps * eps / (2.0 * c * std::sqrt(static_cast<double>(ports)));
    if (tail(tau0) <= sel.target) {
        sel.tau = tau0;
        sel.delta = tail(tau0);
        return sel;
    }
    double lo = tau0;
    double hi = 2.0 * tau0;
    while (tail(hi) > sel.target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw InvalidArgument("select_tau: tail never falls below the target");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) <= sel.target ? hi : lo) = mid;
    }
    sel.tau = hi;
    sel.delta = tail(hi);
    return sel;
}

TauSelection select_tau(const MatrixTrajectory& g, double eps, double tau0, double c) {
    if (!(eps > 0.0) || !(tau0 > 0.0) || !(c > 0.0)) {
        throw InvalidArgument("select_tau: need eps, tau0, C > 0");
    }
    TauSelection sel;
    sel.target = eps * eps / (2.0 * c * std::sqrt(static_cast<double>(g.rows())));
    const TailEstimate est = estimate_tail(g);
    if (!est.decays) {
        throw InvalidArgument("select_tau: kernel does not decay over the sample window");
    }
    const std::size_t m = g.size();
    std::vector<double> delta(m, est.mass);
    for (std::size_t i = m - 1; i-- > 0;) {
        delta[i] = delta[i + 1] + 0.5 * g.dt() * (entry_norm1(g[i]) + entry_norm1(g[i + 1]));
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (g.time(i) >= tau0 * (1.0 - 1e-12) && delta[i] <= sel.target) {
            sel.tau = g.time(i);
            sel.delta = delta[i];
            return sel;
        }
    }
    std::ostringstream os;
    os << "select_tau: window too short, tail at window end is " << delta.back() << " > target "
       << sel.target;
    throw InvalidArgument(os.str());
}

// ---------------------------------------------------------------------------
// Oscillator blocks

LosslessLinear HarmonicBlock::system() const {
    const Eigen::Index n = states();
    const Eigen::Index p = input.cols();
    SpMat j(n, n);
    if (omega > 0.0) {
        const Eigen::Index half = n / 2;
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index i = 0; i < half; ++i) {
            trip.emplace_back(i, half + i, omega);
            trip.emplace_back(half + i, i, -omega);
        }
        j.setFromTriplets(trip.begin(), trip.end());
    }
    LosslessLinear sys(std::move(j), input, Mat::Zero(p, p));
    if (!signature.empty() || n == 0) {
        return sys.with_state_signature(signature);
    }
    return sys;
}

Mat HarmonicBlock::target_at(double t) const {
    return std::cos(omega * t) * target_cos + std::sin(omega * t) * target_sin;
}

HarmonicBlock realize_harmonic(const CMat& r, double omega, const std::optional<SignatureMatrix>& sigma,
                               double psd_tol) {
    if (r.rows() != r.cols()) {
        throw InvalidArgument("realize_harmonic: residue must be square");
    }
    if (!r.allFinite() || !(omega >= 0.0) || !std::isfinite(omega)) {
        throw InvalidArgument("realize_harmonic: need finite residue and omega >= 0");
    }
    const Eigen::Index p = r.rows();
    const double scale = std::max(1.0, r.size() ? r.cwiseAbs().maxCoeff() : 0.0);
    if (p > 0 && (r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("realize_harmonic: residue is not Hermitian");
    }
    HarmonicBlock blk;
    blk.omega = omega;
    blk.target_cos = r.real();
    blk.target_sin = -r.imag();
    if (omega == 0.0 && p > 0 && r.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("realize_harmonic: a DC residue must be real");
    }
    constexpr double kRankTol = 1e-14;

    if (!sigma) {
        if (omega == 0.0) {
            blk.input = factor_psd(sym_part(r.real()), kRankTol, psd_tol);
            return blk;
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (r + r.adjoint()));
        const Vec& lam = es.eigenvalues();
        const double lmax = p ? lam.maxCoeff() : 0.0;
        if (p && lam.minCoeff() < -psd_tol * std::max(1.0, std::abs(lmax))) {
            std::ostringstream os;
            os << "realize_harmonic: residue is indefinite, most negative eigenvalue " << lam.minCoeff();
            throw InvalidArgument(os.str());
        }
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (lmax > 0.0 && lam(i) > kRankTol * lmax) {
                keep.push_back(i);
            }
        }
        const auto rank = static_cast<Eigen::Index>(keep.size());
        CMat w(rank, p);
        for (Eigen::Index q = 0; q < rank; ++q) {
            const auto i = keep[static_cast<std::size_t>(q)];
            w.row(q) = std::sqrt(lam(i)) * es.eigenvectors().col(i).adjoint();
        }
        blk.input.resize(2 * rank, p);
        blk.input.topRows(rank) = w.real();
        blk.input.bottomRows(rank) = -w.imag();
        return blk;
    }

    if (sigma->size() != p) {
        throw InvalidArgument("realize_harmonic: signature size must match the residue");
    }
    std::vector<Eigen::Index> plus, minus;
    for (Eigen::Index i = 0; i < p; ++i) {
        ((*sigma)[i] > 0 ? plus : minus).push_back(i);
    }
    CVec u(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        u(i) = (*sigma)[i] > 0 ? cd(1.0, 0.0) : cd(0.0, 1.0);
    }
    const CMat rt = u.asDiagonal().toDenseMatrix().adjoint() * r * u.asDiagonal();
    if (p > 0 && rt.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("realize_harmonic: residue is not reciprocal for the signature");
    }
    const Mat real_rt = sym_part(rt.real());

    if (omega == 0.0) {
        // Factor each signature class separately so every state row touches one class.
        auto factor_class = [&](const std::vector<Eigen::Index>& idx) {
            const auto k = static_cast<Eigen::Index>(idx.size());
            Mat sub(k, k);
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index b = 0; b < k; ++b) {
                    sub(a, b) = real_rt(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
                }
            }
            const Mat f = factor_psd(sub, kRankTol, psd_tol);
            Mat full = Mat::Zero(f.rows(), p);
            for (Eigen::Index b = 0; b < k; ++b) {
                full.col(idx[static_cast<std::size_t>(b)]) = f.col(b);
            }
            return full;
        };
        const Mat fp = factor_class(plus);
        const Mat fm = factor_class(minus);
        blk.input.resize(fp.rows() + fm.rows(), p);
        blk.input << fp, fm;
        blk.signature.assign(static_cast<std::size_t>(fp.rows()), 1);
        blk.signature.insert(blk.signature.end(), static_cast<std::size_t>(fm.rows()), -1);
        return blk;
    }

    // W = V U^*: P keeps the +1 columns of V, Q = -V on the -1 columns.
    const Mat v = factor_psd(real_rt, kRankTol, psd_tol);
    const Eigen::Index rank = v.rows();
    Mat pm = v;
    Mat qm = -v;
    for (auto i : minus) {
        pm.col(i).setZero();
    }
    for (auto i : plus) {
        qm.col(i).setZero();
    }
    blk.input.resize(2 * rank, p);
    blk.input.topRows(rank) = pm;
    blk.input.bottomRows(rank) = -qm;
    blk.signature.assign(static_cast<std::size_t>(rank), 1);
    blk.signature.insert(blk.signature.end(), static_cast<std::size_t>(rank), -1);
    return blk;
}

// ---------------------------------------------------------------------------
// Synthesized kernel

Mat FourierLosslessApprox::kernel_at(double t, int harmonics) const {
    const int n = harmonics < 0 ? order : std::min(harmonics, order);
    const Mat shift = xi * Mat::Identity(ports, ports);
    if (n == 0) {
        return Mat::Zero(ports, ports);
    }
    Mat g = 0.5 * (coeffs.cos[0] + shift);
    for (int k = 1; k < n; ++k) {
        const double w = k * std::numbers::pi / tau;
        g += std::cos(w * t) * (coeffs.cos[static_cast<std::size_t>(k)] + shift) +
             std::sin(w * t) * coeffs.sin[static_cast<std::size_t>(k)];
    }
    return g;
}

MatrixTrajectory FourierLosslessApprox::sample_kernel(std::size_t intervals, int harmonics) const {
    const int n = harmonics < 0 ? order : std::min(harmonics, order);
    if (intervals < 2 || static_cast<std::size_t>(n) > intervals) {
        throw InvalidArgument("sample_kernel: need at least max(2, N) intervals");
    }
    const std::size_t m = intervals;
    std::vector<Mat> out(m + 1, Mat::Zero(ports, ports));
    for (Eigen::Index i = 0; i < ports; ++i) {
        for (Eigen::Index j = 0; j < ports; ++j) {
            if (n == 0) {
                continue;
            }
            const double shift = i == j ? xi : 0.0;
            std::vector<double> c(m + 1, 0.0);
            for (int k = 0; k < n; ++k) {
                c[static_cast<std::size_t>(k)] = coeffs.cos[static_cast<std::size_t>(k)](i, j) + shift;
            }
            const auto y = dct1(std::move(c));
            for (std::size_t q = 0; q <= m; ++q) {
                out[q](i, j) = 0.5 * y[q];
            }
            if (i == j || n < 2) {
                continue;
            }
            std::vector<double> s(m - 1, 0.0);
            for (int k = 1; k < n; ++k) {
                s[static_cast<std::size_t>(k - 1)] = coeffs.sin[static_cast<std::size_t>(k)](i, j);
            }
            const auto z = dst1(std::move(s));
            for (std::size_t q = 1; q < m; ++q) {
                out[q](i, j) += 0.5 * z[q - 1];
            }
        }
    }
    return MatrixTrajectory(tau / static_cast<double>(m), std::move(out));
}

double FourierLosslessApprox::parseval_energy(int harmonics) const {
    const int n = harmonics < 0 ? order : std::min(harmonics, order);
    if (n == 0) {
        return 0.0;
    }
    const Mat shift = xi * Mat::Identity(ports, ports);
    double e = (0.5 * (coeffs.cos[0] + shift)).squaredNorm();
    for (int k = 1; k < n; ++k) {
        e += 0.5 * ((coeffs.cos[static_cast<std::size_t>(k)] + shift).squaredNorm() +
                    coeffs.sin[static_cast<std::size_t>(k)].squaredNorm());
    }
    return tau * e;
}

double l2_error(const MatrixTrajectory& g, const MatrixTrajectory& g_n, double window) {
    if (g.size() != g_n.size() || std::abs(g.dt() - g_n.dt()) > 1e-12 * g.dt()) {
        throw InvalidArgument("l2_error: kernels must share the sample grid");
    }
    if (g.rows() != g_n.rows() || g.cols() != g_n.cols()) {
        throw InvalidArgument("l2_error: kernel shapes differ");
    }
    if (!(window >= 0.0) || window > g.horizon() * (1.0 + 1e-12)) {
        throw InvalidArgument("l2_error: window must lie inside the sample range");
    }
    std::vector<double> e(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double n = spectral_norm(g[i] - g_n[i]);
        e[i] = n * n;
    }
    const double dt = g.dt();
    const auto full = std::min(g.size() - 1, static_cast<std::size_t>(std::floor(window / dt + 1e-9)));
    double acc = trapezoid(std::vector<double>(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(full) + 1), dt);
    const double frac = window - static_cast<double>(full) * dt;
    if (frac > 1e-12 * dt && full + 1 < e.size()) {
        const double ew = e[full] + (e[full + 1] - e[full]) * frac / dt;
        acc += 0.5 * frac * (e[full] + ew);
    }
    return std::sqrt(acc);
}

KernelFn state_space_kernel(const LinearStateSpace& sys) {
    return [sys](double t) { return impulse_response_at(sys, t); };
}

// ---------------------------------------------------------------------------
// Pipeline

FourierLosslessApprox dissipative_lossless_approx(const KernelFn& g, double eps, double tau0,
                                                  const DissipativeApproxOptions& opts) {
    if (!(eps > 0.0) || !(tau0 > 0.0)) {
        throw InvalidArgument("dissipative_lossless_approx: need eps > 0 and tau0 > 0");
    }
    const Mat g0 = g(0.0);
    if (g0.rows() != g0.cols() || g0.rows() == 0) {
        throw InvalidArgument("dissipative_lossless_approx: kernel must be square and non-empty");
    }
    const Eigen::Index p = g0.rows();
    if (opts.signature && opts.signature->size() != p) {
        throw InvalidArgument("dissipative_lossless_approx: signature size must match the kernel");
    }
    FourierLosslessApprox out;
    out.eps = eps;
    out.tau0 = tau0;
    out.ports = p;

    const double window = opts.window > 0.0 ? opts.window : 10.0 * tau0;
    const std::size_t ws = std::max<std::size_t>(opts.window_samples, 16);
    const double wdt = window / static_cast<double>(ws);
    std::vector<Mat> samples;
    samples.reserve(ws + 1);
    for (std::size_t i = 0; i <= ws; ++i) {
        samples.push_back(g(static_cast<double>(i) * wdt));
        require_finite(samples.back(), "dissipative_lossless_approx: kernel sample");
    }
    const MatrixTrajectory gw(wdt, std::move(samples));

    double peak = 0.0;
    for (const auto& gi : gw.values()) {
        peak = std::max(peak, max_abs(gi));
    }
    if (peak == 0.0) {
        out.tau = tau0;
        out.coeffs.cos.assign(1, Mat::Zero(p, p));
        out.coeffs.sin.assign(1, Mat::Zero(p, p));
        out.realization = LosslessLinear(SpMat(0, 0), Mat(0, p), Mat::Zero(p, p));
        return out;
    }

    const auto pr = check_dissipative(gw, log_frequency_grid(1e-3, 1e3, 200), std::nullopt, opts.psd_tol);
    if (!pr.dissipative) {
        std::ostringstream os;
        os << "dissipative_lossless_approx: kernel fails the positive-real test (min eigenvalue "
           << pr.min_eigenvalue << " at omega " << pr.omega_at_min << ")";
        throw InvalidArgument(os.str());
    }

    // Constants over [0, inf): window estimates plus tail corrections, rounded up.
    const TailEstimate fitted = estimate_tail(gw);
    double tail_mass = opts.tail ? opts.tail(window) : fitted.mass;
    if (!std::isfinite(tail_mass)) {
        throw InvalidArgument("dissipative_lossless_approx: kernel tail is not integrable over the window");
    }
    std::vector<double> norms(gw.size());
    for (std::size_t i = 0; i < gw.size(); ++i) {
        out.c1 = std::max(out.c1, spectral_norm(gw[i]));
        norms[i] = entry_norm1(gw[i]);
        if (i > 0) {
            out.c2 += entry_norm1(gw[i] - gw[i - 1]);
        }
    }
    out.c2 += fitted.decays ? fitted.rate * fitted.mass : 0.0;
    out.c3 = trapezoid(norms, wdt) + tail_mass;
    out.c = (4.0 * out.c1 + 2.0 * out.c2) / std::numbers::pi + 4.0 * out.c3 / tau0;

    const TauSelection sel =
        opts.tail ? select_tau(opts.tail, eps, tau0, out.c, p) : select_tau(gw, eps, tau0, out.c);
    out.tau = sel.tau;
    out.delta = sel.delta;

    const double n_real = std::floor(out.tau * out.c * out.c / (eps * eps));
    const double states_needed = (2.0 * std::max(1.0, n_real) - 1.0) * static_cast<double>(p);
    if (states_needed > static_cast<double>(opts.max_states)) {
        std::ostringstream os;
        os << "dissipative_lossless_approx: required order N=" << n_real << " needs up to " << states_needed
           << " states, above the budget of " << opts.max_states;
        throw InvalidArgument(os.str());
    }
    out.order = static_cast<int>(std::max(1.0, n_real));
    out.xi = eps * eps / (out.tau * out.c * std::sqrt(static_cast<double>(p)));

    const std::size_t m = std::max<std::size_t>(opts.quadrature_intervals, 4 * static_cast<std::size_t>(out.order));
    std::vector<Mat> qs;
    qs.reserve(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        qs.push_back(g(out.tau * static_cast<double>(i) / static_cast<double>(m)));
    }
    const MatrixTrajectory gq(out.tau / static_cast<double>(m), std::move(qs));
    out.coeffs = fourier_coefficients(gq, out.order);

    out.signature = opts.signature;
    if (!out.signature && check_reciprocal(gq, SignatureMatrix::identity(p), 1e-12 * std::max(1.0, out.c1)).reciprocal) {
        out.signature = SignatureMatrix::identity(p);
    }

    const Mat shift = out.xi * Mat::Identity(p, p);
    out.min_residue_eigenvalue = std::numeric_limits<double>::infinity();
    out.blocks.reserve(static_cast<std::size_t>(out.order));
    for (int k = 0; k < out.order; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const CMat residue = (out.coeffs.cos[ku] + shift).cast<cd>() - cd(0.0, 1.0) * out.coeffs.sin[ku].cast<cd>();
        Eigen::SelfAdjointEigenSolver<CMat> es(residue, Eigen::EigenvaluesOnly);
        out.min_residue_eigenvalue = std::min(out.min_residue_eigenvalue, es.eigenvalues().minCoeff());
        if (k == 0) {
            out.blocks.push_back(realize_harmonic(0.5 * residue, 0.0, out.signature, opts.psd_tol));
        } else {
            out.blocks.push_back(realize_harmonic(residue, k * std::numbers::pi / out.tau, out.signature, opts.psd_tol));
        }
    }

    Eigen::Index n = 0;
    for (const auto& b : out.blocks) {
        n += b.states();
    }
    std::vector<Eigen::Triplet<double>> trip;
    Mat bmat(n, p);
    std::vector<int> sig;
    sig.reserve(static_cast<std::size_t>(n));
    Eigen::Index off = 0;
    for (const auto& b : out.blocks) {
        const Eigen::Index s = b.states();
        if (b.omega > 0.0) {
            const Eigen::Index half = s / 2;
            for (Eigen::Index i = 0; i < half; ++i) {
                trip.emplace_back(off + i, off + half + i, b.omega);
                trip.emplace_back(off + half + i, off + i, -b.omega);
            }
        }
        bmat.middleRows(off, s) = b.input;
        sig.insert(sig.end(), b.signature.begin(), b.signature.end());
        off += s;
    }
    SpMat j(n, n);
    j.setFromTriplets(trip.begin(), trip.end());
    out.realization = LosslessLinear(std::move(j), std::move(bmat), Mat::Zero(p, p));
    if (out.signature) {
        out.realization = out.realization.with_state_signature(std::move(sig));
    }

    const double window_err = std::min(tau0, out.tau);
    out.l2_error = l2_error(gq, out.sample_kernel(m), window_err);
    if (opts.search_empirical_order && out.l2_error <= eps) {
        int lo = 1;
        int hi = out.order;
        while (lo < hi) {
            const int mid = lo + (hi - lo) / 2;
            if (l2_error(gq, out.sample_kernel(m, mid), window_err) <= eps) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        out.empirical_order = hi;
    }
    return out;
}

}  // namespace lossless
