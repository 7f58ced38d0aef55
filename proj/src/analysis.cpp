#include "btc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace btc {
namespace analysis {

namespace {

// drop the first oscillation period and sub-noise amplitudes
std::vector<EnvelopePoint> trim_transient(const std::vector<EnvelopePoint>& env) {
    std::vector<EnvelopePoint> out;
    if (env.size() < 2) return out;
    double t_min = env[1].t;
    for (const EnvelopePoint& e : env)
        if (e.t >= t_min && e.amplitude >= 1e-4) out.push_back(e);
    return out;
}

struct Line {
    double slope, intercept, residual;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = n * sxx - sx * sx;
    if (den == 0) throw Error(ErrorCode::InsufficientRange, "degenerate abscissa in fit");
    Line l;
    l.slope = (n * sxy - sx * sy) / den;
    l.intercept = (sy - l.slope * sx) / n;
    double ss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (l.slope * x[i] + l.intercept);
        ss += r * r;
    }
    l.residual = std::sqrt(ss / n);
    return l;
}

}  // namespace

PowerFit fit_power_amplitude(const std::vector<EnvelopePoint>& env) {
    auto pts = trim_transient(env);
    if (pts.size() < 5)
        throw Error(ErrorCode::InsufficientRange, "need at least 5 envelope points after the transient");
    double t_lo = pts.front().t, t_hi = pts.back().t;
    if (!(t_lo > 0) || t_hi < 10.0 * t_lo)
        throw Error(ErrorCode::InsufficientRange, "envelope must span at least a decade in t");
    std::vector<double> x, y;
    for (const EnvelopePoint& e : pts) {
        x.push_back(std::log(e.t));
        y.push_back(std::log(e.amplitude));
    }
    Line l = least_squares(x, y);
    PowerFit f;
    f.exponent = l.slope;
    f.amplitude = std::exp(l.intercept);
    f.residual = l.residual;
    f.n_used = static_cast<int>(pts.size());
    return f;
}

ExpFit fit_exp_amplitude(const std::vector<EnvelopePoint>& env, double n_s) {
    if (!(n_s > 0)) throw Error(ErrorCode::DomainError, "n_s must be positive");
    auto pts = trim_transient(env);
    if (pts.size() < 5)
        throw Error(ErrorCode::InsufficientRange, "need at least 5 envelope points after the transient");
    std::vector<double> x, y;
    for (const EnvelopePoint& e : pts) {
        x.push_back(e.t);
        y.push_back(std::log(e.amplitude));
    }
    Line l = least_squares(x, y);
    ExpFit f;
    f.rate = -l.slope;
    f.beta = f.rate * n_s;
    f.amplitude = std::exp(l.intercept);
    f.residual = l.residual;
    f.n_used = static_cast<int>(pts.size());
    return f;
}

double collapse_score(const std::vector<std::vector<EnvelopePoint>>& envs,
                      const std::vector<double>& sizes, double nu) {
    if (envs.size() != sizes.size())
        throw Error(ErrorCode::DimensionMismatch, "one size per envelope required");
    if (envs.size() < 3)
        throw Error(ErrorCode::InsufficientData, "collapse needs at least 3 system sizes");
    for (double s : sizes)
        if (!(s > 0)) throw Error(ErrorCode::DomainError, "sizes must be positive");
    for (const auto& e : envs)
        if (e.size() < 2)
            throw Error(ErrorCode::InsufficientData, "every envelope needs at least 2 points");

    const size_t m = envs.size();
    double lo = -1e300, hi = 1e300;
    std::vector<double> scale(m);
    for (size_t i = 0; i < m; ++i) {
        scale[i] = std::pow(sizes[i], -nu);
        lo = std::max(lo, envs[i].front().t * scale[i]);
        hi = std::min(hi, envs[i].back().t * scale[i]);
    }
    if (!(hi > lo))
        throw Error(ErrorCode::InsufficientRange, "rescaled envelopes do not overlap in time");

    const int grid = 200;
    // linear interpolation of each envelope onto the common rescaled grid
    std::vector<std::vector<double>> val(m, std::vector<double>(grid));
    for (size_t i = 0; i < m; ++i) {
        const auto& e = envs[i];
        size_t k = 0;
        for (int g = 0; g < grid; ++g) {
            double x = lo + (hi - lo) * g / (grid - 1);
            double tx = x / scale[i];
            while (k + 2 < e.size() && e[k + 1].t < tx) ++k;
            double t0 = e[k].t, t1 = e[k + 1].t;
            double w = t1 > t0 ? std::clamp((tx - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
            val[i][static_cast<size_t>(g)] =
                e[k].amplitude + w * (e[k + 1].amplitude - e[k].amplitude);
        }
    }

    double acc = 0;
    int pairs = 0;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
            double ss = 0;
            for (int g = 0; g < grid; ++g) {
                double d = val[i][static_cast<size_t>(g)] - val[j][static_cast<size_t>(g)];
                ss += d * d;
            }
            acc += std::sqrt(ss / grid);
            ++pairs;
        }
    return acc / pairs;
}

CollapseResult best_collapse(const std::vector<std::vector<EnvelopePoint>>& envs,
                             const std::vector<double>& sizes,
                             const std::vector<double>& nu_grid) {
    if (nu_grid.empty()) throw Error(ErrorCode::DomainError, "empty exponent grid");
    CollapseResult r;
    r.nu_grid = nu_grid;
    r.scores.reserve(nu_grid.size());
    bool any = false;
    for (double nu : nu_grid) {
        double s;
        try {
            s = collapse_score(envs, sizes, nu);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientRange) throw;
            s = std::numeric_limits<double>::infinity();
        }
        r.scores.push_back(s);
        if (!any || s < r.score) {
            r.score = s;
            r.nu_star = nu;
            any = true;
        }
    }
    if (!any || !std::isfinite(r.score))
        throw Error(ErrorCode::InsufficientRange, "no exponent in the grid yields overlap");
    return r;
}

double gap_scaling(const std::vector<double>& sizes, const std::vector<double>& gaps) {
    if (sizes.size() != gaps.size())
        throw Error(ErrorCode::DimensionMismatch, "one gap per size required");
    if (sizes.size() < 3)
        throw Error(ErrorCode::InsufficientData, "gap scaling needs at least 3 sizes");
    std::vector<double> x, y;
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (!(sizes[i] > 0) || !(gaps[i] > 0))
            throw Error(ErrorCode::DomainError, "sizes and gaps must be positive");
        x.push_back(std::log(sizes[i]));
        y.push_back(std::log(gaps[i]));
    }
    return least_squares(x, y).slope;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "t and v sizes differ");
    const size_t n = t.size();
    if (n < 64) throw Error(ErrorCode::InsufficientData, "need at least 64 samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    if (!(dt > 0)) throw Error(ErrorCode::DomainError, "time axis must increase");
    for (size_t i = 1; i < n; ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-3 * dt)
            throw Error(ErrorCode::DomainError, "time grid must be uniform");

    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);

    // a numerically constant series has no peak; rounding noise after mean
    // removal must not masquerade as one
    double vscale = 0, cscale = 0;
    for (double x : v) {
        vscale = std::max(vscale, std::abs(x));
        cscale = std::max(cscale, std::abs(x - mean));
    }
    if (cscale <= 1e-12 * std::max(vscale, 1.0))
        throw Error(ErrorCode::NoPeak, "series is constant");

    const size_t kmax = n / 2;
    std::vector<double> mag(kmax + 1, 0.0);
    for (size_t k = 1; k <= kmax; ++k) {
        double re = 0, im = 0;
        double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        for (size_t i = 0; i < n; ++i) {
            double ph = w * static_cast<double>(i);
            double x = v[i] - mean;
            re += x * std::cos(ph);
            im += x * std::sin(ph);
        }
        mag[k] = std::hypot(re, im);
    }

    size_t kp = 1;
    for (size_t k = 2; k <= kmax; ++k)
        if (mag[k] > mag[kp]) kp = k;

    std::vector<double> sorted(mag.begin() + 1, mag.end());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double med = sorted[sorted.size() / 2];
    if (mag[kp] <= 0 || (med > 0 && mag[kp] / med < 5.0))
        throw Error(ErrorCode::NoPeak, "spectrum is flat");

    double delta = 0;
    if (kp > 1 && kp < kmax) {
        double a = mag[kp - 1], b = mag[kp], c = mag[kp + 1];
        double den = a - 2 * b + c;
        if (den != 0) delta = 0.5 * (a - c) / den;
        delta = std::clamp(delta, -0.5, 0.5);
    }
    return (static_cast<double>(kp) + delta) / (static_cast<double>(n) * dt);
}

SteadyStateMetrics steadystate_metrics(const Eigen::MatrixXcd& rho) {
    if (rho.rows() != rho.cols())
        throw Error(ErrorCode::DimensionMismatch, "density matrix must be square");
    const Eigen::Index d = rho.rows();
    if (d < 1) throw Error(ErrorCode::DimensionMismatch, "empty density matrix");
    SteadyStateMetrics m;
    m.purity = (rho * rho).trace().real();
    double unif = 1.0 / static_cast<double>(d);
    for (Eigen::Index i = 0; i < d; ++i)
        m.diag_uniformity = std::max(m.diag_uniformity, std::abs(rho(i, i) - cplx(unif, 0)));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (i != j) m.offdiag_mass += std::norm(rho(i, j));
    return m;
}

namespace {

void check_ansatz(int n, double a, double b) {
    if (n < 1) throw Error(ErrorCode::DomainError, "need at least one spin");
    if (!(a >= 0 && a <= 1)) throw Error(ErrorCode::DomainError, "population a must lie in [0, 1]");
    if (b * b > a * (1 - a) + 1e-12)
        throw Error(ErrorCode::DomainError, "coherence b violates positivity: b^2 > a(1-a)");
}

using Mat = Eigen::MatrixXcd;

Mat kron(const Mat& A, const Mat& B) {
    Mat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

// total-spin-squared operator in the 2^n product space, cached per n
const Mat& spin_squared(int n) {
    static std::map<int, Mat> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    const Eigen::Index dim = Eigen::Index(1) << n;
    Mat sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, cplx(0, -1), cplx(0, 1), 0;
    sz << 1, 0, 0, -1;
    Mat total = Mat::Zero(dim, dim);
    for (const Mat& s : {sx, sy, sz}) {
        Mat comp = Mat::Zero(dim, dim);
        for (int i = 0; i < n; ++i) {
            Mat e = Mat::Identity(1, 1);
            for (int j = 0; j < n; ++j) e = kron(e, j == i ? s : Mat::Identity(2, 2));
            comp += 0.5 * e;
        }
        total += comp * comp;
    }
    return cache.emplace(n, std::move(total)).first->second;
}

}  // namespace

double ansatz_total_spin(int n, double a, double b) {
    check_ansatz(n, a, b);
    double purity = 0.5 * ((2 * a - 1) * (2 * a - 1) + 1 + 4 * b * b);
    return 0.75 * n + 0.25 * n * (n - 1) * (2 * purity - 1);
}

double brute_force_total_spin(int n, double a, double b, double phase) {
    check_ansatz(n, a, b);
    if (n > 12) throw Error(ErrorCode::SizeLimit, "2^n construction limited to n <= 12");
    Mat rho1(2, 2);
    rho1(0, 0) = a;
    rho1(1, 1) = 1 - a;
    rho1(0, 1) = b * std::exp(cplx(0, -phase));
    rho1(1, 0) = b * std::exp(cplx(0, phase));
    Mat rho = Mat::Identity(1, 1);
    for (int i = 0; i < n; ++i) rho = kron(rho, rho1);
    const Mat& s2 = spin_squared(n);
    return rho.transpose().cwiseProduct(s2).sum().real();
}

}  // namespace analysis
}  // namespace btc
