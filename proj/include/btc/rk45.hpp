#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "btc/model.hpp"

namespace btc {

// Adaptive Dormand-Prince 5(4) pair, first-same-as-last. State Y must be an
// Eigen-style type (vector or matrix); dense output between accepted steps
// uses a cubic Hermite interpolant, which is well below the pair's own error
// for every tolerance this project runs at.
//
// f:    rhs callable, f(const Y&) -> Y
// sink: called once per requested sample time, sink(size_t idx, double t, const Y&)
//
// Sample times must be non-decreasing and lie in [t0, t1].
template <class Y, class F, class Sink>
void rk45_integrate(F&& f, Y y, double t0, double t1, double rel_tol, double abs_tol,
                    const std::vector<double>& samples, Sink&& sink) {
    if (!(rel_tol > 0) || rel_tol > 1e-2 || !(abs_tol > 0) || abs_tol > 1e-2)
        throw Error(ErrorCode::DomainError, "tolerances must lie in (0, 1e-2]");
    if (!(t1 >= t0) || !std::isfinite(t1 - t0))
        throw Error(ErrorCode::DomainError, "integration span must be finite and forward");

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat, the embedded 4th-order error weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    size_t si = 0;
    auto emit_upto = [&](double ta, double tb, double h, const Y& ya, const Y& yb, const Y& fa,
                         const Y& fb) {
        while (si < samples.size() && samples[si] <= tb + 1e-14 * std::max(1.0, std::abs(tb))) {
            double th = h > 0 ? (samples[si] - ta) / h : 0.0;
            th = std::clamp(th, 0.0, 1.0);
            double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
            double h10 = th * (1 - th) * (1 - th);
            double h01 = th * th * (3 - 2 * th);
            double h11 = th * th * (th - 1);
            Y ys = h00 * ya + (h10 * h) * fa + h01 * yb + (h11 * h) * fb;
            sink(si, samples[si], ys);
            ++si;
        }
    };

    double t = t0;
    Y k1 = f(y);
    while (si < samples.size() && samples[si] <= t0) {
        sink(si, samples[si], y);
        ++si;
    }
    if (t1 <= t0) return;

    double span = t1 - t0;
    double h = std::min(span, 1e-2 * span + 1e-6);
    const double h_floor = 1e-12 * span;

    auto err_norm = [&](const Y& e, const Y& y0, const Y& y1) {
        double acc = 0;
        auto ea = e.reshaped();
        auto y0a = y0.reshaped();
        auto y1a = y1.reshaped();
        for (Eigen::Index i = 0; i < ea.size(); ++i) {
            double sc = abs_tol + rel_tol * std::max(std::abs(y0a[i]), std::abs(y1a[i]));
            double r = std::abs(ea[i]) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(ea.size()));
    };

    while (t < t1) {
        h = std::min(h, t1 - t);
        if (h < h_floor)
            throw Error(ErrorCode::StepSizeUnderflow,
                        "adaptive step fell below 1e-12 of the integration span");

        Y k2 = f(y + h * (a21 * k1));
        Y k3 = f(y + h * (a31 * k1 + a32 * k2));
        Y k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Y k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Y k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Y y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Y k7 = f(y_new);
        Y err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = err_norm(err, y, y_new);
        if (!std::isfinite(en)) en = 1e10;  // overflowing trial step: force a hard shrink
        if (en <= 1.0) {
            double t_new = t + h;
            emit_upto(t, t_new, h, y, y_new, k1, k7);
            y = std::move(y_new);
            k1 = std::move(k7);
            t = t_new;
        }
        double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    // numerical slack: flush any trailing samples pinned to t1
    while (si < samples.size()) {
        sink(si, samples[si], y);
        ++si;
    }
}

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) return {b};
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
    v.back() = b;
    return v;
}

}  // namespace btc
