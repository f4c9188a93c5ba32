#include "mcmrecon/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the embedded error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_finite(std::span<const double> v, double t) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw IntegrationError(IntegrationError::Reason::NonFinite, t, static_cast<std::ptrdiff_t>(i),
                                   "non-finite derivative in component " + std::to_string(i) + " at t=" +
                                       std::to_string(t));
    }
}

double scaled_norm(std::span<const double> v, std::span<const double> y, const IntegratorOptions& o) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]) / (o.abs_tol + o.rel_tol * std::abs(y[i])));
    return m;
}

}  // namespace

IntegrationResult integrate(const OdeSystem& sys, std::span<const double> y0, double t0, double t1,
                            const IntegratorOptions& opts, std::span<const double> checkpoint_times) {
    const std::size_t n = sys.dimension;
    if (y0.size() != n) throw std::invalid_argument("integrate: initial state has wrong dimension");
    if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 must not precede t0");
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) throw std::invalid_argument("integrate: tolerances must be positive");
    for (double v : y0)
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite initial state");

    IntegrationResult res;
    std::vector<double> y(y0.begin(), y0.end());
    if (t1 == t0 || n == 0) {
        for (double tc : checkpoint_times) res.checkpoints.push_back({tc, y});
        res.y = std::move(y);
        return res;
    }

    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    auto f = [&](double t, std::span<const double> state, std::vector<double>& out) {
        sys.rhs(t, state, out);
        ++res.rhs_evaluations;
        check_finite(out, t);
    };

    double t = t0;
    f(t, y, k1);

    double h = opts.initial_step;
    if (!(h > 0.0)) {
        // Hairer-Norsett-Wanner starting step heuristic.
        double d0 = scaled_norm(y, y, opts), d1 = scaled_norm(k1, y, opts);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t1 - t0);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h0 * k1[i];
        f(t + h0, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) err[i] = (k2[i] - k1[i]) / h0;
        double d2 = scaled_norm(err, y, opts);
        double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
        h = std::min(100 * h0, h1);
    }

    std::size_t next_cp = 0;
    while (next_cp < checkpoint_times.size() && checkpoint_times[next_cp] <= t0) {
        res.checkpoints.push_back({checkpoint_times[next_cp], y});
        ++next_cp;
    }

    constexpr double safety = 0.9, min_factor = 0.2, max_factor = 10.0;
    while (t < t1) {
        if (res.steps + res.rejected >= opts.max_steps)
            throw IntegrationError(IntegrationError::Reason::MaxSteps, t, -1,
                                   "maximum number of steps exceeded at t=" + std::to_string(t));
        double target = t1;
        if (next_cp < checkpoint_times.size()) target = std::min(target, checkpoint_times[next_cp]);
        bool hits_target = false;
        if (t + h >= target) {
            h = target - t;
            hits_target = true;
        }
        if (h <= 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            std::ptrdiff_t worst = -1;
            double wv = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = std::abs(k1[i]) / (opts.abs_tol + opts.rel_tol * std::abs(y[i]));
                if (s > wv) wv = s, worst = static_cast<std::ptrdiff_t>(i);
            }
            throw IntegrationError(IntegrationError::Reason::StepUnderflow, t, worst,
                                   "step size underflow at t=" + std::to_string(t) + " (stiff or unstable system; "
                                   "fastest-changing component " + std::to_string(worst) + ")");
        }

        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h, ynew, k7);

        double enorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            enorm = std::max(enorm, std::abs(e) / sc);
        }
        if (!std::isfinite(enorm)) enorm = 1e10;

        if (enorm <= 1.0) {
            t = hits_target ? target : t + h;
            y.swap(ynew);
            k1.swap(k7);  // first-same-as-last
            ++res.steps;
            if (hits_target && next_cp < checkpoint_times.size() && target == checkpoint_times[next_cp]) {
                res.checkpoints.push_back({t, y});
                ++next_cp;
            }
            double factor = enorm == 0.0 ? max_factor : std::clamp(safety * std::pow(enorm, -0.2), min_factor, max_factor);
            h *= factor;
        } else {
            ++res.rejected;
            h *= std::max(min_factor, safety * std::pow(enorm, -0.2));
        }
    }
    res.y = std::move(y);
    return res;
}

}  // namespace mcmrecon
