#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mcmrecon {

/// dy/dt = f(t, y). The callback writes the derivative into `dydt` and must
/// be deterministic and side-effect free.
struct OdeSystem {
    std::size_t dimension = 0;
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)> rhs;
};

struct IntegratorOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    std::size_t max_steps = 10'000'000;
    /// <= 0 selects the starting step automatically.
    double initial_step = 0.0;
};

struct Checkpoint {
    double t;
    std::vector<double> y;
};

struct IntegrationResult {
    std::vector<double> y;  ///< state at t1
    std::vector<Checkpoint> checkpoints;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

/// Adaptive Dormand-Prince 5(4) integration from t0 to t1.
///
/// The local error estimate of every accepted step satisfies
/// |err_i| <= abs_tol + rel_tol * max(|y_i|, |y_new_i|). `checkpoint_times`
/// (ascending, inside (t0, t1]) are hit exactly and recorded.
///
/// Throws IntegrationError on step-size underflow, step-count overflow, or
/// a non-finite derivative.
IntegrationResult integrate(const OdeSystem& system, std::span<const double> y0, double t0, double t1,
                            const IntegratorOptions& opts = {}, std::span<const double> checkpoint_times = {});

}  // namespace mcmrecon
