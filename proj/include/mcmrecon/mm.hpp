#pragma once

#include <span>
#include <vector>

#include "mcmrecon/moment_system.hpp"

namespace mcmrecon {

/// Method-of-moments system for all raw moments up to order M (M >= 2),
/// closed by zero central moments of order M+1. Has C(n+M, M) - 1 equations.
MomentODESystem generate_mm_system(const ReactionNetwork& network, int M);

/// Moments held in the state vector of an MM system.
MomentVector mm_moments(const MomentODESystem& system, std::span<const double> y);

/// Integrate the MM system from the initial distribution to time t.
/// Integration failures are rethrown naming the offending moment.
MomentVector solve_mm(const ReactionNetwork& network, int M, double t, const IntegratorOptions& opts = {});

/// Moments at each of the ascending `times`.
std::vector<MomentVector> solve_mm_trajectory(const ReactionNetwork& network, int M, std::span<const double> times,
                                              const IntegratorOptions& opts = {});

}  // namespace mcmrecon
