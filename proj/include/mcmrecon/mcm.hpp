#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcmrecon/moment_system.hpp"

namespace mcmrecon {

/// Probabilities below this are treated as truncated modes.
inline constexpr double kDefaultDeltaMode = 1e-12;

/// Modes reachable from the initial small-species states. Throws
/// ValidationError when the small species do not stay in a finite set.
StatePartition enumerate_modes(const ReactionNetwork& network, std::vector<std::size_t> small);

/// Partition from the network's `partition:` declaration, or from the
/// given species names when non-empty.
StatePartition make_partition(const ReactionNetwork& network, const std::vector<std::string>& small_names = {});

/// Method-of-conditional-moments system. Equation count is
/// |modes| * (C(|Z|+M, M) - 1) + |modes|; with no small species it is the
/// MM system.
MomentODESystem generate_mcm_system(const ReactionNetwork& network, const StatePartition& partition, int M);

struct ConditionalMomentState {
    StatePartition partition;
    int order = 0;
    double time = 0.0;
    std::vector<double> probabilities;
    /// Per mode: E[Z^alpha | y] * p(y) for 1 <= |alpha| <= order.
    std::vector<std::map<MultiIndex, double>> partial;
    std::size_t equations = 0;

    /// E[Z^alpha | y]; the denominator is guarded by delta_mode.
    double conditional(std::size_t mode, const MultiIndex& alpha, double delta_mode = kDefaultDeltaMode) const;
    /// All conditional moments of one mode.
    MomentVector conditional_moments(std::size_t mode, double delta_mode = kDefaultDeltaMode) const;
};

struct McmOptions {
    IntegratorOptions integrator;
    double delta_mode = kDefaultDeltaMode;
};

ConditionalMomentState solve_mcm(const ReactionNetwork& network, const StatePartition& partition, int M, double t,
                                 const McmOptions& opts = {});

/// Unconditional raw moments over all species: partial moments summed over
/// modes, with small-species factors taken from each mode's state.
MomentVector unconditional_moments(const ConditionalMomentState& state, int M);

}  // namespace mcmrecon
