#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "mcmrecon/distribution.hpp"
#include "mcmrecon/model.hpp"
#include "mcmrecon/ode.hpp"
#include "mcmrecon/partition.hpp"

namespace mcmrecon {

/// States reachable from the initial distribution without leaving the box
/// {0..bounds_i}. States are kept in lexicographic order.
class StateSpace {
public:
    static StateSpace reachable(const ReactionNetwork& network, std::vector<int> bounds);

    const std::vector<int>& bounds() const { return bounds_; }
    const std::vector<std::vector<int>>& states() const { return states_; }
    std::size_t size() const { return states_.size(); }
    std::optional<std::size_t> find(const std::vector<int>& state) const;

private:
    std::vector<int> bounds_;
    std::vector<std::vector<int>> states_;
    std::map<std::vector<int>, std::size_t> index_;
};

/// Transition-rate matrix Q in compressed rows: row = source state.
/// Off-diagonal Q(x, x+v_j) = alpha_j(x) for targets inside the space; the
/// diagonal holds minus the total outflow, including transitions that leave
/// the space, so rows sum to <= 0.
struct SparseGenerator {
    std::size_t n = 0;
    std::vector<std::size_t> row_start;
    std::vector<std::size_t> column;
    std::vector<double> rate;
    std::vector<double> diagonal;

    /// out = Q^T p, i.e. dp/dt of the truncated master equation.
    void apply_transpose(std::span<const double> p, std::span<double> out) const;
    double row_sum(std::size_t row) const;
};

SparseGenerator build_generator(const ReactionNetwork& network, const StateSpace& space);

/// Per-species bound implied by a non-negative conservation law, if any.
std::vector<std::optional<int>> conservation_bounds(const ReactionNetwork& network);

struct CmeOptions {
    IntegratorOptions integrator{1e-8, 1e-13, 10'000'000, 0.0};
    /// Bounds are doubled until 1 - sum(p) drops to this level.
    double max_defect = 1e-8;
    int max_rounds = 6;
    /// User bounds; auto-selected when absent.
    std::optional<std::vector<int>> bounds;
};

struct CmeSolution {
    StateSpace space;
    std::vector<double> probabilities;  ///< over space.states()
    DiscreteDistribution joint;         ///< same data on the bounding box
    double mass_defect = 0.0;
    int rounds = 0;
};

/// Integrate the truncated master equation up to time t.
/// Throws TruncationError if the defect stays above max_defect.
CmeSolution solve_cme(const ReactionNetwork& network, double t, const CmeOptions& opts = {});

/// Starting bounds: conservation bounds where they exist, otherwise
/// mean + 10 std over a second-order moment pilot run up to t.
std::vector<int> initial_bounds(const ReactionNetwork& network, double t);

struct ModeConditional {
    std::vector<int> mode;
    double probability = 0.0;
    /// False when probability == 0; then `conditional` and `moments` are empty.
    bool defined = false;
    DiscreteDistribution conditional;  ///< over the large species
    MomentVector moments;              ///< E[Z^alpha | mode]
};

/// Mode probabilities and conditional distributions of the large species.
std::vector<ModeConditional> conditional_from_joint(const DiscreteDistribution& joint, const StatePartition& partition,
                                                    int M);

}  // namespace mcmrecon
