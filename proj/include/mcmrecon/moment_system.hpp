#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mcmrecon/model.hpp"
#include "mcmrecon/moments.hpp"
#include "mcmrecon/ode.hpp"
#include "mcmrecon/partition.hpp"

namespace mcmrecon {

/// One unknown of a moment system: the probability of a mode, or a partial
/// moment E[Z^alpha | mode] * p(mode) with 1 <= |alpha| <= M.
struct MomentVariable {
    std::size_t mode = 0;
    MultiIndex alpha;  ///< over the large species; all-zero for a probability
    bool is_probability = false;
};

/// A fully expanded RHS monomial: prod y[vars] * p_guard^guard_power, where
/// p_guard = max(y[guard_var], delta_mode). guard_var < 0 means no factor.
struct SymbolicMonomial {
    std::vector<std::size_t> vars;
    std::ptrdiff_t guard_var = -1;
    int guard_power = 0;

    bool operator<(const SymbolicMonomial& o) const {
        if (vars != o.vars) return vars < o.vars;
        if (guard_var != o.guard_var) return guard_var < o.guard_var;
        return guard_power < o.guard_power;
    }
    bool operator==(const SymbolicMonomial&) const = default;
};
using SymbolicRhs = std::map<SymbolicMonomial, double>;

/// Closed ODE system over mode probabilities and partial moments.
///
/// Every equation is linear in the "sources" (variables, closed moments and
/// the constant 1); each closed moment is a polynomial in the variables,
/// produced once at generation time by closure_substitute. With no small
/// species the system is exactly the method-of-moments system and the
/// single mode's probability is the constant 1 instead of an unknown.
class MomentODESystem {
public:
    struct LinearTerm {
        double coef;
        std::size_t source;
    };
    struct ProductTerm {
        double coef;
        std::vector<std::size_t> vars;
        int guard_power;
    };
    /// Partial moment of order > M in some mode, expressed through closure.
    struct ClosedMoment {
        std::size_t mode;
        MultiIndex alpha;
        std::ptrdiff_t guard_var;
        std::vector<ProductTerm> terms;
    };

    const StatePartition& partition() const { return partition_; }
    int order() const { return order_; }
    bool tracks_probabilities() const { return tracks_probabilities_; }
    const std::vector<MultiIndex>& large_indices() const { return large_indices_; }
    const std::vector<MomentVariable>& variables() const { return variables_; }
    const std::vector<ClosedMoment>& closed_moments() const { return closed_; }
    const std::vector<std::string>& closure_notes() const { return closure_notes_; }
    std::size_t num_equations() const { return variables_.size(); }

    /// Index of p(mode) (alpha all-zero) or of the partial moment.
    std::size_t variable_index(std::size_t mode, const MultiIndex& alpha) const;

    void rhs(std::span<const double> y, std::span<double> dydt, double delta_mode) const;
    OdeSystem ode(double delta_mode) const;
    /// Probabilities and partial moments of the network's initial distribution.
    std::vector<double> initial_state(const ReactionNetwork& network) const;
    /// RHS of one equation with every closed moment expanded.
    SymbolicRhs expand(std::size_t equation) const;

    friend MomentODESystem generate_moment_system(const ReactionNetwork&, const StatePartition&, int);

private:
    StatePartition partition_;
    int order_ = 0;
    bool tracks_probabilities_ = false;
    std::vector<MultiIndex> large_indices_;
    std::map<MultiIndex, std::size_t> large_position_;
    std::vector<MomentVariable> variables_;
    std::vector<std::vector<LinearTerm>> equations_;
    std::vector<ClosedMoment> closed_;
    std::vector<std::string> closure_notes_;
};

/// Generate the closed system at order M (M >= 2) for the given partition.
/// Throws ValidationError for M < 2 or when the mode set is not closed
/// under the reactions.
MomentODESystem generate_moment_system(const ReactionNetwork& network, const StatePartition& partition, int M);

class IntegrationError;
/// Rethrow an integration failure naming the offending moment or mode.
[[noreturn]] void rethrow_integration_error(const IntegrationError& error, const MomentODESystem& system);

}  // namespace mcmrecon
