#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcmrecon/polynomial.hpp"

namespace mcmrecon {

/// One mass-action reaction. Stoichiometries are per species, in
/// declaration order of the owning network.
struct Reaction {
    std::vector<int> reactants;
    std::vector<int> products;
    double rate = 0.0;
    /// Parameter the rate was taken from; empty when given as a literal.
    std::string rate_name;

    std::vector<int> change() const;
    int molecularity() const;
    /// c * prod_i C(x_i, l_i), i.e. the number of reactant combinations.
    double propensity(std::span<const int> x) const;

    bool operator==(const Reaction&) const = default;
};

struct InitialState {
    std::vector<int> state;
    double probability = 0.0;

    bool operator==(const InitialState&) const = default;
};

/// A validated network. Immutable once returned from parse_model.
struct ReactionNetwork {
    std::vector<std::string> species;
    std::vector<Reaction> reactions;
    std::vector<InitialState> initial;
    /// Declared parameters in declaration order; unset ones have no value.
    std::vector<std::pair<std::string, std::optional<double>>> params;
    /// Species declared small by a `partition:` line (may be empty).
    std::vector<std::string> small_species;

    std::size_t num_species() const { return species.size(); }
    std::size_t num_reactions() const { return reactions.size(); }
    /// Throws ValidationError for an unknown name.
    std::size_t species_index(std::string_view name) const;

    bool operator==(const ReactionNetwork&) const = default;
};

using ParamOverrides = std::map<std::string, double>;

/// Parse the line-oriented model format:
///
///     species: Doff Don R P
///     param tau_on 0.05        # value optional; required later if unset
///     reaction: Doff + P -> Don + P @ tau_on_p
///     reaction: R -> 0 @ 4.0   # '0' or nothing for the empty complex
///     init: (1,0,4,10) 1.0
///     partition: small Doff Don
///
/// `overrides` replace (or supply) parameter values before rates are
/// resolved. Same-species bimolecular reactions use c*x(x-1)/2.
ReactionNetwork parse_model(std::string_view text, const ParamOverrides& overrides = {});
ReactionNetwork load_model(const std::string& path, const ParamOverrides& overrides = {});

/// Inverse of parse_model (rates emitted by parameter name where known).
std::string serialize_model(const ReactionNetwork& network);

/// Throws ValidationError when an invariant is broken.
void validate(const ReactionNetwork& network);

/// alpha_j as a polynomial in the species counts; degree <= 2.
MultiPolynomial propensity_polynomial(const ReactionNetwork& network, std::size_t j);

}  // namespace mcmrecon
