#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mcmrecon {

struct ReactionNetwork;

/// Split of the species into small (Y, tracked by mode probabilities) and
/// large (Z, tracked by partial moments), plus the finite mode set over Y.
struct StatePartition {
    std::vector<std::size_t> small;
    std::vector<std::size_t> large;
    /// Small-species states, one per mode. A partition with no small species
    /// has exactly one (empty) mode.
    std::vector<std::vector<int>> modes;

    std::size_t num_modes() const { return modes.size(); }
    std::optional<std::size_t> mode_index(std::span<const int> small_state) const;
    /// Small-species components of a full state.
    std::vector<int> small_part(std::span<const int> state) const;
    std::vector<int> large_part(std::span<const int> state) const;
    /// Mask over all species: true for large ones.
    std::vector<bool> large_mask(std::size_t num_species) const;
};

}  // namespace mcmrecon
