#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mcmrecon/distribution.hpp"
#include "mcmrecon/mcm.hpp"
#include "mcmrecon/moments.hpp"

namespace mcmrecon {

/// %.17g: round-trips every double.
std::string format_double(double v);

/// Header "<axis>,...,p"; one row per box point, last axis fastest.
std::string distribution_to_csv(const DiscreteDistribution& dist);
/// Missing box points read as 0. Throws ParseError.
DiscreteDistribution distribution_from_csv(std::string_view text);

/// Header "alpha,value"; alpha as "0:1:2", graded order.
std::string moments_to_csv(const MomentVector& moments);
MomentVector moments_from_csv(std::string_view text);

/// Header "mode,alpha,partial,conditional". A row with alpha "p" holds the
/// mode probability in both value columns.
std::string conditional_to_csv(const ConditionalMomentState& state, double delta_mode = kDefaultDeltaMode);
/// Reads the partial moments back; `partition` supplies the mode set.
ConditionalMomentState conditional_from_csv(std::string_view text, const StatePartition& partition, double time);

/// Write to a temporary sibling and rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace mcmrecon
