#pragma once

#include <string>
#include <vector>

#include "mcmrecon/distribution.hpp"
#include "mcmrecon/maxent1d.hpp"
#include "mcmrecon/maxent2d.hpp"
#include "mcmrecon/mcm.hpp"
#include "mcmrecon/model.hpp"
#include "mcmrecon/moments.hpp"

namespace mcmrecon {

enum class ReconMethod { WsMcm, JMcm, Mm };

/// "wsMCM", "jMCM", "MM"
std::string method_name(ReconMethod method);
/// Case-insensitive; throws ValidationError for an unknown name.
ReconMethod parse_method(const std::string& name);

struct ReconOptions {
    MaxEntOptions maxent;
    MaxEntOptions2D maxent2d;
    double delta_mode = kDefaultDeltaMode;
};

/// One max-entropy inversion (or exact point) feeding a reconstruction.
struct ComponentDiagnostics {
    std::string label;
    std::vector<int> mode;  ///< small-species state; empty for unconditional inputs
    double weight = 1.0;
    bool included = false;
    std::string failure;  ///< empty on success
    std::vector<int> support_lower;
    std::vector<int> support_upper;
    int iterations = 0;
    int support_rounds = 0;
    double max_residual = 0.0;
    bool fallback_support = false;
    /// Normalized distribution of this component over the requested axes.
    DiscreteDistribution distribution;
};

struct Reconstruction {
    ReconMethod method = ReconMethod::Mm;
    std::vector<std::string> species;
    int order = 0;
    DiscreteDistribution distribution;
    /// wsMCM: indices into `components` of the modes whose support holds each point.
    std::vector<std::vector<std::size_t>> provenance;
    std::vector<ComponentDiagnostics> components;
    /// Some mode failed and was left out.
    bool partial = false;
};

/// Max-entropy inversion of the marginal slice of unconditional moments.
/// `moments.order` must be at least M + 1; only orders up to M are used.
Reconstruction reconstruct_mm(const ReactionNetwork& network, const MomentVector& moments,
                              const std::vector<std::string>& species, int M, const ReconOptions& opts = {});

/// Inversion of the unconditional moments recombined from an MCM state.
Reconstruction reconstruct_jmcm(const ReactionNetwork& network, const ConditionalMomentState& state,
                                const std::vector<std::string>& species, int M, const ReconOptions& opts = {});

/// Per-mode inversion of the conditional moments, summed with the mode
/// probabilities over the union of the mode supports. Small species in the
/// request take their value from the mode.
Reconstruction reconstruct_wsmcm(const ReactionNetwork& network, const ConditionalMomentState& state,
                                 const std::vector<std::string>& species, int M, const ReconOptions& opts = {});

Reconstruction reconstruct(ReconMethod method, const ReactionNetwork& network, const MomentVector* mm,
                           const ConditionalMomentState* mcm, const std::vector<std::string>& species, int M,
                           const ReconOptions& opts = {});

}  // namespace mcmrecon
