#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcmrecon/cme.hpp"
#include "mcmrecon/distribution.hpp"
#include "mcmrecon/mcm.hpp"
#include "mcmrecon/moments.hpp"

namespace mcmrecon {

/// Comparison set of linf_percent_error: oracle states with p >= this * max p.
inline constexpr double kDefaultDeltaSupp = 1e-6;

/// max over species i of |mu - mu_oracle| / mu_oracle for the pure moments
/// E[X_i^l]. Indices with a zero oracle moment are skipped and reported in
/// `warnings` when given.
double moment_rel_error(const MomentVector& approx, const MomentVector& oracle, int l,
                        std::vector<std::string>* warnings = nullptr);

/// Same over conditional moments of the large species, maximized over the
/// modes with oracle probability >= delta_mode.
double conditional_rel_error(const ConditionalMomentState& approx, const std::vector<ModeConditional>& oracle, int l,
                             double delta_mode = kDefaultDeltaMode, std::vector<std::string>* warnings = nullptr);

/// max over modes of |p - p_oracle| / p_oracle.
double mode_probability_error(const ConditionalMomentState& approx, const std::vector<ModeConditional>& oracle);

/// 100 * max |q - p| / p over oracle states with p >= delta_supp * max p;
/// q is 0 outside its box. Throws ValidationError on an empty comparison set
/// or mismatched axes.
double linf_percent_error(const DiscreteDistribution& recon, const DiscreteDistribution& oracle,
                          double delta_supp = kDefaultDeltaSupp);

struct ErrorReport {
    std::string model;
    /// "MM", "MCM", "wsMCM", "jMCM", or a per-mode label such as "mode(1,0)".
    std::string method;
    int order = 0;
    double time = 0.0;
    std::vector<std::string> species;
    std::map<int, double> eps_moments;
    std::optional<double> linf_percent;
    /// Set when the run behind this entry failed.
    std::string failure;
    std::size_t eq_count = 0;
    double runtime_seconds = 0.0;
    nlohmann::json solver_diagnostics = nlohmann::json::object();

    bool operator==(const ErrorReport&) const = default;
};

nlohmann::json to_json(const ErrorReport& report);
ErrorReport error_report_from_json(const nlohmann::json& j);

enum class ReportFormat { Json, Csv };

/// JSON: {"delta_supp": ..., "entries": [...]}. CSV: one block per species
/// set, rows = M, columns = methods in first-seen order; cells hold
/// linf_percent ("fail" when the run failed, empty when absent).
std::string emit_report(const std::vector<ErrorReport>& entries, ReportFormat format,
                        double delta_supp = kDefaultDeltaSupp);

std::vector<ErrorReport> parse_report_json(const std::string& text);

}  // namespace mcmrecon
