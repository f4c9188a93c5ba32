#include "mcmrecon/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mcmrecon/csv_io.hpp"
#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
    return s;
}

}  // namespace

double moment_rel_error(const MomentVector& approx, const MomentVector& oracle, int l,
                        std::vector<std::string>* warnings) {
    if (approx.num_species != oracle.num_species) throw std::invalid_argument("moment vectors differ in species count");
    double worst = 0.0;
    for (std::size_t i = 0; i < oracle.num_species; ++i) {
        MultiIndex a(oracle.num_species, 0);
        a[i] = l;
        const double ref = oracle[a];
        if (ref == 0.0) {
            if (warnings) warnings->push_back("zero oracle moment " + format_multi_index(a) + " skipped");
            continue;
        }
        worst = std::max(worst, std::abs(approx[a] - ref) / std::abs(ref));
    }
    return worst;
}

double conditional_rel_error(const ConditionalMomentState& approx, const std::vector<ModeConditional>& oracle, int l,
                             double delta_mode, std::vector<std::string>* warnings) {
    const auto& part = approx.partition;
    if (oracle.size() != part.num_modes()) throw std::invalid_argument("oracle mode count differs");
    double worst = 0.0;
    for (std::size_t u = 0; u < oracle.size(); ++u) {
        if (!oracle[u].defined || oracle[u].probability < delta_mode) continue;
        for (std::size_t i = 0; i < part.large.size(); ++i) {
            MultiIndex a(part.large.size(), 0);
            a[i] = l;
            const double ref = oracle[u].moments[a];
            if (ref == 0.0) {
                if (warnings) warnings->push_back("zero oracle conditional moment " + format_multi_index(a) + " skipped");
                continue;
            }
            worst = std::max(worst, std::abs(approx.conditional(u, a, delta_mode) - ref) / std::abs(ref));
        }
    }
    return worst;
}

double mode_probability_error(const ConditionalMomentState& approx, const std::vector<ModeConditional>& oracle) {
    double worst = 0.0;
    for (std::size_t u = 0; u < oracle.size(); ++u)
        if (oracle[u].probability > 0.0)
            worst = std::max(worst, std::abs(approx.probabilities.at(u) - oracle[u].probability) / oracle[u].probability);
    return worst;
}

double linf_percent_error(const DiscreteDistribution& recon, const DiscreteDistribution& oracle, double delta_supp) {
    if (recon.dims() != oracle.dims()) throw ValidationError("distributions differ in dimension");
    for (std::size_t a = 0; a < recon.dims(); ++a)
        if (!recon.axes.empty() && !oracle.axes.empty() && !recon.axes[a].empty() && !oracle.axes[a].empty() &&
            recon.axes[a] != oracle.axes[a])
            throw ValidationError("axis '" + recon.axes[a] + "' does not match oracle axis '" + oracle.axes[a] + "'");
    double peak = 0.0;
    for (double v : oracle.values) peak = std::max(peak, v);
    const double threshold = delta_supp * peak;
    double worst = -1.0;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        const double p = oracle.values[k];
        if (!(p > 0.0) || p < threshold) continue;
        const auto pt = oracle.point(k);
        worst = std::max(worst, std::abs(recon.at(pt) - p) / p);
    }
    if (worst < 0.0) throw ValidationError("empty comparison set");
    return 100.0 * worst;
}

nlohmann::json to_json(const ErrorReport& r) {
    nlohmann::json eps = nlohmann::json::object();
    for (const auto& [l, v] : r.eps_moments) eps[std::to_string(l)] = v;
    nlohmann::json j = {
        {"model", r.model},
        {"method", r.method},
        {"M", r.order},
        {"t", r.time},
        {"species", r.species},
        {"eps_moments", eps},
        {"linf_percent", r.linf_percent ? nlohmann::json(*r.linf_percent) : nlohmann::json(nullptr)},
        {"eq_count", r.eq_count},
        {"runtime_seconds", r.runtime_seconds},
        {"solver_diagnostics", r.solver_diagnostics},
    };
    if (!r.failure.empty()) j["failure"] = r.failure;
    return j;
}

ErrorReport error_report_from_json(const nlohmann::json& j) {
    ErrorReport r;
    r.model = j.at("model").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.order = j.at("M").get<int>();
    r.time = j.at("t").get<double>();
    r.species = j.at("species").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("eps_moments").items()) r.eps_moments[std::stoi(k)] = v.get<double>();
    if (!j.at("linf_percent").is_null()) r.linf_percent = j.at("linf_percent").get<double>();
    r.eq_count = j.at("eq_count").get<std::size_t>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    r.solver_diagnostics = j.at("solver_diagnostics");
    if (j.contains("failure")) r.failure = j.at("failure").get<std::string>();
    return r;
}

std::string emit_report(const std::vector<ErrorReport>& entries, ReportFormat format, double delta_supp) {
    if (format == ReportFormat::Json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : entries) arr.push_back(to_json(e));
        nlohmann::json j = {{"delta_supp", delta_supp}, {"entries", arr}};
        return j.dump(2) + "\n";
    }

    std::vector<std::string> blocks, methods;
    for (const auto& e : entries) {
        const auto key = join(e.species, "-");
        if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
        if (std::find(methods.begin(), methods.end(), e.method) == methods.end()) methods.push_back(e.method);
    }
    std::string out = "species,M";
    for (const auto& m : methods) out += "," + m;
    out += "\n";
    for (const auto& b : blocks) {
        std::vector<int> orders;
        for (const auto& e : entries)
            if (join(e.species, "-") == b && std::find(orders.begin(), orders.end(), e.order) == orders.end())
                orders.push_back(e.order);
        std::sort(orders.begin(), orders.end());
        for (int M : orders) {
            out += b + "," + std::to_string(M);
            for (const auto& m : methods) {
                out += ",";
                for (const auto& e : entries) {
                    if (join(e.species, "-") != b || e.order != M || e.method != m) continue;
                    if (!e.failure.empty()) out += "fail";
                    else if (e.linf_percent) out += format_double(*e.linf_percent);
                    break;
                }
            }
            out += "\n";
        }
    }
    return out;
}

std::vector<ErrorReport> parse_report_json(const std::string& text) {
    std::vector<ErrorReport> out;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& e : j.at("entries")) out.push_back(error_report_from_json(e));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return out;
}

}  // namespace mcmrecon
