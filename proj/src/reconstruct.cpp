#include "mcmrecon/reconstruct.hpp"

#include <algorithm>
#include <cctype>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

std::string mode_label(const std::vector<int>& mode) {
    std::string s = "(";
    for (std::size_t i = 0; i < mode.size(); ++i) s += (i ? "," : "") + std::to_string(mode[i]);
    return s + ")";
}

void check_request(const std::vector<std::string>& species, int M, int solved_order) {
    if (species.empty() || species.size() > 2) throw ValidationError("reconstruction takes one or two species");
    if (species.size() == 2 && species[0] == species[1]) throw ValidationError("species pair must be distinct");
    if (M < 2) throw ValidationError("reconstruction order must be at least 2");
    if (solved_order < M + 1)
        throw ValidationError("reconstruction at order " + std::to_string(M) + " needs moments solved at order " +
                              std::to_string(M + 1) + " (have " + std::to_string(solved_order) + ")");
}

/// Invert moments of the species at positions `idx` of `mv`.
ComponentDiagnostics invert(const MomentVector& mv, const std::vector<std::size_t>& idx,
                            const std::vector<std::string>& names, int M, const ReconOptions& opts) {
    ComponentDiagnostics c;
    if (idx.size() == 1) {
        auto sol = solve_maxent_1d(MomentSequence1D(mv.pure_sequence(idx[0], M)), M, opts.maxent);
        c.support_lower = {sol.x_left};
        c.support_upper = {sol.x_right};
        c.iterations = sol.iterations;
        c.support_rounds = sol.support_rounds;
        c.fallback_support = sol.used_fallback_support;
        for (double r : sol.residuals) c.max_residual = std::max(c.max_residual, r);
        c.distribution = sol.distribution(names[0]);
    } else {
        auto table = MomentTable2D::from_moments(mv, idx[0], idx[1], M, {names[0], names[1]});
        auto sol = solve_maxent_2d(table, M, opts.maxent2d);
        c.support_lower = {sol.x_left, sol.y_left};
        c.support_upper = {sol.x_right, sol.y_right};
        c.iterations = sol.iterations;
        c.support_rounds = sol.support_rounds;
        for (double r : sol.residuals) c.max_residual = std::max(c.max_residual, r);
        c.distribution = sol.distribution({names[0], names[1]});
    }
    c.included = true;
    return c;
}

Reconstruction unconditional(ReconMethod method, const ReactionNetwork& net, const MomentVector& mv,
                             const std::vector<std::string>& species, int M, const ReconOptions& opts) {
    std::vector<std::size_t> idx;
    for (const auto& s : species) idx.push_back(net.species_index(s));
    Reconstruction r;
    r.method = method;
    r.species = species;
    r.order = M;
    auto c = invert(mv, idx, species, M, opts);
    c.label = "unconditional";
    r.distribution = c.distribution;
    r.components.push_back(std::move(c));
    return r;
}

}  // namespace

std::string method_name(ReconMethod method) {
    switch (method) {
        case ReconMethod::WsMcm: return "wsMCM";
        case ReconMethod::JMcm: return "jMCM";
        case ReconMethod::Mm: return "MM";
    }
    return "";
}

ReconMethod parse_method(const std::string& name) {
    std::string n;
    for (char ch : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (n == "wsmcm") return ReconMethod::WsMcm;
    if (n == "jmcm") return ReconMethod::JMcm;
    if (n == "mm") return ReconMethod::Mm;
    throw ValidationError("unknown reconstruction method '" + name + "' (expected wsMCM, jMCM or MM)");
}

Reconstruction reconstruct_mm(const ReactionNetwork& net, const MomentVector& moments,
                              const std::vector<std::string>& species, int M, const ReconOptions& opts) {
    check_request(species, M, moments.order);
    return unconditional(ReconMethod::Mm, net, moments, species, M, opts);
}

Reconstruction reconstruct_jmcm(const ReactionNetwork& net, const ConditionalMomentState& state,
                                const std::vector<std::string>& species, int M, const ReconOptions& opts) {
    check_request(species, M, state.order);
    return unconditional(ReconMethod::JMcm, net, unconditional_moments(state, M), species, M, opts);
}

Reconstruction reconstruct_wsmcm(const ReactionNetwork& net, const ConditionalMomentState& state,
                                 const std::vector<std::string>& species, int M, const ReconOptions& opts) {
    check_request(species, M, state.order);
    const auto& part = state.partition;

    // Position of each requested species among the small or the large ones.
    struct Axis {
        bool small;
        std::size_t pos;
    };
    std::vector<Axis> axes;
    std::vector<std::size_t> large_idx;
    std::vector<std::string> large_names;
    for (const auto& s : species) {
        const std::size_t i = net.species_index(s);
        auto it = std::find(part.small.begin(), part.small.end(), i);
        if (it != part.small.end()) {
            axes.push_back({true, static_cast<std::size_t>(it - part.small.begin())});
        } else {
            const auto pos = static_cast<std::size_t>(
                std::find(part.large.begin(), part.large.end(), i) - part.large.begin());
            axes.push_back({false, large_idx.size()});
            large_idx.push_back(pos);
            large_names.push_back(s);
        }
    }

    Reconstruction r;
    r.method = ReconMethod::WsMcm;
    r.species = species;
    r.order = M;

    for (std::size_t u = 0; u < part.num_modes(); ++u) {
        ComponentDiagnostics c;
        const double p = state.probabilities[u];
        if (p < opts.delta_mode) {
            c.failure = "mode probability below delta_mode";
        } else {
            try {
                if (!large_idx.empty()) c = invert(state.conditional_moments(u, opts.delta_mode), large_idx,
                                                   large_names, M, opts);
                c.included = true;
                c.failure.clear();
            } catch (const Error& e) {
                c = ComponentDiagnostics{};
                c.failure = std::string(e.kind()) + ": " + e.what();
                r.partial = true;
            }
        }
        c.mode = part.modes[u];
        c.label = mode_label(c.mode);
        c.weight = p;
        if (c.included) {
            // Place the large-species result on the requested axes, small ones fixed at the mode.
            std::vector<std::string> names(species);
            std::vector<int> lower(species.size()), extent(species.size());
            for (std::size_t a = 0; a < axes.size(); ++a) {
                if (axes[a].small) {
                    lower[a] = part.modes[u][axes[a].pos];
                    extent[a] = 1;
                } else {
                    lower[a] = c.distribution.lower[axes[a].pos];
                    extent[a] = c.distribution.extent[axes[a].pos];
                }
            }
            auto d = DiscreteDistribution::box(names, lower, extent);
            for (std::size_t k = 0; k < d.size(); ++k) {
                if (large_idx.empty()) {
                    d.values[k] = 1.0;
                    continue;
                }
                const auto pt = d.point(k);
                std::vector<int> inner;
                for (std::size_t a = 0; a < axes.size(); ++a)
                    if (!axes[a].small) inner.push_back(pt[a]);
                d.values[k] = c.distribution.at(inner);
            }
            c.distribution = std::move(d);
            c.support_lower = c.distribution.lower;
            c.support_upper.clear();
            for (std::size_t a = 0; a < axes.size(); ++a) c.support_upper.push_back(c.distribution.upper(a));
        }
        r.components.push_back(std::move(c));
    }

    double total = 0.0;
    std::vector<int> lo, hi;
    for (const auto& c : r.components) {
        if (!c.included) continue;
        total += c.weight;
        if (lo.empty()) {
            lo = c.support_lower;
            hi = c.support_upper;
        } else {
            for (std::size_t a = 0; a < lo.size(); ++a) {
                lo[a] = std::min(lo[a], c.support_lower[a]);
                hi[a] = std::max(hi[a], c.support_upper[a]);
            }
        }
    }
    if (lo.empty()) {
        std::string why;
        for (const auto& c : r.components) why += "; " + c.label + ": " + c.failure;
        throw ReconstructionError("every mode failed" + why);
    }

    std::vector<int> extent(lo.size());
    for (std::size_t a = 0; a < lo.size(); ++a) extent[a] = hi[a] - lo[a] + 1;
    r.distribution = DiscreteDistribution::box(species, lo, extent);
    r.provenance.assign(r.distribution.size(), {});
    for (std::size_t k = 0; k < r.distribution.size(); ++k) {
        const auto pt = r.distribution.point(k);
        double v = 0.0;
        for (std::size_t ci = 0; ci < r.components.size(); ++ci) {
            const auto& c = r.components[ci];
            if (!c.included || !c.distribution.contains(pt)) continue;
            v += c.weight * c.distribution.at(pt);
            r.provenance[k].push_back(ci);
        }
        r.distribution.values[k] = v / total;
    }
    return r;
}

Reconstruction reconstruct(ReconMethod method, const ReactionNetwork& net, const MomentVector* mm,
                           const ConditionalMomentState* mcm, const std::vector<std::string>& species, int M,
                           const ReconOptions& opts) {
    if (method == ReconMethod::Mm) {
        if (!mm) throw ValidationError("MM reconstruction needs an MM solution");
        return reconstruct_mm(net, *mm, species, M, opts);
    }
    if (!mcm) throw ValidationError(method_name(method) + " reconstruction needs an MCM solution");
    return method == ReconMethod::JMcm ? reconstruct_jmcm(net, *mcm, species, M, opts)
                                       : reconstruct_wsmcm(net, *mcm, species, M, opts);
}

}  // namespace mcmrecon
