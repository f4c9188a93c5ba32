#include "mcmrecon/moment_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

constexpr std::size_t kConstSource = std::numeric_limits<std::size_t>::max();

std::string describe_mode(const std::vector<int>& y) {
    if (y.empty()) return "()";
    std::string s = "(";
    for (std::size_t i = 0; i < y.size(); ++i) s += (i ? "," : "") + std::to_string(y[i]);
    return s + ")";
}

}  // namespace

std::size_t MomentODESystem::variable_index(std::size_t mode, const MultiIndex& alpha) const {
    const std::size_t per_mode = large_indices_.size() + (tracks_probabilities_ ? 1 : 0);
    if (mode >= partition_.num_modes()) throw std::out_of_range("mode index out of range");
    if (total_order(alpha) == 0) {
        if (!tracks_probabilities_) throw std::out_of_range("mode probability is not an unknown of this system");
        return mode * per_mode;
    }
    auto it = large_position_.find(alpha);
    if (it == large_position_.end()) throw std::out_of_range("moment " + format_multi_index(alpha) + " is not tracked");
    return mode * per_mode + (tracks_probabilities_ ? 1 : 0) + it->second;
}

MomentODESystem generate_moment_system(const ReactionNetwork& net, const StatePartition& part, int M) {
    if (M < 2) throw ValidationError("moment order must be at least 2, got " + std::to_string(M));
    if (part.modes.empty()) throw ValidationError("partition has no modes");
    const std::size_t n = net.num_species();

    MomentODESystem sys;
    sys.partition_ = part;
    sys.order_ = M;
    sys.tracks_probabilities_ = !part.small.empty();
    sys.large_indices_ = enumerate_multi_indices(part.large.size(), 1, M);
    for (std::size_t k = 0; k < sys.large_indices_.size(); ++k) sys.large_position_.emplace(sys.large_indices_[k], k);

    const MultiIndex zero(part.large.size(), 0);
    for (std::size_t u = 0; u < part.num_modes(); ++u) {
        if (sys.tracks_probabilities_) sys.variables_.push_back({u, zero, true});
        for (const auto& a : sys.large_indices_) sys.variables_.push_back({u, a, false});
    }
    const std::size_t num_vars = sys.variables_.size();

    std::map<std::pair<std::size_t, MultiIndex>, std::size_t> closed_index;
    auto partial_source = [&](std::size_t u, const MultiIndex& beta) -> std::size_t {
        const int order = total_order(beta);
        if (order == 0) return sys.tracks_probabilities_ ? sys.variable_index(u, beta) : kConstSource;
        if (order <= M) return sys.variable_index(u, beta);
        auto key = std::make_pair(u, beta);
        if (auto it = closed_index.find(key); it != closed_index.end()) return num_vars + it->second;
        MomentODESystem::ClosedMoment cm;
        cm.mode = u;
        cm.alpha = beta;
        cm.guard_var = sys.tracks_probabilities_ ? static_cast<std::ptrdiff_t>(sys.variable_index(u, zero)) : -1;
        // Conditional closure: E[Z^b|y] = sum c prod_f E[Z^f|y]; the partial
        // moment is p * that, and every E[Z^f|y] = m_f / p.
        for (const auto& [mono, c] : closure_substitute(beta, M)) {
            MomentODESystem::ProductTerm t;
            t.coef = c;
            for (const auto& f : mono.factors) t.vars.push_back(sys.variable_index(u, f));
            std::sort(t.vars.begin(), t.vars.end());
            t.guard_power = sys.tracks_probabilities_ ? 1 - static_cast<int>(mono.factors.size()) : 0;
            cm.terms.push_back(std::move(t));
        }
        sys.closure_notes_.push_back("mode " + describe_mode(part.modes[u]) + ": E[Z^" + format_multi_index(beta) +
                                     "] closed by zero central moment at order " + std::to_string(M));
        closed_index.emplace(key, sys.closed_.size());
        sys.closed_.push_back(std::move(cm));
        return num_vars + sys.closed_.size() - 1;
    };

    std::vector<std::map<std::size_t, double>> eqs(num_vars);
    auto accumulate = [&](std::size_t eq, std::size_t u, const MultiPolynomial& poly, double sign) {
        for (const auto& [beta, c] : poly.terms()) {
            auto& slot = eqs[eq][partial_source(u, beta)];
            slot += sign * c;
        }
    };

    const auto mask = part.large_mask(n);
    std::vector<MultiIndex> lhs_indices;
    if (sys.tracks_probabilities_) lhs_indices.push_back(zero);
    lhs_indices.insert(lhs_indices.end(), sys.large_indices_.begin(), sys.large_indices_.end());

    for (std::size_t u = 0; u < part.num_modes(); ++u) {
        std::vector<int> fixed(n, 0);
        for (std::size_t k = 0; k < part.small.size(); ++k) fixed[part.small[k]] = part.modes[u][k];
        for (std::size_t j = 0; j < net.num_reactions(); ++j) {
            MultiPolynomial a = propensity_polynomial(net, j).restrict(mask, fixed);
            if (a.is_zero()) continue;
            const auto v = net.reactions[j].change();
            const auto vhat = part.small_part(v);
            const auto vtilde = part.large_part(v);
            const bool switches = std::any_of(vhat.begin(), vhat.end(), [](int d) { return d != 0; });
            if (!switches) {
                for (const auto& alpha : sys.large_indices_) {
                    MultiPolynomial shift = MultiPolynomial::shifted_power(alpha, vtilde) - MultiPolynomial::monomial(alpha);
                    accumulate(sys.variable_index(u, alpha), u, a * shift, 1.0);
                }
                continue;
            }
            std::vector<int> target = part.modes[u];
            for (std::size_t k = 0; k < target.size(); ++k) target[k] += vhat[k];
            auto ut = part.mode_index(target);
            if (!ut)
                throw ValidationError("mode set is not closed: reaction " + std::to_string(j + 1) + " leads from mode " +
                                      describe_mode(part.modes[u]) + " to " + describe_mode(target));
            for (const auto& alpha : lhs_indices) {
                accumulate(sys.variable_index(u, alpha), u, a * MultiPolynomial::monomial(alpha), -1.0);
                accumulate(sys.variable_index(*ut, alpha), u, a * MultiPolynomial::shifted_power(alpha, vtilde), 1.0);
            }
        }
    }

    const std::size_t const_index = num_vars + sys.closed_.size();
    sys.equations_.resize(num_vars);
    for (std::size_t e = 0; e < num_vars; ++e) {
        for (const auto& [src, c] : eqs[e]) {
            if (c == 0.0) continue;
            sys.equations_[e].push_back({c, src == kConstSource ? const_index : src});
        }
    }
    return sys;
}

void MomentODESystem::rhs(std::span<const double> y, std::span<double> dydt, double delta_mode) const {
    const std::size_t nv = variables_.size();
    std::vector<double> ext(nv + closed_.size() + 1);
    std::copy(y.begin(), y.end(), ext.begin());
    for (std::size_t k = 0; k < closed_.size(); ++k) {
        const auto& cm = closed_[k];
        double guard = 1.0;
        if (cm.guard_var >= 0) guard = std::max(y[cm.guard_var], delta_mode);
        double sum = 0.0;
        for (const auto& t : cm.terms) {
            double v = t.coef;
            for (std::size_t i : t.vars) v *= y[i];
            for (int p = t.guard_power; p < 0; ++p) v /= guard;
            for (int p = 0; p < t.guard_power; ++p) v *= guard;
            sum += v;
        }
        ext[nv + k] = sum;
    }
    ext.back() = 1.0;
    for (std::size_t e = 0; e < nv; ++e) {
        double d = 0.0;
        for (const auto& t : equations_[e]) d += t.coef * ext[t.source];
        dydt[e] = d;
    }
}

OdeSystem MomentODESystem::ode(double delta_mode) const {
    return OdeSystem{num_equations(), [this, delta_mode](double, std::span<const double> y, std::span<double> dy) {
                         rhs(y, dy, delta_mode);
                     }};
}

std::vector<double> MomentODESystem::initial_state(const ReactionNetwork& net) const {
    std::vector<double> y(num_equations(), 0.0);
    for (const auto& init : net.initial) {
        auto u = partition_.mode_index(partition_.small_part(init.state));
        if (!u) throw ValidationError("initial state lies in no mode of the partition");
        if (tracks_probabilities_) y[variable_index(*u, MultiIndex(partition_.large.size(), 0))] += init.probability;
        auto z = partition_.large_part(init.state);
        for (const auto& alpha : large_indices_) {
            double v = init.probability;
            for (std::size_t i = 0; i < z.size(); ++i) v *= std::pow(double(z[i]), alpha[i]);
            y[variable_index(*u, alpha)] += v;
        }
    }
    return y;
}

SymbolicRhs MomentODESystem::expand(std::size_t equation) const {
    SymbolicRhs out;
    auto add = [&out](SymbolicMonomial m, double c) {
        if (m.guard_power == 0) m.guard_var = -1;
        auto [it, inserted] = out.try_emplace(std::move(m), c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) out.erase(it);
        }
    };
    const std::size_t nv = variables_.size();
    for (const auto& t : equations_.at(equation)) {
        if (t.source < nv) {
            add({{t.source}, -1, 0}, t.coef);
        } else if (t.source == nv + closed_.size()) {
            add({{}, -1, 0}, t.coef);
        } else {
            const auto& cm = closed_[t.source - nv];
            for (const auto& pt : cm.terms) add({pt.vars, cm.guard_var, pt.guard_power}, t.coef * pt.coef);
        }
    }
    return out;
}

void rethrow_integration_error(const IntegrationError& e, const MomentODESystem& sys) {
    std::string what = e.what();
    if (e.component() >= 0 && static_cast<std::size_t>(e.component()) < sys.num_equations()) {
        const auto& v = sys.variables()[e.component()];
        what += v.is_probability ? "; offending unknown: probability of mode " + std::to_string(v.mode)
                                 : "; offending moment alpha=" + format_multi_index(v.alpha) +
                                       (sys.tracks_probabilities() ? " in mode " + std::to_string(v.mode) : "");
    }
    throw IntegrationError(e.reason(), e.time(), e.component(), what);
}

}  // namespace mcmrecon
