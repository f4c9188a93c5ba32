#include "mcmrecon/mcm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

constexpr std::size_t kMaxModes = 10000;

}  // namespace

StatePartition enumerate_modes(const ReactionNetwork& net, std::vector<std::size_t> small) {
    const std::size_t n = net.num_species();
    std::sort(small.begin(), small.end());
    small.erase(std::unique(small.begin(), small.end()), small.end());
    StatePartition part;
    part.small = small;
    for (std::size_t i = 0; i < n; ++i)
        if (!std::binary_search(small.begin(), small.end(), i)) part.large.push_back(i);
    for (std::size_t i : small)
        if (i >= n) throw ValidationError("small species index out of range");

    const auto mask = part.large_mask(n);
    std::deque<std::vector<int>> queue;
    auto add_mode = [&](std::vector<int> y) {
        if (part.mode_index(y)) return;
        if (part.modes.size() >= kMaxModes)
            throw ValidationError("small species are not confined to a finite set (more than " +
                                  std::to_string(kMaxModes) + " modes); choose a different partition");
        part.modes.push_back(y);
        queue.push_back(std::move(y));
    };
    for (const auto& init : net.initial) add_mode(part.small_part(init.state));
    while (!queue.empty()) {
        auto y = std::move(queue.front());
        queue.pop_front();
        std::vector<int> fixed(n, 0);
        for (std::size_t k = 0; k < small.size(); ++k) fixed[small[k]] = y[k];
        for (std::size_t j = 0; j < net.num_reactions(); ++j) {
            const auto v = part.small_part(net.reactions[j].change());
            if (std::all_of(v.begin(), v.end(), [](int d) { return d == 0; })) continue;
            if (propensity_polynomial(net, j).restrict(mask, fixed).is_zero()) continue;
            std::vector<int> target = y;
            for (std::size_t k = 0; k < target.size(); ++k) target[k] += v[k];
            if (std::any_of(target.begin(), target.end(), [](int x) { return x < 0; })) continue;
            add_mode(std::move(target));
        }
    }
    return part;
}

StatePartition make_partition(const ReactionNetwork& net, const std::vector<std::string>& small_names) {
    const auto& names = small_names.empty() ? net.small_species : small_names;
    std::vector<std::size_t> small;
    for (const auto& s : names) small.push_back(net.species_index(s));
    return enumerate_modes(net, std::move(small));
}

MomentODESystem generate_mcm_system(const ReactionNetwork& net, const StatePartition& part, int M) {
    return generate_moment_system(net, part, M);
}

double ConditionalMomentState::conditional(std::size_t mode, const MultiIndex& alpha, double delta_mode) const {
    if (total_order(alpha) == 0) return 1.0;
    return partial.at(mode).at(alpha) / std::max(probabilities.at(mode), delta_mode);
}

MomentVector ConditionalMomentState::conditional_moments(std::size_t mode, double delta_mode) const {
    MomentVector mv;
    mv.num_species = partition.large.size();
    mv.order = order;
    for (const auto& [alpha, v] : partial.at(mode)) mv.values.emplace(alpha, conditional(mode, alpha, delta_mode));
    return mv;
}

ConditionalMomentState solve_mcm(const ReactionNetwork& net, const StatePartition& part, int M, double t,
                                 const McmOptions& opts) {
    auto sys = generate_mcm_system(net, part, M);
    auto y0 = sys.initial_state(net);
    std::vector<double> y;
    try {
        y = integrate(sys.ode(opts.delta_mode), y0, 0.0, t, opts.integrator).y;
    } catch (const IntegrationError& e) {
        rethrow_integration_error(e, sys);
    }
    ConditionalMomentState st;
    st.partition = part;
    st.order = M;
    st.time = t;
    st.equations = sys.num_equations();
    st.probabilities.resize(part.num_modes());
    st.partial.resize(part.num_modes());
    const MultiIndex zero(part.large.size(), 0);
    for (std::size_t u = 0; u < part.num_modes(); ++u) {
        st.probabilities[u] = sys.tracks_probabilities() ? y[sys.variable_index(u, zero)] : 1.0;
        for (const auto& alpha : sys.large_indices()) st.partial[u].emplace(alpha, y[sys.variable_index(u, alpha)]);
    }
    double total = 0.0;
    for (double p : st.probabilities) total += p;
    if (std::abs(total - 1.0) > 1e-6)
        throw IntegrationError(IntegrationError::Reason::NonFinite, t, -1,
                               "mode probabilities drifted to a total of " + std::to_string(total));
    return st;
}

MomentVector unconditional_moments(const ConditionalMomentState& st, int M) {
    const auto& part = st.partition;
    const std::size_t n = part.small.size() + part.large.size();
    if (M > st.order) throw std::invalid_argument("requested order exceeds the solved order");
    MomentVector mv;
    mv.num_species = n;
    mv.order = M;
    for (const auto& alpha : enumerate_multi_indices(n, 1, M)) {
        MultiIndex za;
        for (std::size_t i : part.large) za.push_back(alpha[i]);
        const bool pure_small = total_order(za) == 0;
        double sum = 0.0;
        for (std::size_t u = 0; u < part.num_modes(); ++u) {
            double ymono = 1.0;
            for (std::size_t k = 0; k < part.small.size(); ++k)
                ymono *= std::pow(double(part.modes[u][k]), alpha[part.small[k]]);
            if (ymono == 0.0) continue;
            sum += ymono * (pure_small ? st.probabilities[u] : st.partial[u].at(za));
        }
        mv.values.emplace(alpha, sum);
    }
    return mv;
}

}  // namespace mcmrecon
