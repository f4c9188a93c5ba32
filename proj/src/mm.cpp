#include "mcmrecon/mm.hpp"

#include <numeric>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

MomentODESystem generate_mm_system(const ReactionNetwork& net, int M) {
    StatePartition all_large;
    all_large.large.resize(net.num_species());
    std::iota(all_large.large.begin(), all_large.large.end(), std::size_t{0});
    all_large.modes = {{}};
    return generate_moment_system(net, all_large, M);
}

MomentVector mm_moments(const MomentODESystem& sys, std::span<const double> y) {
    MomentVector mv;
    mv.num_species = sys.partition().large.size();
    mv.order = sys.order();
    for (const auto& alpha : sys.large_indices()) mv.values.emplace(alpha, y[sys.variable_index(0, alpha)]);
    return mv;
}

std::vector<MomentVector> solve_mm_trajectory(const ReactionNetwork& net, int M, std::span<const double> times,
                                              const IntegratorOptions& opts) {
    auto sys = generate_mm_system(net, M);
    auto y0 = sys.initial_state(net);
    std::vector<MomentVector> out;
    if (times.empty()) return out;
    try {
        auto res = integrate(sys.ode(0.0), y0, 0.0, times.back(), opts, times);
        for (const auto& cp : res.checkpoints) out.push_back(mm_moments(sys, cp.y));
    } catch (const IntegrationError& e) {
        rethrow_integration_error(e, sys);
    }
    return out;
}

MomentVector solve_mm(const ReactionNetwork& net, int M, double t, const IntegratorOptions& opts) {
    double times[1] = {t};
    return solve_mm_trajectory(net, M, times, opts).back();
}

}  // namespace mcmrecon
