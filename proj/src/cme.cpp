#include "mcmrecon/cme.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "mcmrecon/errors.hpp"
#include "mcmrecon/mm.hpp"

namespace mcmrecon {

std::optional<std::size_t> StatePartition::mode_index(std::span<const int> y) const {
    for (std::size_t u = 0; u < modes.size(); ++u)
        if (std::equal(modes[u].begin(), modes[u].end(), y.begin(), y.end())) return u;
    return std::nullopt;
}

std::vector<int> StatePartition::small_part(std::span<const int> x) const {
    std::vector<int> y;
    for (std::size_t i : small) y.push_back(x[i]);
    return y;
}

std::vector<int> StatePartition::large_part(std::span<const int> x) const {
    std::vector<int> z;
    for (std::size_t i : large) z.push_back(x[i]);
    return z;
}

std::vector<bool> StatePartition::large_mask(std::size_t n) const {
    std::vector<bool> mask(n, false);
    for (std::size_t i : large) mask.at(i) = true;
    return mask;
}

StateSpace StateSpace::reachable(const ReactionNetwork& net, std::vector<int> bounds) {
    const std::size_t n = net.num_species();
    if (bounds.size() != n) throw std::invalid_argument("state space bounds have wrong dimension");
    StateSpace space;
    space.bounds_ = std::move(bounds);
    auto inside = [&](const std::vector<int>& x) {
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] < 0 || x[i] > space.bounds_[i]) return false;
        return true;
    };
    std::map<std::vector<int>, bool> seen;
    std::deque<std::vector<int>> queue;
    for (const auto& init : net.initial) {
        if (!inside(init.state))
            throw std::invalid_argument("initial state lies outside the state-space bounds");
        if (seen.emplace(init.state, true).second) queue.push_back(init.state);
    }
    std::vector<std::vector<int>> changes;
    for (const auto& r : net.reactions) changes.push_back(r.change());
    while (!queue.empty()) {
        auto x = std::move(queue.front());
        queue.pop_front();
        for (std::size_t j = 0; j < net.num_reactions(); ++j) {
            if (net.reactions[j].propensity(x) <= 0.0) continue;
            std::vector<int> y = x;
            for (std::size_t i = 0; i < n; ++i) y[i] += changes[j][i];
            if (!inside(y)) continue;
            if (seen.emplace(y, true).second) queue.push_back(std::move(y));
        }
    }
    space.states_.reserve(seen.size());
    for (const auto& [state, _] : seen) {
        space.index_.emplace(state, space.states_.size());
        space.states_.push_back(state);
    }
    return space;
}

std::optional<std::size_t> StateSpace::find(const std::vector<int>& state) const {
    auto it = index_.find(state);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void SparseGenerator::apply_transpose(std::span<const double> p, std::span<double> out) const {
    for (std::size_t x = 0; x < n; ++x) out[x] = diagonal[x] * p[x];
    for (std::size_t x = 0; x < n; ++x) {
        const double px = p[x];
        for (std::size_t k = row_start[x]; k < row_start[x + 1]; ++k) out[column[k]] += rate[k] * px;
    }
}

double SparseGenerator::row_sum(std::size_t row) const {
    double s = diagonal[row];
    for (std::size_t k = row_start[row]; k < row_start[row + 1]; ++k) s += rate[k];
    return s;
}

SparseGenerator build_generator(const ReactionNetwork& net, const StateSpace& space) {
    SparseGenerator g;
    g.n = space.size();
    g.row_start.reserve(g.n + 1);
    g.diagonal.assign(g.n, 0.0);
    g.row_start.push_back(0);
    std::vector<std::vector<int>> changes;
    for (const auto& r : net.reactions) changes.push_back(r.change());
    for (std::size_t x = 0; x < g.n; ++x) {
        const auto& state = space.states()[x];
        for (std::size_t j = 0; j < net.num_reactions(); ++j) {
            double a = net.reactions[j].propensity(state);
            if (a <= 0.0) continue;
            g.diagonal[x] -= a;
            std::vector<int> target = state;
            for (std::size_t i = 0; i < target.size(); ++i) target[i] += changes[j][i];
            if (auto y = space.find(target)) {
                g.column.push_back(*y);
                g.rate.push_back(a);
            }
        }
        g.row_start.push_back(g.column.size());
    }
    return g;
}

std::vector<std::optional<int>> conservation_bounds(const ReactionNetwork& net) {
    const std::size_t n = net.num_species(), m = net.num_reactions();
    std::vector<std::optional<int>> bounds(n);
    std::vector<double> max_init(n, 0.0);
    for (const auto& s : net.initial)
        for (std::size_t i = 0; i < n; ++i) max_init[i] = std::max(max_init[i], double(s.state[i]));

    Eigen::MatrixXd kernel;
    if (m == 0) {
        kernel = Eigen::MatrixXd::Identity(n, n);
    } else {
        Eigen::MatrixXd st(m, n);
        for (std::size_t j = 0; j < m; ++j) {
            auto v = net.reactions[j].change();
            for (std::size_t i = 0; i < n; ++i) st(j, i) = v[i];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(st);
        kernel = lu.kernel();
        if (lu.rank() == static_cast<Eigen::Index>(n)) return bounds;
    }
    for (Eigen::Index k = 0; k < kernel.cols(); ++k) {
        Eigen::VectorXd c = kernel.col(k);
        double scale = c.cwiseAbs().maxCoeff();
        if (scale == 0.0) continue;
        c /= scale;
        if (c.minCoeff() < -1e-9) c = -c;
        if (c.minCoeff() < -1e-9) continue;  // mixed signs: no bound from this law
        double total = 0.0;
        for (const auto& s : net.initial) {
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += c[i] * s.state[i];
            total = std::max(total, v);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (c[i] <= 1e-9) continue;
            int b = static_cast<int>(std::floor(total / c[i] + 1e-9));
            bounds[i] = bounds[i] ? std::min(*bounds[i], b) : b;
        }
    }
    return bounds;
}

std::vector<int> initial_bounds(const ReactionNetwork& net, double t) {
    const std::size_t n = net.num_species();
    auto cons = conservation_bounds(net);
    std::vector<int> bounds(n, 0);
    for (const auto& s : net.initial)
        for (std::size_t i = 0; i < n; ++i) bounds[i] = std::max(bounds[i], s.state[i]);

    std::vector<double> reach(n, 0.0);
    bool pilot_ok = false;
    if (net.num_reactions() > 0 && t > 0) {
        try {
            std::vector<double> times;
            for (int k = 1; k <= 20; ++k) times.push_back(t * k / 20.0);
            auto traj = solve_mm_trajectory(net, 2, times, IntegratorOptions{1e-6, 1e-9, 2'000'000, 0.0});
            for (const auto& mv : traj) {
                for (std::size_t i = 0; i < n; ++i) {
                    double mean = mv.pure(i, 1);
                    double var = std::max(0.0, mv.pure(i, 2) - mean * mean);
                    double r = mean + 10.0 * std::sqrt(var);
                    if (!std::isfinite(r)) throw IntegrationError(IntegrationError::Reason::NonFinite, t, i, "pilot");
                    reach[i] = std::max(reach[i], r);
                }
            }
            pilot_ok = true;
        } catch (const Error&) {
            pilot_ok = false;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (cons[i]) {
            bounds[i] = *cons[i];
            continue;
        }
        int b = pilot_ok ? static_cast<int>(std::ceil(reach[i])) : 2 * bounds[i] + 20;
        bounds[i] = std::max({bounds[i], b, 10});
    }
    return bounds;
}

CmeSolution solve_cme(const ReactionNetwork& net, double t, const CmeOptions& opts) {
    const std::size_t n = net.num_species();
    auto cons = conservation_bounds(net);
    std::vector<int> bounds = opts.bounds ? *opts.bounds : initial_bounds(net, t);
    if (bounds.size() != n) throw ValidationError("bounds must have one entry per species");

    for (int round = 1;; ++round) {
        StateSpace space = StateSpace::reachable(net, bounds);
        SparseGenerator gen = build_generator(net, space);
        std::vector<double> p0(space.size(), 0.0);
        for (const auto& init : net.initial) p0[*space.find(init.state)] += init.probability;

        OdeSystem sys{space.size(), [&gen](double, std::span<const double> y, std::span<double> dy) {
                          gen.apply_transpose(y, dy);
                      }};
        auto res = integrate(sys, p0, 0.0, t, opts.integrator);
        const double mass = std::accumulate(res.y.begin(), res.y.end(), 0.0);
        const double defect = 1.0 - mass;

        if (defect <= opts.max_defect || round >= opts.max_rounds) {
            if (defect > opts.max_defect)
                throw TruncationError("probability leaked from the truncated state space is " + std::to_string(defect) +
                                      " after " + std::to_string(round) + " rounds");
            CmeSolution sol;
            std::vector<int> lo(n, std::numeric_limits<int>::max()), hi(n, 0);
            for (const auto& s : space.states())
                for (std::size_t i = 0; i < n; ++i) lo[i] = std::min(lo[i], s[i]), hi[i] = std::max(hi[i], s[i]);
            std::vector<int> ext(n);
            for (std::size_t i = 0; i < n; ++i) ext[i] = hi[i] - lo[i] + 1;
            sol.joint = DiscreteDistribution::box(net.species, lo, ext);
            sol.joint.time = t;
            for (std::size_t k = 0; k < space.size(); ++k) sol.joint.values[sol.joint.linear_index(space.states()[k])] = res.y[k];
            sol.space = std::move(space);
            sol.probabilities = std::move(res.y);
            sol.mass_defect = defect;
            sol.rounds = round;
            return sol;
        }
        bool grown = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (cons[i]) continue;
            bounds[i] = std::max(2 * bounds[i], 1);
            grown = true;
        }
        if (!grown)
            throw TruncationError("probability leaks although every species is bounded by a conservation law");
    }
}

std::vector<ModeConditional> conditional_from_joint(const DiscreteDistribution& joint, const StatePartition& part,
                                                    int M) {
    std::vector<std::string> zaxes;
    std::vector<int> zlo, zext;
    for (std::size_t i : part.large) {
        zaxes.push_back(i < joint.axes.size() ? joint.axes[i] : std::string());
        zlo.push_back(joint.lower[i]);
        zext.push_back(joint.extent[i]);
    }
    std::vector<ModeConditional> out(part.num_modes());
    for (std::size_t u = 0; u < part.num_modes(); ++u) {
        out[u].mode = part.modes[u];
        if (!zaxes.empty()) out[u].conditional = DiscreteDistribution::box(zaxes, zlo, zext);
        out[u].conditional.time = joint.time;
    }
    for (std::size_t k = 0; k < joint.values.size(); ++k) {
        const double p = joint.values[k];
        if (p == 0.0) continue;
        auto x = joint.point(k);
        auto u = part.mode_index(part.small_part(x));
        if (!u) continue;
        out[*u].probability += p;
        if (!zaxes.empty()) {
            auto z = part.large_part(x);
            out[*u].conditional.values[out[*u].conditional.linear_index(z)] += p;
        }
    }
    for (auto& mc : out) {
        mc.defined = mc.probability > 0.0;
        if (!mc.defined || zaxes.empty()) continue;
        for (double& v : mc.conditional.values) v /= mc.probability;
        mc.moments = moments_from_distribution(mc.conditional, M);
    }
    return out;
}

}  // namespace mcmrecon
