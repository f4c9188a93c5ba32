#include "mcmrecon/maxent2d.hpp"

#include <algorithm>
#include <cmath>

#include "maxent_dual.hpp"
#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

detail::DualProblem make_problem(int xl, int xr, int yl, int yr, const std::vector<std::pair<int, int>>& exps,
                                 const std::vector<double>& mu, double sx, double sy) {
    const int nx = xr - xl + 1, ny = yr - yl + 1;
    const int M = exps.empty() ? 0 : exps.back().first + exps.back().second;
    detail::DualProblem pb;
    pb.features.resize(static_cast<Eigen::Index>(nx) * ny, exps.size());
    std::vector<double> px(M + 1), py(M + 1);
    for (int x = xl; x <= xr; ++x) {
        px[0] = 1.0;
        for (int k = 1; k <= M; ++k) px[k] = px[k - 1] * (x / sx);
        for (int y = yl; y <= yr; ++y) {
            py[0] = 1.0;
            for (int k = 1; k <= M; ++k) py[k] = py[k - 1] * (y / sy);
            const Eigen::Index row = static_cast<Eigen::Index>(x - xl) * ny + (y - yl);
            for (std::size_t f = 0; f < exps.size(); ++f) pb.features(row, f) = px[exps[f].first] * py[exps[f].second];
        }
    }
    pb.target = Eigen::Map<const Eigen::VectorXd>(mu.data(), mu.size());
    return pb;
}

bool zero_variance(const MomentSequence1D& m) {
    const double var = m.variance();
    const double ref = std::max(1.0, m.mean() * m.mean());
    if (var < -1e-9 * ref) throw DegenerateMoments("negative variance in a marginal slice");
    return var <= 1e-12 * ref;
}

/// Moment matrix E[m_i m_j] over monomials of degree <= M/2 must be PSD.
void require_realizable(const MomentTable2D& mt, int M) {
    const double sx = std::max(1.0, std::abs(mt.at(1, 0)) + std::sqrt(std::max(0.0, mt.at(2, 0) - mt.at(1, 0) * mt.at(1, 0))));
    const double sy = std::max(1.0, std::abs(mt.at(0, 1)) + std::sqrt(std::max(0.0, mt.at(0, 2) - mt.at(0, 1) * mt.at(0, 1))));
    std::vector<std::pair<int, int>> mono{{0, 0}};
    for (const auto& e : exponent_pairs(M / 2)) mono.push_back(e);
    const auto n = static_cast<Eigen::Index>(mono.size());
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const int r = mono[i].first + mono[j].first, l = mono[i].second + mono[j].second;
            h(i, j) = mt.at(r, l) / (std::pow(sx, r) * std::pow(sy, l));
        }
    const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues();
    if (ev.minCoeff() < -1e-9 * ev.maxCoeff()) throw DegenerateMoments("bivariate moment table is not realizable");
}

std::pair<int, int> axis_support(const MomentSequence1D& m, int M) {
    std::pair<int, int> s;
    try {
        s = initial_support(m, M);
    } catch (const DegenerateMoments&) {
        s = fallback_support(m);
    }
    while (s.second - s.first < M) {
        s.first = std::max(0, s.first - 1);
        ++s.second;
    }
    return s;
}

void fill_residuals(MaxEntSolution2D& sol, const MomentTable2D& mt) {
    const auto exps = exponent_pairs(sol.order);
    std::vector<double> m(exps.size(), 0.0);
    for (int x = sol.x_left; x <= sol.x_right; ++x)
        for (int y = sol.y_left; y <= sol.y_right; ++y) {
            const double q = sol.density(x, y);
            for (std::size_t f = 0; f < exps.size(); ++f)
                m[f] += q * std::pow(double(x), exps[f].first) * std::pow(double(y), exps[f].second);
        }
    sol.residuals.resize(exps.size());
    for (std::size_t f = 0; f < exps.size(); ++f) {
        const double mu = mt.at(exps[f].first, exps[f].second);
        sol.residuals[f] = std::abs(m[f] - mu) / std::max(1.0, std::abs(mu));
    }
}

/// Embed a 1D solution along one axis with the other fixed at `fixed`.
MaxEntSolution2D from_1d(const MaxEntSolution& s1, int axis, int fixed, int M) {
    MaxEntSolution2D sol;
    sol.order = M;
    const auto exps = exponent_pairs(M);
    sol.lambda.assign(exps.size(), 0.0);
    for (std::size_t f = 0; f < exps.size(); ++f) {
        const int own = axis == 0 ? exps[f].first : exps[f].second;
        const int other = axis == 0 ? exps[f].second : exps[f].first;
        if (other == 0 && own >= 1 && own <= s1.order) sol.lambda[f] = s1.lambda[own - 1];
    }
    if (axis == 0) {
        sol.x_left = s1.x_left, sol.x_right = s1.x_right, sol.x_scale = s1.scale;
        sol.y_left = sol.y_right = fixed;
        sol.y_scale = std::max(1.0, double(fixed));
        sol.reduced = "y";
    } else {
        sol.y_left = s1.x_left, sol.y_right = s1.x_right, sol.y_scale = s1.scale;
        sol.x_left = sol.x_right = fixed;
        sol.x_scale = std::max(1.0, double(fixed));
        sol.reduced = "x";
    }
    sol.log_z = s1.log_z;
    sol.psi = s1.psi;
    sol.iterations = s1.iterations;
    sol.support_rounds = s1.support_rounds;
    sol.gradient_norm = s1.gradient_norm;
    return sol;
}

}  // namespace

double MomentTable2D::at(int r, int l) const {
    if (r == 0 && l == 0) return 1.0;
    auto it = values.find({r, l});
    if (it == values.end())
        throw std::out_of_range("moment (" + std::to_string(r) + "," + std::to_string(l) + ") not in table");
    return it->second;
}

MomentSequence1D MomentTable2D::slice(int axis) const {
    std::vector<double> mu(order + 1);
    for (int k = 0; k <= order; ++k) mu[k] = axis == 0 ? at(k, 0) : at(0, k);
    return MomentSequence1D(std::move(mu));
}

MomentTable2D MomentTable2D::from_moments(const MomentVector& mv, std::size_t i, std::size_t j, int M,
                                          std::array<std::string, 2> names) {
    if (i == j) throw std::invalid_argument("two distinct species required");
    if (mv.order < M) throw std::invalid_argument("moment vector order below requested table order");
    MomentTable2D t;
    t.order = M;
    t.species = std::move(names);
    for (const auto& [r, l] : exponent_pairs(M)) {
        MultiIndex a(mv.num_species, 0);
        a[i] = r;
        a[j] = l;
        t.values[{r, l}] = mv[a];
    }
    return t;
}

std::size_t unknown_count(int M) { return static_cast<std::size_t>(M) * (M + 3) / 2; }

std::vector<std::pair<int, int>> exponent_pairs(int M) {
    std::vector<std::pair<int, int>> out;
    for (int d = 1; d <= M; ++d)
        for (int r = d; r >= 0; --r) out.emplace_back(r, d - r);
    return out;
}

double MaxEntSolution2D::density(int x, int y) const {
    if (x < x_left || x > x_right || y < y_left || y > y_right) return 0.0;
    const auto exps = exponent_pairs(order);
    double e = 0.0;
    for (std::size_t f = 0; f < exps.size(); ++f)
        if (lambda[f] != 0.0)
            e -= lambda[f] * std::pow(x / x_scale, exps[f].first) * std::pow(y / y_scale, exps[f].second);
    return std::exp(e - log_z);
}

DiscreteDistribution MaxEntSolution2D::distribution(const std::array<std::string, 2>& axes) const {
    auto d = DiscreteDistribution::box({axes[0], axes[1]}, {x_left, y_left},
                                       {x_right - x_left + 1, y_right - y_left + 1});
    for (std::size_t k = 0; k < d.size(); ++k) {
        const auto p = d.point(k);
        d.values[k] = density(p[0], p[1]);
    }
    return d;
}

double evaluate_density_2d(const MaxEntSolution2D& solution, int x, int y) { return solution.density(x, y); }

DualEvaluation dual_eval_2d(const Eigen::VectorXd& lambda, int x_left, int x_right, int y_left, int y_right,
                            const std::vector<double>& mu, int M, double x_scale, double y_scale) {
    const auto exps = exponent_pairs(M);
    if (static_cast<std::size_t>(lambda.size()) != exps.size() || mu.size() != exps.size())
        throw std::invalid_argument("dual_eval_2d: expected " + std::to_string(exps.size()) + " coefficients");
    if (x_right < x_left || y_right < y_left) throw std::invalid_argument("dual_eval_2d: empty support");
    auto st = detail::dual_state(make_problem(x_left, x_right, y_left, y_right, exps, mu, x_scale, y_scale), lambda);
    return {st.psi, st.log_z, std::move(st.gradient), std::move(st.hessian)};
}

MaxEntSolution2D solve_maxent_2d(const MomentTable2D& mt, int M, const MaxEntOptions2D& opts) {
    if (M < 2) throw std::invalid_argument("solve_maxent_2d needs M >= 2");
    if (mt.order < M) throw std::invalid_argument("solve_maxent_2d: moment table order below M");
    const auto sx_m = mt.slice(0), sy_m = mt.slice(1);
    const bool dx = zero_variance(sx_m), dy = zero_variance(sy_m);

    MaxEntOptions o1;
    o1.delta_psi = opts.delta_psi;
    o1.gamma0 = opts.gamma0;
    o1.max_inner_iterations = opts.max_inner_iterations;
    o1.gradient_tol = opts.gradient_tol;
    o1.residual_tol = opts.residual_tol;
    if (dx || dy) {
        MaxEntSolution2D sol;
        if (dx && dy) {
            sol.order = M;
            sol.lambda.assign(unknown_count(M), 0.0);
            sol.x_left = sol.x_right = static_cast<int>(std::lround(sx_m.mean()));
            sol.y_left = sol.y_right = static_cast<int>(std::lround(sy_m.mean()));
            sol.x_scale = std::max(1.0, double(sol.x_right));
            sol.y_scale = std::max(1.0, double(sol.y_right));
            sol.reduced = "xy";
        } else if (dy) {
            sol = from_1d(solve_maxent_1d(sx_m, M, o1), 0, static_cast<int>(std::lround(sy_m.mean())), M);
        } else {
            sol = from_1d(solve_maxent_1d(sy_m, M, o1), 1, static_cast<int>(std::lround(sx_m.mean())), M);
        }
        fill_residuals(sol, mt);
        return sol;
    }

    require_realizable(mt, M);
    auto [xl, xr] = axis_support(sx_m, M);
    auto [yl, yr] = axis_support(sy_m, M);
    const auto exps = exponent_pairs(M);
    const std::size_t K = exps.size();

    detail::NewtonOptions nopts;
    nopts.gamma0 = opts.gamma0;
    nopts.max_iterations = opts.max_inner_iterations;
    nopts.tolerance.resize(K);
    nopts.gate.resize(K);

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(K);
    double sx = 1.0, sy = 1.0;
    std::vector<double> target(K);
    bool have_prev = false;
    double prev_psi = 0.0;
    int failed = 0, rounds = 0, total_iterations = 0, retries = 0;

    for (;;) {
        const std::size_t grid = static_cast<std::size_t>(xr - xl + 1) * (yr - yl + 1);
        if (grid > opts.max_support || rounds >= opts.max_rounds)
            throw SupportExplosion("2D support grew to " + std::to_string(grid) + " points in " +
                                   std::to_string(rounds) + " extension rounds");
        const double nsx = std::max(1.0, double(xr)), nsy = std::max(1.0, double(yr));
        for (std::size_t f = 0; f < K; ++f) {
            lambda[f] *= std::pow(nsx / sx, exps[f].first) * std::pow(nsy / sy, exps[f].second);
            const double unit = std::pow(nsx, exps[f].first) * std::pow(nsy, exps[f].second);
            const double mu = mt.at(exps[f].first, exps[f].second);
            const double ref = std::max(1.0, std::abs(mu));
            target[f] = mu / unit;
            nopts.tolerance[f] = opts.gradient_tol * ref / unit;
            nopts.gate[f] = opts.residual_tol * ref / unit;
        }
        sx = nsx;
        sy = nsy;
        const auto problem = make_problem(xl, xr, yl, yr, exps, target, sx, sy);
        nopts.gamma0 = opts.gamma0;
        auto res = detail::damped_newton(problem, lambda, nopts);
        if (res.diverged) {
            ++retries;
            nopts.gamma0 = opts.retry_gamma0;
            res = detail::damped_newton(problem, Eigen::VectorXd::Zero(K), nopts);
        }
        total_iterations += res.iterations;
        ++rounds;

        bool done = false;
        if (res.converged) {
            failed = 0;
            const double psi = res.state.psi;
            if (have_prev) {
                const double change = std::abs(prev_psi - psi);
                done = change <= opts.delta_psi * std::abs(psi) || change <= 1e-12;
            }
            have_prev = true;
            prev_psi = psi;
            lambda = res.lambda;
        } else {
            have_prev = false;
            if (res.infeasible) {
                lambda.setZero();
            } else {
                if (++failed >= opts.max_failed_rounds)
                    throw NewtonDivergence("2D damped Newton failed on " + std::to_string(failed) +
                                           " consecutive supports");
                if (!res.diverged) lambda = res.lambda;
            }
        }

        if (done) {
            MaxEntSolution2D sol;
            sol.order = M;
            sol.x_left = xl, sol.x_right = xr, sol.y_left = yl, sol.y_right = yr;
            sol.x_scale = sx, sol.y_scale = sy;
            sol.lambda.assign(res.lambda.data(), res.lambda.data() + K);
            sol.log_z = res.state.log_z;
            sol.psi = res.state.psi;
            sol.iterations = total_iterations;
            sol.support_rounds = rounds;
            sol.retries = retries;
            double g = 0.0;
            for (std::size_t f = 0; f < K; ++f)
                g = std::max(g, std::abs(res.state.gradient[f]) * std::pow(sx, exps[f].first) *
                                    std::pow(sy, exps[f].second));
            sol.gradient_norm = g;
            fill_residuals(sol, mt);
            return sol;
        }
        xl = std::max(0, xl - 1);
        ++xr;
        yl = std::max(0, yl - 1);
        ++yr;
    }
}

}  // namespace mcmrecon
