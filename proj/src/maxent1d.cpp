#include "mcmrecon/maxent1d.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "maxent_dual.hpp"
#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

constexpr double kRootImagTol = 1e-8;
constexpr double kHankelRcond = 1e-12;
// Shifted-determinant roots farther than this many standard deviations from
// the mean are spurious and ignored.
constexpr double kMaxRootSpread = 10.0;

/// Coefficients c_0..c_k of det [A; 1 w .. w^k] for a k x (k+1) matrix A,
/// by cofactor expansion along the bottom row.
std::vector<double> bottom_row_polynomial(const Eigen::MatrixXd& a) {
    const Eigen::Index k = a.rows();
    std::vector<double> c(k + 1);
    for (Eigen::Index j = 0; j <= k; ++j) {
        Eigen::MatrixXd minor(k, k);
        for (Eigen::Index col = 0, m = 0; col <= k; ++col) {
            if (col == j) continue;
            minor.col(m++) = a.col(col);
        }
        const double det = k == 0 ? 1.0 : minor.partialPivLu().determinant();
        c[j] = ((k + j) % 2 == 0 ? 1.0 : -1.0) * det;
    }
    return c;
}

/// Real, simple roots of sum c_j w^j; empty optional-like signal via bool.
bool real_roots(const std::vector<double>& c, std::vector<double>& roots) {
    roots.clear();
    std::size_t deg = c.size() - 1;
    const double scale = std::abs(*std::max_element(c.begin(), c.end(),
                                                    [](double a, double b) { return std::abs(a) < std::abs(b); }));
    if (scale == 0.0) return false;
    if (std::abs(c[deg]) <= 1e-14 * scale) return false;
    if (deg == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (std::size_t i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (std::size_t i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    if (es.info() != Eigen::Success) return false;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const std::complex<double> r = es.eigenvalues()[i];
        if (std::abs(r.imag()) > kRootImagTol * (1.0 + std::abs(r.real()))) return false;
        roots.push_back(r.real());
    }
    std::sort(roots.begin(), roots.end());
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (roots[i] - roots[i - 1] <= kRootImagTol * (1.0 + std::abs(roots[i]))) return false;
    return true;
}

Eigen::VectorXd hankel_spectrum(const std::vector<double>& mu, int h) {
    Eigen::MatrixXd hankel(h + 1, h + 1);
    for (int i = 0; i <= h; ++i)
        for (int j = 0; j <= h; ++j) hankel(i, j) = mu[i + j];
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hankel, Eigen::EigenvaluesOnly).eigenvalues();
}

double moment_scale(const MomentSequence1D& m) {
    return std::max(1.0, std::abs(m.mean()) + std::sqrt(std::max(0.0, m.variance())));
}

std::vector<double> scaled_moments(const std::vector<double>& mu, double s) {
    std::vector<double> out(mu.size());
    double p = 1.0;
    for (std::size_t k = 0; k < mu.size(); ++k, p *= s) out[k] = mu[k] / p;
    return out;
}

detail::DualProblem make_problem(int x_left, int x_right, const std::vector<double>& mu, double scale) {
    const int M = static_cast<int>(mu.size());
    detail::DualProblem pb;
    pb.features.resize(x_right - x_left + 1, M);
    for (int x = x_left; x <= x_right; ++x) {
        const double xs = x / scale;
        double p = 1.0;
        for (int k = 0; k < M; ++k) {
            p *= xs;
            pb.features(x - x_left, k) = p;
        }
    }
    pb.target = Eigen::Map<const Eigen::VectorXd>(mu.data(), M);
    return pb;
}

void fill_residuals(MaxEntSolution& sol, const std::vector<double>& mu) {
    sol.residuals.assign(sol.order, 0.0);
    std::vector<double> m(sol.order, 0.0);
    for (int x = sol.x_left; x <= sol.x_right; ++x) {
        const double q = sol.density(x);
        double p = 1.0;
        for (int k = 0; k < sol.order; ++k) {
            p *= x;
            m[k] += q * p;
        }
    }
    for (int k = 0; k < sol.order; ++k)
        sol.residuals[k] = std::abs(m[k] - mu[k + 1]) / std::max(1.0, std::abs(mu[k + 1]));
}

}  // namespace

MomentSequence1D::MomentSequence1D(std::vector<double> mu) : values(std::move(mu)) {
    if (values.empty() || !(values[0] > 0.0)) throw DegenerateMoments("zeroth moment must be positive");
    for (double v : values)
        if (!std::isfinite(v)) throw DegenerateMoments("moment sequence contains a non-finite value");
    const double m0 = values[0];
    for (double& v : values) v /= m0;
}

double MomentSequence1D::variance() const { return values.at(2) - values.at(1) * values.at(1); }

std::vector<double> hankel_roots(const std::vector<double>& mu, int k) {
    if (k < 1 || static_cast<int>(mu.size()) < 2 * k) throw std::invalid_argument("hankel_roots: not enough moments");
    Eigen::MatrixXd a(k, k + 1);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j <= k; ++j) a(i, j) = mu[i + j];
    std::vector<double> roots;
    if (!real_roots(bottom_row_polynomial(a), roots)) throw DegenerateMoments("Hankel roots are not real and simple");
    return roots;
}

std::pair<int, int> fallback_support(const MomentSequence1D& moments) {
    const double mu = moments.mean();
    const double sigma = std::sqrt(std::max(0.0, moments.variance()));
    int lo = static_cast<int>(std::floor(mu - 5.0 * sigma));
    int hi = static_cast<int>(std::ceil(mu + 5.0 * sigma));
    lo = std::max(lo, 0);
    hi = std::max(hi, lo);
    return {lo, hi};
}

std::pair<int, int> initial_support(const MomentSequence1D& moments, int M) {
    if (M < 2) throw std::invalid_argument("initial_support needs M >= 2");
    if (moments.order() < M) throw std::invalid_argument("initial_support: not enough moments");
    const double s = moment_scale(moments);
    const auto mu = scaled_moments(moments.values, s);
    const auto ev = hankel_spectrum(mu, M / 2);
    if (!(ev.minCoeff() > kHankelRcond * ev.maxCoeff())) throw DegenerateMoments("Hankel matrix is singular");

    const int k = M / 2;
    auto w = hankel_roots(mu, k);
    double lo = w.front();
    double hi = w.back();
    if (M % 2 == 1) {
        const int z = M / 2 + 1;
        Eigen::MatrixXd a(z - 1, z);
        for (int i = 0; i < z - 1; ++i)
            for (int j = 0; j < z; ++j) a(i, j) = mu[i + j + 1] - w.front() * mu[i + j];
        std::vector<double> eta;
        const double m1 = mu[1], sd = std::sqrt(std::max(0.0, mu[2] - mu[1] * mu[1]));
        auto plausible = [&](double r) { return std::abs(r - m1) <= kMaxRootSpread * sd; };
        if (real_roots(bottom_row_polynomial(a), eta) && !eta.empty() && plausible(eta.front()) &&
            plausible(eta.back())) {
            lo = std::min(lo, eta.front());
            hi = std::max(hi, eta.back());
        }
    }
    int xl = std::max(0, static_cast<int>(std::floor(lo * s)));
    int xr = std::max(xl, static_cast<int>(std::ceil(hi * s)));
    return {xl, xr};
}

DualEvaluation dual_eval(const Eigen::VectorXd& lambda, int x_left, int x_right, const std::vector<double>& mu,
                         double scale) {
    if (x_right < x_left) throw std::invalid_argument("dual_eval: empty support");
    if (static_cast<std::size_t>(lambda.size()) != mu.size())
        throw std::invalid_argument("dual_eval: lambda and moments differ in length");
    auto st = detail::dual_state(make_problem(x_left, x_right, mu, scale), lambda);
    return {st.psi, st.log_z, std::move(st.gradient), std::move(st.hessian)};
}

double MaxEntSolution::density(int x) const {
    if (x < x_left || x > x_right) return 0.0;
    const double xs = x / scale;
    double e = 0.0, p = 1.0;
    for (double l : lambda) {
        p *= xs;
        e -= l * p;
    }
    return std::exp(e - log_z);
}

std::vector<double> MaxEntSolution::coefficients() const {
    std::vector<double> c(order + 1);
    c[0] = log_z - 1.0;
    double p = 1.0;
    for (int k = 1; k <= order; ++k) {
        p *= scale;
        c[k] = lambda[k - 1] / p;
    }
    return c;
}

DiscreteDistribution MaxEntSolution::distribution(const std::string& axis) const {
    std::vector<double> v;
    v.reserve(x_right - x_left + 1);
    for (int x = x_left; x <= x_right; ++x) v.push_back(density(x));
    return DiscreteDistribution::one_d(axis, x_left, std::move(v));
}

double evaluate_density(const MaxEntSolution& solution, int x) { return solution.density(x); }

MaxEntSolution solve_maxent_1d(const MomentSequence1D& moments, int M, const MaxEntOptions& opts) {
    if (M < 1) throw std::invalid_argument("solve_maxent_1d needs M >= 1");
    if (moments.order() < M) throw std::invalid_argument("solve_maxent_1d: not enough moments");
    const auto& mu = moments.values;

    MaxEntSolution sol;
    sol.order = M;
    if (M >= 2) {
        const double var = moments.variance();
        const double ref = std::max(1.0, mu[1] * mu[1]);
        if (var < -1e-9 * ref) throw DegenerateMoments("negative variance");
        if (var <= 1e-12 * ref) {
            if (mu[1] < -0.5) throw DegenerateMoments("point mass at a negative count");
            sol.x_left = sol.x_right = static_cast<int>(std::lround(mu[1]));
            sol.scale = std::max(1.0, double(sol.x_right));
            sol.lambda.assign(M, 0.0);
            sol.used_fallback_support = true;
            fill_residuals(sol, mu);
            return sol;
        }
    }

    if (M >= 2) {
        const auto ev = hankel_spectrum(scaled_moments(mu, moment_scale(moments)), M / 2);
        if (ev.minCoeff() < -1e-9 * ev.maxCoeff()) throw DegenerateMoments("moment sequence is not realizable");
    }

    int xl, xr;
    try {
        if (M < 2) throw DegenerateMoments("order too low for Hankel support");
        std::tie(xl, xr) = initial_support(moments, M);
    } catch (const DegenerateMoments&) {
        std::tie(xl, xr) = fallback_support(moments);
        sol.used_fallback_support = true;
    }
    while (xr - xl < M) {
        xl = std::max(0, xl - 1);
        ++xr;
    }

    detail::NewtonOptions nopts;
    nopts.gamma0 = opts.gamma0;
    nopts.max_iterations = opts.max_inner_iterations;
    nopts.tolerance.resize(M);
    nopts.gate.resize(M);

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(M);
    double scale = 1.0;
    bool have_prev = false;
    double prev_psi = 0.0;
    int failed = 0;
    int rounds = 0;
    int total_iterations = 0;
    std::vector<double> target(M);

    for (;;) {
        if (static_cast<std::size_t>(xr - xl + 1) > opts.max_support || rounds >= opts.max_rounds)
            throw SupportExplosion("support grew to " + std::to_string(xr - xl + 1) + " states in " +
                                   std::to_string(rounds) + " extension rounds");
        const double new_scale = std::max(1.0, double(xr));
        for (int k = 0; k < M; ++k) lambda[k] *= std::pow(new_scale / scale, k + 1);
        scale = new_scale;
        double p = 1.0;
        for (int k = 0; k < M; ++k) {
            p *= scale;
            const double ref = std::max(1.0, std::abs(mu[k + 1]));
            target[k] = mu[k + 1] / p;
            nopts.tolerance[k] = opts.gradient_tol * ref / p;
            nopts.gate[k] = opts.residual_tol * ref / p;
        }
        const auto problem = make_problem(xl, xr, target, scale);
        auto res = detail::damped_newton(problem, lambda, nopts);
        if (res.infeasible) lambda.setZero();
        if (res.diverged && lambda.squaredNorm() > 0.0)
            res = detail::damped_newton(problem, Eigen::VectorXd::Zero(M), nopts);
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
            if (!res.infeasible && ++failed >= opts.max_failed_rounds)
                throw NewtonDivergence("damped Newton failed on " + std::to_string(failed) +
                                       " consecutive supports (last [" + std::to_string(xl) + ", " +
                                       std::to_string(xr) + "])");
            if (!res.diverged && !res.infeasible) lambda = res.lambda;
        }

        if (done) {
            sol.x_left = xl;
            sol.x_right = xr;
            sol.scale = scale;
            sol.lambda.assign(res.lambda.data(), res.lambda.data() + M);
            sol.log_z = res.state.log_z;
            sol.psi = res.state.psi;
            sol.iterations = total_iterations;
            sol.support_rounds = rounds;
            double g = 0.0;
            p = 1.0;
            for (int k = 0; k < M; ++k) {
                p *= scale;
                g = std::max(g, std::abs(res.state.gradient[k]) * p);
            }
            sol.gradient_norm = g;
            fill_residuals(sol, mu);
            return sol;
        }
        xl = std::max(0, xl - 1);
        ++xr;
    }
}

}  // namespace mcmrecon
