#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "mcmrecon/distribution.hpp"

namespace mcmrecon {

/// mu_0..mu_M of one species; mu_0 is normalized to 1 on construction.
struct MomentSequence1D {
    std::vector<double> values;

    MomentSequence1D() = default;
    /// Throws DegenerateMoments when mu_0 <= 0 or a value is not finite.
    explicit MomentSequence1D(std::vector<double> mu);
    int order() const { return static_cast<int>(values.size()) - 1; }
    double mean() const { return values.at(1); }
    double variance() const;
};

/// [x_L, x_R] bracketing the bulk, from the real roots of the Hankel
/// determinant polynomials. Throws DegenerateMoments when the Hankel matrix
/// is singular or the roots are not real and simple.
std::pair<int, int> initial_support(const MomentSequence1D& moments, int M);

/// floor(mu - 5 sigma) .. ceil(mu + 5 sigma), clamped at 0.
std::pair<int, int> fallback_support(const MomentSequence1D& moments);

/// Real roots (ascending) of the Hankel determinant in w, built from mu_0..mu_{2k-1}.
std::vector<double> hankel_roots(const std::vector<double>& mu, int k);

struct DualEvaluation {
    double psi = 0.0;
    double log_z = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// Dual Psi(lambda) = ln Z + sum_k lambda_k mu_k on {x_L..x_R} with
/// Z = sum_x exp(-sum_k lambda_k (x/scale)^k); `mu` holds the moments
/// mu_1..mu_M of x/scale. Gradient is mu_k - E_q[(x/scale)^k], Hessian the
/// covariance of the monomials.
DualEvaluation dual_eval(const Eigen::VectorXd& lambda, int x_left, int x_right, const std::vector<double>& mu,
                         double scale = 1.0);

struct MaxEntOptions {
    double delta_psi = 1e-4;
    double gamma0 = 1e-3;
    int max_inner_iterations = 500;
    /// Inner Newton target and final acceptance gate, relative to max(1, |mu_k|).
    double gradient_tol = 1e-8;
    double residual_tol = 1e-6;
    std::size_t max_support = 100'000;
    int max_rounds = 5'000;
    /// Consecutive supports whose Newton run stalls before giving up.
    int max_failed_rounds = 25;
};

struct MaxEntSolution {
    int order = 0;
    int x_left = 0;
    int x_right = 0;
    /// Coefficients act on x/scale.
    double scale = 1.0;
    std::vector<double> lambda;  // lambda_1..lambda_M
    double log_z = 0.0;
    double psi = 0.0;
    int iterations = 0;
    int support_rounds = 0;
    double gradient_norm = 0.0;
    /// |E_q[x^k] - mu_k| / max(1, |mu_k|), k = 1..M, in original units.
    std::vector<double> residuals;
    bool used_fallback_support = false;

    /// q(x) inside the support, 0 outside.
    double density(int x) const;
    /// Coefficients of exp(-1 - sum_{k=0}^M c_k x^k) in original units.
    std::vector<double> coefficients() const;
    DiscreteDistribution distribution(const std::string& axis) const;
};

MaxEntSolution solve_maxent_1d(const MomentSequence1D& moments, int M, const MaxEntOptions& opts = {});

double evaluate_density(const MaxEntSolution& solution, int x);

}  // namespace mcmrecon
