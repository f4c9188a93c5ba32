#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcmrecon/distribution.hpp"
#include "mcmrecon/maxent1d.hpp"
#include "mcmrecon/moments.hpp"

namespace mcmrecon {

/// mu_{r,l} = E[X^r Y^l] for 0 <= r + l <= M, normalized so mu_{0,0} = 1.
struct MomentTable2D {
    int order = 0;
    std::array<std::string, 2> species;
    std::map<std::pair<int, int>, double> values;

    double at(int r, int l) const;
    /// (mu_{0,0}, mu_{1,0}, ...) for axis 0, (mu_{0,0}, mu_{0,1}, ...) for axis 1.
    MomentSequence1D slice(int axis) const;

    /// Joint moments of species i and j taken from a moment vector.
    static MomentTable2D from_moments(const MomentVector& moments, std::size_t i, std::size_t j, int M,
                                      std::array<std::string, 2> names = {});
};

/// Number of coefficients lambda_{r,l}, 1 <= r + l <= M.
std::size_t unknown_count(int M);

/// (r, l) pairs in solver order: graded by r + l, then by descending r.
std::vector<std::pair<int, int>> exponent_pairs(int M);

struct MaxEntOptions2D {
    double delta_psi = 1e-4;
    double gamma0 = 1e-3;
    /// Starting damping of the single retry after a divergence.
    double retry_gamma0 = 1.0;
    int max_inner_iterations = 500;
    double gradient_tol = 1e-8;
    double residual_tol = 1e-5;
    std::size_t max_support = 1'000'000;
    int max_rounds = 2'000;
    int max_failed_rounds = 25;
};

struct MaxEntSolution2D {
    int order = 0;
    int x_left = 0, x_right = 0;
    int y_left = 0, y_right = 0;
    double x_scale = 1.0, y_scale = 1.0;
    /// Coefficients act on (x/x_scale)^r (y/y_scale)^l, ordered as exponent_pairs(order).
    std::vector<double> lambda;
    double log_z = 0.0;
    double psi = 0.0;
    int iterations = 0;
    int support_rounds = 0;
    int retries = 0;
    double gradient_norm = 0.0;
    /// |E_q[x^r y^l] - mu_{r,l}| / max(1, |mu_{r,l}|) in exponent_pairs order.
    std::vector<double> residuals;
    /// "", or the axis that was a point mass ("x", "y", "xy").
    std::string reduced;

    double density(int x, int y) const;
    DiscreteDistribution distribution(const std::array<std::string, 2>& axes) const;
};

/// Dual value, gradient and Hessian on {x_L..x_R} x {y_L..y_R} for the
/// features (x/sx)^r (y/sy)^l; `mu` holds the matching scaled moments.
DualEvaluation dual_eval_2d(const Eigen::VectorXd& lambda, int x_left, int x_right, int y_left, int y_right,
                            const std::vector<double>& mu, int M, double x_scale = 1.0, double y_scale = 1.0);

MaxEntSolution2D solve_maxent_2d(const MomentTable2D& moments, int M, const MaxEntOptions2D& opts = {});

double evaluate_density_2d(const MaxEntSolution2D& solution, int x, int y);

}  // namespace mcmrecon
