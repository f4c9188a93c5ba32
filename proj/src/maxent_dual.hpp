#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace mcmrecon::detail {

/// Feature rows phi(x) for every support point; target E[phi].
struct DualProblem {
    Eigen::MatrixXd features;  // points x features
    Eigen::VectorXd target;
};

struct DualState {
    double psi = 0.0;
    double log_z = 0.0;
    Eigen::VectorXd gradient;  // target - E_q[phi]
    Eigen::MatrixXd hessian;   // Cov_q(phi)
};

/// Psi(lambda) = ln sum_x exp(-lambda . phi(x)) + lambda . target.
DualState dual_state(const DualProblem& problem, const Eigen::VectorXd& lambda, bool with_hessian = true);

/// Normalized q over the support points.
Eigen::VectorXd dual_weights(const DualProblem& problem, const Eigen::VectorXd& lambda);

struct NewtonOptions {
    double gamma0 = 1e-3;
    double gamma_min = 1e-12;
    double gamma_max = 1e12;
    int max_iterations = 500;
    /// Per-feature |gradient| targets; also the looser gate accepted on stall.
    Eigen::VectorXd tolerance;
    Eigen::VectorXd gate;
};

struct NewtonResult {
    Eigen::VectorXd lambda;
    DualState state;
    int iterations = 0;
    bool converged = false;
    /// Damping ran past gamma_max without meeting the gate.
    bool diverged = false;
    /// Psi dropped below zero: no distribution on this support meets the target.
    bool infeasible = false;
};

/// Levenberg-Marquardt damped Newton on the dual.
NewtonResult damped_newton(const DualProblem& problem, Eigen::VectorXd lambda, const NewtonOptions& opts);

bool within(const Eigen::VectorXd& gradient, const Eigen::VectorXd& tol);

}  // namespace mcmrecon::detail
