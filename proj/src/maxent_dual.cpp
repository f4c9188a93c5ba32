#include "maxent_dual.hpp"

#include <cmath>
#include <limits>

namespace mcmrecon::detail {

namespace {

Eigen::VectorXd exponents(const DualProblem& problem, const Eigen::VectorXd& lambda) {
    Eigen::VectorXd e = -(problem.features * lambda);
    return e;
}

}  // namespace

bool within(const Eigen::VectorXd& gradient, const Eigen::VectorXd& tol) {
    for (Eigen::Index k = 0; k < gradient.size(); ++k)
        if (!(std::abs(gradient[k]) <= tol[k])) return false;
    return true;
}

Eigen::VectorXd dual_weights(const DualProblem& problem, const Eigen::VectorXd& lambda) {
    Eigen::VectorXd e = exponents(problem, lambda);
    const double m = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - m).exp();
    return w / w.sum();
}

DualState dual_state(const DualProblem& problem, const Eigen::VectorXd& lambda, bool with_hessian) {
    Eigen::VectorXd e = exponents(problem, lambda);
    const double m = e.maxCoeff();
    Eigen::VectorXd w = (e.array() - m).exp();
    const double s = w.sum();
    w /= s;

    DualState st;
    st.log_z = m + std::log(s);
    st.psi = st.log_z + lambda.dot(problem.target);
    Eigen::VectorXd mean = problem.features.transpose() * w;
    st.gradient = problem.target - mean;
    if (with_hessian) {
        Eigen::MatrixXd centered = problem.features.rowwise() - mean.transpose();
        st.hessian = centered.transpose() * (centered.array().colwise() * w.array()).matrix();
    }
    if (!std::isfinite(st.psi)) st.psi = std::numeric_limits<double>::infinity();
    return st;
}

NewtonResult damped_newton(const DualProblem& problem, Eigen::VectorXd lambda, const NewtonOptions& opts) {
    NewtonResult res;
    DualState cur = dual_state(problem, lambda);
    double gamma = opts.gamma0;
    const Eigen::Index n = lambda.size();

    for (int it = 0; it < opts.max_iterations; ++it) {
        if (within(cur.gradient, opts.tolerance)) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            if (gamma > opts.gamma_max) {
                res.lambda = lambda;
                res.state = cur;
                res.iterations = it;
                res.converged = within(cur.gradient, opts.gate);
                res.diverged = !res.converged;
                return res;
            }
            Eigen::MatrixXd damped = cur.hessian;
            for (Eigen::Index k = 0; k < n; ++k)
                damped(k, k) += gamma * std::max(cur.hessian(k, k), std::numeric_limits<double>::min());
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            Eigen::VectorXd step;
            if (ldlt.info() == Eigen::Success) step = ldlt.solve(cur.gradient);
            if (step.size() != n || !step.allFinite()) {
                gamma *= 10.0;
                continue;
            }
            Eigen::VectorXd trial = lambda - step;
            DualState next = dual_state(problem, trial);
            const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(cur.psi);
            const bool decrease = next.psi < cur.psi;
            const bool flat_but_better = next.psi <= cur.psi + tol &&
                                         next.gradient.cwiseAbs().maxCoeff() < cur.gradient.cwiseAbs().maxCoeff();
            if (std::isfinite(next.psi) && (decrease || flat_but_better)) {
                lambda = std::move(trial);
                cur = std::move(next);
                gamma = std::max(gamma / 10.0, opts.gamma_min);
                accepted = true;
                // Psi bounds the entropy of every feasible distribution from above.
                if (cur.psi < -1e-9) {
                    res.lambda = std::move(lambda);
                    res.state = std::move(cur);
                    res.iterations = it + 1;
                    res.infeasible = true;
                    return res;
                }
            } else {
                gamma *= 10.0;
            }
        }
        res.iterations = it + 1;
    }
    if (!res.converged) res.converged = within(cur.gradient, opts.tolerance);
    res.lambda = std::move(lambda);
    res.state = std::move(cur);
    return res;
}

}  // namespace mcmrecon::detail
