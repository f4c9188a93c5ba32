#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "mcmrecon/polynomial.hpp"

namespace mcmrecon {

/// Raw (non-central) moments E[X^alpha] for 1 <= |alpha| <= order.
/// E[X^0] = 1 is implicit.
struct MomentVector {
    std::size_t num_species = 0;
    int order = 0;
    std::map<MultiIndex, double> values;

    /// Throws std::out_of_range when alpha is not stored.
    double operator[](const MultiIndex& alpha) const;
    bool contains(const MultiIndex& alpha) const;
    /// E[X_i^k]
    double pure(std::size_t species, int k) const;
    /// (E[X_i^0], ..., E[X_i^M])
    std::vector<double> pure_sequence(std::size_t species, int M) const;
};

/// Product of raw moments, each factor a multi-index of order >= 1.
/// `p_power` is only meaningful for partial moments (see moment_system).
struct MomentMonomial {
    std::vector<MultiIndex> factors;  // sorted
    int p_power = 0;

    bool operator<(const MomentMonomial& o) const {
        if (factors != o.factors) return factors < o.factors;
        return p_power < o.p_power;
    }
    bool operator==(const MomentMonomial&) const = default;
};

/// Sum of coefficient * MomentMonomial.
using MomentExpr = std::map<MomentMonomial, double>;

void add_term(MomentExpr& expr, MomentMonomial mono, double coef);
double evaluate(const MomentExpr& expr, const MomentVector& moments);

/// Raw moment E[X^alpha] of order > M written in raw moments of order <= M,
/// obtained by setting the central moment E[prod_i (X_i - mu_i)^alpha_i] to
/// zero (recursively for orders above M+1). Throws std::invalid_argument
/// when |alpha| <= M.
MomentExpr closure_substitute(const MultiIndex& alpha, int M);

/// C(n+M, M) - 1
std::size_t moment_count(std::size_t n, int M);

}  // namespace mcmrecon
