#include "mcmrecon/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcmrecon {

double MomentVector::operator[](const MultiIndex& alpha) const {
    if (total_order(alpha) == 0) return 1.0;
    auto it = values.find(alpha);
    if (it == values.end()) throw std::out_of_range("moment " + format_multi_index(alpha) + " not available");
    return it->second;
}

bool MomentVector::contains(const MultiIndex& alpha) const {
    return total_order(alpha) == 0 || values.count(alpha) > 0;
}

double MomentVector::pure(std::size_t species, int k) const {
    MultiIndex alpha(num_species, 0);
    alpha.at(species) = k;
    return (*this)[alpha];
}

std::vector<double> MomentVector::pure_sequence(std::size_t species, int M) const {
    std::vector<double> seq(M + 1);
    for (int k = 0; k <= M; ++k) seq[k] = pure(species, k);
    return seq;
}

void add_term(MomentExpr& expr, MomentMonomial mono, double coef) {
    if (coef == 0.0) return;
    std::sort(mono.factors.begin(), mono.factors.end());
    auto [it, inserted] = expr.try_emplace(std::move(mono), coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0.0) expr.erase(it);
    }
}

double evaluate(const MomentExpr& expr, const MomentVector& moments) {
    double sum = 0.0;
    for (const auto& [mono, c] : expr) {
        double v = c;
        for (const auto& f : mono.factors) v *= moments[f];
        sum += v;
    }
    return sum;
}

namespace {

void closure_rec(const MultiIndex& alpha, int M, std::map<MultiIndex, MomentExpr>& memo) {
    if (memo.count(alpha)) return;
    const std::size_t n = alpha.size();
    MomentExpr out;
    // Enumerate gamma <= alpha componentwise, gamma != alpha.
    MultiIndex gamma(n, 0);
    while (true) {
        if (gamma != alpha) {
            double coef = -1.0;
            int sign_exp = 0;
            for (std::size_t i = 0; i < n; ++i) {
                coef *= binomial(alpha[i], gamma[i]);
                sign_exp += alpha[i] - gamma[i];
            }
            if (sign_exp % 2) coef = -coef;
            // prod_i mu_i^(alpha_i - gamma_i)
            std::vector<MultiIndex> means;
            for (std::size_t i = 0; i < n; ++i) {
                MultiIndex e(n, 0);
                e[i] = 1;
                for (int k = 0; k < alpha[i] - gamma[i]; ++k) means.push_back(e);
            }
            const int g = total_order(gamma);
            if (g == 0) {
                add_term(out, {means, 0}, coef);
            } else if (g <= M) {
                auto factors = means;
                factors.push_back(gamma);
                add_term(out, {factors, 0}, coef);
            } else {
                closure_rec(gamma, M, memo);
                for (const auto& [mono, c] : memo.at(gamma)) {
                    auto factors = means;
                    factors.insert(factors.end(), mono.factors.begin(), mono.factors.end());
                    add_term(out, {factors, 0}, coef * c);
                }
            }
        }
        // next gamma
        std::size_t i = 0;
        while (i < n && gamma[i] == alpha[i]) gamma[i++] = 0;
        if (i == n) break;
        ++gamma[i];
    }
    memo.emplace(alpha, std::move(out));
}

}  // namespace

MomentExpr closure_substitute(const MultiIndex& alpha, int M) {
    if (M < 1) throw std::invalid_argument("closure order must be >= 1");
    if (total_order(alpha) <= M)
        throw std::invalid_argument("moment " + format_multi_index(alpha) + " is tracked at order " +
                                    std::to_string(M) + "; no closure needed");
    std::map<MultiIndex, MomentExpr> memo;
    closure_rec(alpha, M, memo);
    return memo.at(alpha);
}

std::size_t moment_count(std::size_t n, int M) {
    return static_cast<std::size_t>(binomial(static_cast<int>(n) + M, M)) - 1;
}

}  // namespace mcmrecon
