#include "mcmrecon/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mcmrecon {

int total_order(const MultiIndex& alpha) {
    return std::accumulate(alpha.begin(), alpha.end(), 0);
}

std::string format_multi_index(const MultiIndex& alpha) {
    std::string out;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (i) out += ':';
        out += std::to_string(alpha[i]);
    }
    return out;
}

MultiIndex parse_multi_index(const std::string& text) {
    MultiIndex alpha;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ':')) {
        std::size_t used = 0;
        int v = std::stoi(part, &used);
        if (used != part.size() || v < 0) throw std::invalid_argument("bad multi-index '" + text + "'");
        alpha.push_back(v);
    }
    return alpha;
}

namespace {

void enumerate_grade(std::size_t pos, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (pos + 1 == cur.size()) {
        cur[pos] = remaining;
        out.push_back(cur);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        cur[pos] = v;
        enumerate_grade(pos + 1, remaining - v, cur, out);
    }
    cur[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_multi_indices(std::size_t nvars, int lo, int hi) {
    std::vector<MultiIndex> out;
    if (nvars == 0) {
        if (lo <= 0 && hi >= 0) out.emplace_back();
        return out;
    }
    MultiIndex cur(nvars, 0);
    for (int g = std::max(lo, 0); g <= hi; ++g) enumerate_grade(0, g, cur, out);
    return out;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

MultiPolynomial MultiPolynomial::constant(std::size_t nvars, double c) {
    MultiPolynomial p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
}

MultiPolynomial MultiPolynomial::variable(std::size_t nvars, std::size_t i) {
    MultiIndex alpha(nvars, 0);
    alpha.at(i) = 1;
    return monomial(alpha);
}

MultiPolynomial MultiPolynomial::monomial(const MultiIndex& alpha, double c) {
    MultiPolynomial p(alpha.size());
    p.add_term(alpha, c);
    return p;
}

MultiPolynomial MultiPolynomial::shifted_power(const MultiIndex& alpha, std::span<const int> shift) {
    const std::size_t n = alpha.size();
    MultiPolynomial result = constant(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0) continue;
        // (x_i + s)^a = sum_k C(a,k) s^(a-k) x_i^k
        MultiPolynomial factor(n);
        for (int k = 0; k <= alpha[i]; ++k) {
            MultiIndex e(n, 0);
            e[i] = k;
            factor.add_term(e, binomial(alpha[i], k) * std::pow(double(shift[i]), alpha[i] - k));
        }
        result = result * factor;
    }
    return result;
}

int MultiPolynomial::degree() const {
    int d = -1;
    for (const auto& [alpha, c] : terms_) d = std::max(d, total_order(alpha));
    return d;
}

double MultiPolynomial::coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
}

void MultiPolynomial::add_term(const MultiIndex& alpha, double c) {
    if (alpha.size() != nvars_) throw std::invalid_argument("multi-index dimension mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(alpha, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

double MultiPolynomial::evaluate(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& [alpha, c] : terms_) {
        double term = c;
        for (std::size_t i = 0; i < nvars_; ++i)
            for (int k = 0; k < alpha[i]; ++k) term *= x[i];
        sum += term;
    }
    return sum;
}

double MultiPolynomial::evaluate(std::span<const int> x) const {
    std::vector<double> xd(x.begin(), x.end());
    return evaluate(std::span<const double>(xd));
}

MultiPolynomial MultiPolynomial::restrict(const std::vector<bool>& keep, std::span<const int> values) const {
    std::size_t kept = std::count(keep.begin(), keep.end(), true);
    MultiPolynomial out(kept);
    for (const auto& [alpha, c] : terms_) {
        MultiIndex reduced;
        reduced.reserve(kept);
        double coef = c;
        for (std::size_t i = 0; i < nvars_; ++i) {
            if (keep[i])
                reduced.push_back(alpha[i]);
            else
                coef *= std::pow(double(values[i]), alpha[i]);
        }
        out.add_term(reduced, coef);
    }
    return out;
}

MultiPolynomial& MultiPolynomial::operator+=(const MultiPolynomial& other) {
    if (nvars_ == 0 && terms_.empty()) nvars_ = other.nvars_;
    for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
    return *this;
}

MultiPolynomial& MultiPolynomial::operator-=(const MultiPolynomial& other) {
    if (nvars_ == 0 && terms_.empty()) nvars_ = other.nvars_;
    for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
    return *this;
}

MultiPolynomial& MultiPolynomial::operator*=(double c) {
    if (c == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto& [alpha, v] : terms_) v *= c;
    return *this;
}

MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b) {
    if (a.nvars_ != b.nvars_) throw std::invalid_argument("polynomial dimension mismatch");
    MultiPolynomial out(a.nvars_);
    MultiIndex sum(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = ea[i] + eb[i];
            out.add_term(sum, ca * cb);
        }
    }
    return out;
}

}  // namespace mcmrecon
