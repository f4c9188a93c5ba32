#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mcmrecon {

/// Exponent vector over species; also used as the key of a moment E[X^alpha].
using MultiIndex = std::vector<int>;

int total_order(const MultiIndex& alpha);

/// "0:0:1:2" rendering used in CSV files.
std::string format_multi_index(const MultiIndex& alpha);
MultiIndex parse_multi_index(const std::string& text);

/// All multi-indices in `nvars` variables with lo <= |alpha| <= hi, graded
/// (by total order) and reverse-lexicographic inside each grade.
std::vector<MultiIndex> enumerate_multi_indices(std::size_t nvars, int lo, int hi);

/// Binomial coefficient as a double; exact for the small arguments used here.
double binomial(int n, int k);

/// Sparse real polynomial in a fixed number of variables. Zero coefficients
/// are never stored.
class MultiPolynomial {
public:
    MultiPolynomial() = default;
    explicit MultiPolynomial(std::size_t nvars) : nvars_(nvars) {}

    static MultiPolynomial constant(std::size_t nvars, double c);
    static MultiPolynomial variable(std::size_t nvars, std::size_t i);
    /// x^alpha
    static MultiPolynomial monomial(const MultiIndex& alpha, double c = 1.0);
    /// prod_i (x_i + shift_i)^{alpha_i}
    static MultiPolynomial shifted_power(const MultiIndex& alpha, std::span<const int> shift);

    std::size_t num_vars() const { return nvars_; }
    const std::map<MultiIndex, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;
    double coefficient(const MultiIndex& alpha) const;

    void add_term(const MultiIndex& alpha, double c);

    double evaluate(std::span<const double> x) const;
    double evaluate(std::span<const int> x) const;

    /// Fix some variables to constants: keeps the variables whose entry in
    /// `keep` is true, substitutes `values[i]` for the others.
    MultiPolynomial restrict(const std::vector<bool>& keep, std::span<const int> values) const;

    MultiPolynomial& operator+=(const MultiPolynomial& other);
    MultiPolynomial& operator-=(const MultiPolynomial& other);
    MultiPolynomial& operator*=(double c);
    friend MultiPolynomial operator*(const MultiPolynomial& a, const MultiPolynomial& b);
    friend MultiPolynomial operator+(MultiPolynomial a, const MultiPolynomial& b) { return a += b; }
    friend MultiPolynomial operator-(MultiPolynomial a, const MultiPolynomial& b) { return a -= b; }

    bool operator==(const MultiPolynomial&) const = default;

private:
    std::size_t nvars_ = 0;
    std::map<MultiIndex, double> terms_;
};

}  // namespace mcmrecon
