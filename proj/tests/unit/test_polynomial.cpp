#include <doctest.h>

#include <random>

#include "mcmrecon/polynomial.hpp"

using namespace mcmrecon;

TEST_CASE("multi-index enumeration is graded and complete") {
    const auto idx = enumerate_multi_indices(2, 1, 2);
    const std::vector<MultiIndex> expected{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(idx == expected);
    for (std::size_t n = 1; n <= 4; ++n)
        for (int M = 1; M <= 6; ++M)
            CHECK(enumerate_multi_indices(n, 1, M).size() == std::size_t(binomial(int(n) + M, M)) - 1);
}

TEST_CASE("multi-index text round trip") {
    CHECK(format_multi_index({0, 0, 1, 2}) == "0:0:1:2");
    CHECK(parse_multi_index("3:0:7") == MultiIndex{3, 0, 7});
    CHECK(total_order({3, 0, 7}) == 10);
}

TEST_CASE("binomial coefficients") {
    CHECK(binomial(5, 2) == 10.0);
    CHECK(binomial(8, 0) == 1.0);
    CHECK(binomial(3, 5) == 0.0);
}

TEST_CASE("polynomial arithmetic agrees with pointwise evaluation") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> coef(-3, 3), expo(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
        MultiPolynomial a(3), b(3);
        for (int k = 0; k < 4; ++k) {
            a.add_term({expo(rng), expo(rng), expo(rng)}, coef(rng));
            b.add_term({expo(rng), expo(rng), expo(rng)}, coef(rng));
        }
        const double x[3] = {0.5, -1.25, 2.0};
        const auto prod = a * b;
        CHECK(prod.evaluate(std::span<const double>(x)) ==
              doctest::Approx(a.evaluate(std::span<const double>(x)) * b.evaluate(std::span<const double>(x))));
        CHECK((a - b).evaluate(std::span<const double>(x)) ==
              doctest::Approx(a.evaluate(std::span<const double>(x)) - b.evaluate(std::span<const double>(x))));
        for (const auto& [alpha, c] : prod.terms()) CHECK(c != 0.0);
    }
}

TEST_CASE("shifted power expands the binomial") {
    const int shift[2] = {-1, 2};
    const auto p = MultiPolynomial::shifted_power({2, 1}, shift);
    // (x-1)^2 (y+2)
    CHECK(p.coefficient({2, 1}) == 1.0);
    CHECK(p.coefficient({1, 1}) == -2.0);
    CHECK(p.coefficient({0, 0}) == 2.0);
    CHECK(p.coefficient({2, 0}) == 2.0);
    CHECK(p.degree() == 3);
}

TEST_CASE("restrict substitutes fixed variables") {
    MultiPolynomial p(2);
    p.add_term({1, 1}, 3.0);
    p.add_term({0, 1}, 1.0);
    const int values[2] = {2, 0};
    const auto r = p.restrict({false, true}, values);
    CHECK(r.num_vars() == 1);
    CHECK(r.coefficient({1}) == 7.0);
    CHECK(r.degree() == 1);
}
