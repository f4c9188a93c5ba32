#include <doctest.h>

#include <cmath>

#include "mcmrecon/errors.hpp"
#include "mcmrecon/maxent2d.hpp"
#include "oracles.hpp"

using namespace mcmrecon;

namespace {

MomentTable2D product_poisson(double a, double b, int M) {
    const auto ma = oracle::poisson_moments(a, M), mb = oracle::poisson_moments(b, M);
    MomentTable2D t;
    t.order = M;
    t.species = {"X", "Y"};
    for (int r = 0; r <= M; ++r)
        for (int l = 0; r + l <= M; ++l)
            if (r + l > 0) t.values[{r, l}] = ma[r] * mb[l];
    return t;
}

MomentTable2D swapped(const MomentTable2D& t) {
    MomentTable2D s = t;
    s.species = {t.species[1], t.species[0]};
    s.values.clear();
    for (const auto& [k, v] : t.values) s.values[{k.second, k.first}] = v;
    return s;
}

}  // namespace

TEST_CASE("unknown count is M(M+3)/2") {
    CHECK(unknown_count(3) == 9);
    CHECK(unknown_count(5) == 20);
    CHECK(unknown_count(7) == 35);
    const auto pairs = exponent_pairs(2);
    const std::vector<std::pair<int, int>> expected{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(pairs == expected);
}

TEST_CASE("independent Poissons factorize") {
    for (int M : {4, 5}) {
        const auto sol = solve_maxent_2d(product_poisson(3.0, 6.0, M), M);
        std::vector<double> qx(sol.x_right + 1, 0.0), qy(sol.y_right + 1, 0.0);
        double total = 0.0;
        for (int x = sol.x_left; x <= sol.x_right; ++x)
            for (int y = sol.y_left; y <= sol.y_right; ++y) {
                const double q = sol.density(x, y);
                qx[x] += q;
                qy[y] += q;
                total += q;
            }
        CHECK(std::abs(total - 1.0) <= 1e-10);
        double err = 0.0;
        for (int x = sol.x_left; x <= sol.x_right; ++x)
            for (int y = sol.y_left; y <= sol.y_right; ++y) err = std::max(err, std::abs(sol.density(x, y) - qx[x] * qy[y]));
        CHECK(err <= 1e-3);
        for (double r : sol.residuals) CHECK(r <= 1e-5);
    }
}

TEST_CASE("swapping the species mirrors the solution") {
    const auto t = product_poisson(2.0, 5.0, 4);
    const auto a = solve_maxent_2d(t, 4);
    const auto b = solve_maxent_2d(swapped(t), 4);
    CHECK(a.x_left == b.y_left);
    CHECK(a.x_right == b.y_right);
    double err = 0.0;
    for (int x = a.x_left; x <= a.x_right; ++x)
        for (int y = a.y_left; y <= a.y_right; ++y) err = std::max(err, std::abs(a.density(x, y) - b.density(y, x)));
    CHECK(err <= 1e-10);
}

TEST_CASE("2D dual derivatives match brute force") {
    const int M = 3;
    const auto pairs = exponent_pairs(M);
    const auto t = product_poisson(2.0, 3.0, M);
    std::vector<double> mu;
    const double sx = 3.0, sy = 4.0;
    for (auto [r, l] : pairs) mu.push_back(t.at(r, l) / (std::pow(sx, r) * std::pow(sy, l)));
    Eigen::VectorXd lambda(pairs.size());
    for (int i = 0; i < lambda.size(); ++i) lambda(i) = 0.1 * std::sin(1.0 + i);
    const auto ev = dual_eval_2d(lambda, 0, 8, 0, 10, mu, M, sx, sy);
    auto feature = [&](int i, int x, int y) {
        return std::pow(x / sx, pairs[i].first) * std::pow(y / sy, pairs[i].second);
    };
    auto psi = [&](const Eigen::VectorXd& l) {
        double z = 0.0;
        for (int x = 0; x <= 8; ++x)
            for (int y = 0; y <= 10; ++y) {
                double e = 0.0;
                for (int i = 0; i < l.size(); ++i) e += l(i) * feature(i, x, y);
                z += std::exp(-e);
            }
        double s = std::log(z);
        for (int i = 0; i < l.size(); ++i) s += l(i) * mu[i];
        return s;
    };
    CHECK(ev.psi == doctest::Approx(psi(lambda)).epsilon(1e-12));
    for (int i = 0; i < lambda.size(); ++i) {
        Eigen::VectorXd lp = lambda, lm = lambda;
        lp(i) += 1e-6;
        lm(i) -= 1e-6;
        CHECK(std::abs((psi(lp) - psi(lm)) / 2e-6 - ev.gradient(i)) <= 1e-5);
    }
    const double h = 1e-5;
    for (int i = 0; i < lambda.size(); ++i) {
        Eigen::VectorXd lp = lambda, lm = lambda;
        lp(i) += h;
        lm(i) -= h;
        const auto gp = dual_eval_2d(lp, 0, 8, 0, 10, mu, M, sx, sy).gradient;
        const auto gm = dual_eval_2d(lm, 0, 8, 0, 10, mu, M, sx, sy).gradient;
        for (int j = 0; j < lambda.size(); ++j)
            CHECK(std::abs((gp(j) - gm(j)) / (2 * h) - ev.hessian(i, j)) <= 1e-5);
    }
}

TEST_CASE("a point-mass axis reduces to one dimension") {
    auto t = product_poisson(4.0, 1.0, 3);
    for (auto& [k, v] : t.values) v = oracle::poisson_moments(4.0, 3)[k.first] * std::pow(2.0, k.second);
    const auto sol = solve_maxent_2d(t, 3);
    CHECK(sol.reduced == "y");
    CHECK(sol.y_left == 2);
    CHECK(sol.y_right == 2);
    double s = 0.0;
    for (int x = sol.x_left; x <= sol.x_right; ++x) s += sol.density(x, 2);
    CHECK(s == doctest::Approx(1.0));
    CHECK(evaluate_density_2d(sol, sol.x_left, 3) == 0.0);
}

TEST_CASE("inconsistent cross moments are rejected") {
    auto t = product_poisson(3.0, 3.0, 2);
    t.values[{1, 1}] = 40.0;  // |Cov| exceeds the product of the standard deviations
    CHECK_THROWS_AS(solve_maxent_2d(t, 2), DegenerateMoments);
}

TEST_CASE("moment tables slice to the marginals") {
    const auto t = product_poisson(3.0, 6.0, 4);
    const auto sx = t.slice(0), sy = t.slice(1);
    CHECK(sx.order() == 4);
    CHECK(sx.mean() == doctest::Approx(3.0));
    CHECK(sy.mean() == doctest::Approx(6.0));
    CHECK(t.at(0, 0) == 1.0);
    const auto d = solve_maxent_2d(t, 4).distribution({"X", "Y"});
    CHECK(d.total() == doctest::Approx(1.0));
}
