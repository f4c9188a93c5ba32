#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>

#include "mcmrecon/cme.hpp"
#include "mcmrecon/errors.hpp"
#include "mcmrecon/mcm.hpp"
#include "oracles.hpp"

using namespace mcmrecon;

TEST_CASE("immigration-death is Poisson at every time") {
    const auto net = parse_model("species: X\nreaction: 0 -> X @ 6\nreaction: X -> 0 @ 0.5\ninit: (0) 1\n");
    for (double t : {0.5, 2.0, 10.0}) {
        const auto sol = solve_cme(net, t);
        CHECK(std::abs(sol.mass_defect) < 1e-8);
        const double lambda = 12.0 * (1.0 - std::exp(-0.5 * t));
        double err = 0.0;
        for (int x = 0; x <= sol.joint.upper(0); ++x) err = std::max(err, std::abs(sol.joint.at(x) - oracle::poisson_pmf(lambda, x)));
        CHECK(err < 1e-8);
    }
}

TEST_CASE("two-state switch follows the analytic relaxation") {
    const auto net = parse_model("species: Off On\nreaction: Off -> On @ 0.7\nreaction: On -> Off @ 0.2\ninit: (1,0) 1\n");
    const double t = 1.3;
    const auto sol = solve_cme(net, t);
    CHECK(sol.space.size() == 2);
    const double p_on = 0.7 / 0.9 * (1.0 - std::exp(-0.9 * t));
    CHECK(sol.joint.at(0, 1) == doctest::Approx(p_on).epsilon(1e-9));
    CHECK(sol.joint.at(1, 0) == doctest::Approx(1.0 - p_on).epsilon(1e-9));
}

TEST_CASE("dimerization matches a dense matrix exponential") {
    const int N = 6;
    const auto net = parse_model(
        "species: A B C\nreaction: A + B -> C @ 0.4\nreaction: C -> A + B @ 1.1\nreaction: 2A -> 0 @ 0.05\n"
        "init: (6,6,0) 1\n");
    const double t = 1.5;
    const auto sol = solve_cme(net, t);
    // States (a, b, c) reachable from (6,6,0): b + c = 6, a <= b.
    std::vector<std::array<int, 3>> states;
    for (int c = 0; c <= N; ++c)
        for (int a = 0; a <= N - c; ++a)
            if ((N - c - a) % 2 == 0) states.push_back({a, N - c, c});
    CHECK(sol.space.size() == states.size());
    const int n = int(states.size());
    auto find = [&](int a, int b, int c) {
        for (int i = 0; i < n; ++i)
            if (states[i] == std::array<int, 3>{a, b, c}) return i;
        return -1;
    };
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        auto [a, b, c] = states[i];
        const double r1 = 0.4 * a * b, r2 = 1.1 * c, r3 = 0.05 * a * (a - 1) / 2.0;
        if (r1 > 0) Q(find(a - 1, b - 1, c + 1), i) += r1;
        if (r2 > 0) Q(find(a + 1, b + 1, c - 1), i) += r2;
        if (r3 > 0) Q(find(a - 2, b, c), i) += r3;
        Q(i, i) -= r1 + r2 + r3;
    }
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n);
    p0(find(6, 6, 0)) = 1.0;
    const Eigen::VectorXd p = (Q * t).exp() * p0;
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(sol.joint.at(std::span<const int>(states[i])) - p(i)));
    CHECK(err < 1e-9);
}

TEST_CASE("generator rows account for outflow leaving the box") {
    const auto net = parse_model("species: X\nreaction: 0 -> X @ 2\nreaction: X -> 0 @ 1\ninit: (0) 1\n");
    const auto space = StateSpace::reachable(net, {3});
    CHECK(space.size() == 4);
    const auto Q = build_generator(net, space);
    CHECK(Q.row_sum(0) == doctest::Approx(0.0));
    CHECK(Q.row_sum(3) == doctest::Approx(-2.0));
    CHECK(space.find({2}).value() == 2);
    CHECK_FALSE(space.find({7}).has_value());
}

TEST_CASE("conservation laws bound species") {
    const auto net = parse_model("species: A B X\nreaction: A -> B @ 1\nreaction: B -> A @ 1\nreaction: B -> B + X @ 1\n"
                                 "reaction: X -> 0 @ 1\ninit: (3,0,0) 1\n");
    const auto b = conservation_bounds(net);
    REQUIRE(b[0].has_value());
    CHECK(*b[0] == 3);
    CHECK(*b[1] == 3);
    CHECK_FALSE(b[2].has_value());
}

TEST_CASE("too small a truncation budget is reported") {
    const auto net = parse_model("species: X\nreaction: 0 -> X @ 50\nreaction: X -> 0 @ 0.01\ninit: (0) 1\n");
    CmeOptions opts;
    opts.bounds = std::vector<int>{5};
    opts.max_rounds = 1;
    CHECK_THROWS_AS(solve_cme(net, 10.0, opts), TruncationError);
}

TEST_CASE("mode conditionals partition the joint") {
    const auto net = load_model(oracle::models_dir() + "/gene_expression_set2.rn");
    const auto sol = solve_cme(net, 2.0);
    const auto part = make_partition(net);
    const auto conds = conditional_from_joint(sol.joint, part, 2);
    REQUIRE(conds.size() == 2);
    double total = 0.0;
    for (const auto& c : conds) {
        total += c.probability;
        if (c.defined) CHECK(c.conditional.total() == doctest::Approx(1.0));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}
