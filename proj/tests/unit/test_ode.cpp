#include <doctest.h>

#include <cmath>

#include "mcmrecon/errors.hpp"
#include "mcmrecon/ode.hpp"

using namespace mcmrecon;

TEST_CASE("linear decay matches the exponential") {
    OdeSystem sys{2, [](double, std::span<const double> y, std::span<double> d) {
                      d[0] = -2.0 * y[0];
                      d[1] = y[0] - 0.5 * y[1];
                  }};
    const double y0[2] = {1.0, 0.0};
    IntegratorOptions opts{1e-10, 1e-12};
    const double times[2] = {0.5, 1.0};
    const auto r = integrate(sys, y0, 0.0, 2.0, opts, times);
    auto exact = [](double t) {
        return std::pair{std::exp(-2 * t), (std::exp(-0.5 * t) - std::exp(-2 * t)) / 1.5};
    };
    CHECK(r.y[0] == doctest::Approx(exact(2.0).first).epsilon(1e-8));
    CHECK(r.y[1] == doctest::Approx(exact(2.0).second).epsilon(1e-8));
    REQUIRE(r.checkpoints.size() == 2);
    CHECK(r.checkpoints[0].t == 0.5);
    CHECK(r.checkpoints[1].y[1] == doctest::Approx(exact(1.0).second).epsilon(1e-8));
}

TEST_CASE("tighter tolerance gives smaller error") {
    OdeSystem sys{1, [](double t, std::span<const double> y, std::span<double> d) { d[0] = std::cos(t) * y[0]; }};
    const double y0[1] = {1.0};
    const double exact = std::exp(std::sin(10.0));
    const double loose = std::abs(integrate(sys, y0, 0, 10, {1e-4, 1e-6}).y[0] - exact);
    const double tight = std::abs(integrate(sys, y0, 0, 10, {1e-10, 1e-12}).y[0] - exact);
    CHECK(tight < loose);
    CHECK(tight < 1e-8);
}

TEST_CASE("blow-up raises an integration error") {
    OdeSystem sys{1, [](double, std::span<const double> y, std::span<double> d) { d[0] = y[0] * y[0]; }};
    const double y0[1] = {1.0};
    CHECK_THROWS_AS(integrate(sys, y0, 0.0, 2.0), IntegrationError);
    IntegratorOptions few;
    few.max_steps = 3;
    OdeSystem osc{1, [](double t, std::span<const double>, std::span<double> d) { d[0] = std::sin(100 * t); }};
    CHECK_THROWS_AS(integrate(osc, y0, 0.0, 10.0, few), IntegrationError);
}
