#include <doctest.h>

#include <cmath>

#include "mcmrecon/errors.hpp"
#include "mcmrecon/metrics.hpp"

using namespace mcmrecon;

namespace {

MomentVector vec(std::vector<double> mu) {
    MomentVector v;
    v.num_species = 1;
    v.order = int(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) v.values[{int(k + 1)}] = mu[k];
    return v;
}

ErrorReport entry(std::string method, int M, std::optional<double> linf) {
    ErrorReport r;
    r.model = "m.rn";
    r.method = std::move(method);
    r.order = M;
    r.time = 10.0;
    r.species = {"P"};
    r.linf_percent = linf;
    r.eq_count = 30;
    r.runtime_seconds = 0.5;
    r.solver_diagnostics = {{"delta_supp", 1e-6}};
    return r;
}

}  // namespace

TEST_CASE("relative moment error takes the worst species") {
    auto a = vec({2.2, 5.0});
    auto o = vec({2.0, 4.0});
    CHECK(moment_rel_error(a, o, 1) == doctest::Approx(0.1));
    CHECK(moment_rel_error(a, o, 2) == doctest::Approx(0.25));
    std::vector<std::string> warnings;
    o.values[{1}] = 0.0;
    CHECK(moment_rel_error(a, o, 1, &warnings) == 0.0);
    CHECK(warnings.size() == 1);
}

TEST_CASE("pointwise percent error over the comparison set") {
    const auto oracle = DiscreteDistribution::one_d("X", 0, {0.5, 0.3, 0.2, 1e-9});
    auto recon = DiscreteDistribution::one_d("X", 0, {0.5, 0.33, 0.17});
    // x=3 is below the threshold and ignored; x=2 gives 15 %.
    CHECK(linf_percent_error(recon, oracle, 1e-6) == doctest::Approx(15.0));
    // With the tiny state included, q = 0 there gives 100 %.
    CHECK(linf_percent_error(recon, oracle, 1e-10) == doctest::Approx(100.0));
    recon.axes = {"Y"};
    CHECK_THROWS_AS(linf_percent_error(recon, oracle), ValidationError);
    const auto empty = DiscreteDistribution::one_d("X", 0, {0.0, 0.0});
    CHECK_THROWS_AS(linf_percent_error(empty, empty), ValidationError);
}

TEST_CASE("report JSON round trip") {
    std::vector<ErrorReport> rs{entry("wsMCM", 5, 20.1), entry("MM", 5, std::nullopt)};
    rs[1].failure = "newton_divergence";
    rs[0].eps_moments = {{1, 7.5e-5}, {2, 1e-3}};
    const auto text = emit_report(rs, ReportFormat::Json, 1e-6);
    const auto back = parse_report_json(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == rs[0]);
    CHECK(back[1] == rs[1]);
    CHECK(error_report_from_json(to_json(rs[0])) == rs[0]);
    CHECK_THROWS(parse_report_json("{not json"));
}

TEST_CASE("CSV report lays out methods as columns") {
    std::vector<ErrorReport> rs{entry("wsMCM", 3, 1.5), entry("jMCM", 3, 2.0), entry("wsMCM", 5, 0.5),
                                entry("jMCM", 5, std::nullopt)};
    rs[3].failure = "x";
    const auto csv = emit_report(rs, ReportFormat::Csv);
    CHECK(csv == "species,M,wsMCM,jMCM\nP,3,1.5,2\nP,5,0.5,fail\n");
}
