// Acceptance checks: one PASS/FAIL line per criterion, diagnostics indented.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mcmrecon/app.hpp"
#include "mcmrecon/cme.hpp"
#include "mcmrecon/csv_io.hpp"
#include "mcmrecon/errors.hpp"
#include "mcmrecon/maxent1d.hpp"
#include "mcmrecon/maxent2d.hpp"
#include "mcmrecon/mcm.hpp"
#include "mcmrecon/metrics.hpp"
#include "mcmrecon/mm.hpp"
#include "mcmrecon/reconstruct.hpp"

using namespace mcmrecon;
namespace fs = std::filesystem;

namespace {

const std::string kModels = MCMRECON_MODELS_DIR;

int g_failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void note(const char* text) { std::printf("      %s\n", text); }

template <typename... Args>
void note(const char* fmt, Args... args) {
    std::printf("      ");
    std::printf(fmt, args...);
    std::printf("\n");
}

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double poisson_pmf(double lambda, int x) { return std::exp(x * std::log(lambda) - lambda - std::lgamma(x + 1.0)); }

std::vector<double> poisson_moments(double lambda, int M) {
    std::vector<std::vector<double>> S(M + 1, std::vector<double>(M + 1, 0.0));
    S[0][0] = 1.0;
    for (int n = 1; n <= M; ++n)
        for (int k = 1; k <= n; ++k) S[n][k] = k * S[n - 1][k] + S[n - 1][k - 1];
    std::vector<double> mu(M + 1, 0.0);
    for (int n = 0; n <= M; ++n)
        for (int k = 0; k <= n; ++k) mu[n] += S[n][k] * std::pow(lambda, k);
    return mu;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// ------------------------------------------------------------------ 1

void equation_counts() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto net = load_model(kModels + "/gene_expression_set2.rn");
    const auto part = make_partition(net);
    const std::map<int, std::pair<std::size_t, std::size_t>> expected{{4, {30, 69}}, {6, {56, 209}}, {8, {90, 494}}};
    bool ok = true;
    std::string detail;
    for (const auto& [M, e] : expected) {
        const auto mcm = generate_mcm_system(net, part, M).num_equations();
        const auto mm = generate_mm_system(net, M).num_equations();
        ok &= mcm == e.first && mm == e.second;
        detail += "M=" + std::to_string(M) + " MCM " + std::to_string(mcm) + " MM " + std::to_string(mm) + "; ";
    }
    const double rt = seconds(t0);
    ok &= rt < 1.0;
    verdict(ok, "equation counts", detail + "generation " + fmt(rt) + " s");
    note("MM M=4 count 69 = C(4+4,4)-1; the alternative tabulated value 70 counts the constant moment as well");
}

// ------------------------------------------------------------------ 2

void gene_expression_moments() {
    const auto net = load_model(kModels + "/gene_expression_set2.rn");
    const double t = 10.0;
    const auto t0 = std::chrono::steady_clock::now();
    const auto cme = solve_cme(net, t);
    note("CME: %zu states, mass defect %.2e, %.2f s", cme.space.size(), cme.mass_defect, seconds(t0));
    const auto part = make_partition(net);
    const auto oracle = moments_from_distribution(cme.joint, 6);
    const auto conds = conditional_from_joint(cme.joint, part, 6);

    const auto mcm = solve_mcm(net, part, 6, t);
    const auto mm = solve_mm(net, 6, t);
    const auto mcm_un = unconditional_moments(mcm, 6);
    const double mcm1 = moment_rel_error(mcm_un, oracle, 1), mcm6 = moment_rel_error(mcm_un, oracle, 6);
    const double mcm1c = conditional_rel_error(mcm, conds, 1), mcm6c = conditional_rel_error(mcm, conds, 6);
    const double mm1 = moment_rel_error(mm, oracle, 1), mm6 = moment_rel_error(mm, oracle, 6);

    verdict(std::abs(cme.mass_defect) < 1e-8 && mcm1 <= 1e-3, "gene expression MCM M=6 first-order error",
            "eps_1 = " + fmt(mcm1) + " (conditional form " + fmt(mcm1c) + "), bound 1e-3, anchor 7.5e-5");
    verdict(mm1 >= 0.05 && mm1 <= 0.30, "gene expression MM M=6 first-order error",
            "eps_1 = " + fmt(mm1) + ", required in [0.05, 0.30], anchor 0.14");
    note("MM eps_l for l=1..6:");
    for (int l = 1; l <= 6; ++l) note("  l=%d  MM %.3e  MCM %.3e  MCM conditional %.3e", l, moment_rel_error(mm, oracle, l),
                                      moment_rel_error(mcm_un, oracle, l), conditional_rel_error(mcm, conds, l));
    verdict(mm6 >= 5.0 * mcm6, "gene expression MM vs MCM sixth-order error",
            "MM " + fmt(mm6) + " vs MCM " + fmt(mcm6) + " (unconditional); anchors 0.28 vs 0.02");
    note("against the conditional MCM sixth-order error %.3g the ratio is %.2f", mcm6c, mm6 / mcm6c);
}

// ------------------------------------------------------------------ 3

void maxent_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> failed;
    double worst_residual = 0.0, worst_norm = 0.0;
    auto track = [&](const MaxEntSolution& s) {
        double z = 0.0;
        for (int x = s.x_left; x <= s.x_right; ++x) z += s.density(x);
        worst_norm = std::max(worst_norm, std::abs(z - 1.0));
        for (double r : s.residuals) worst_residual = std::max(worst_residual, r);
    };

    // (a)
    const auto p5 = solve_maxent_1d(MomentSequence1D(poisson_moments(5.0, 8)), 8);
    double tv = 0.0;
    for (int x = 0; x < 100; ++x) tv += 0.5 * std::abs(p5.density(x) - poisson_pmf(5.0, x));
    track(p5);
    if (tv > 0.01) failed.push_back("(a)");
    // (b)
    std::vector<double> atom(6);
    for (int k = 0; k <= 5; ++k) atom[k] = std::pow(7.0, k);
    const auto pm = solve_maxent_1d(MomentSequence1D(atom), 5);
    if (pm.density(7) < 1.0 - 1e-6) failed.push_back("(b)");
    // (c), (d) over a spread of inputs
    for (double lambda : {1.5, 4.0, 12.0, 40.0})
        for (int M = 2; M <= 8; ++M) track(solve_maxent_1d(MomentSequence1D(poisson_moments(lambda, M)), M));
    if (worst_residual > 1e-6) failed.push_back("(c)");
    if (worst_norm > 1e-10) failed.push_back("(d)");
    // (e)
    const auto mu = poisson_moments(3.0, 4);
    const double scale = 4.0;
    std::vector<double> mus(4);
    for (int k = 1; k <= 4; ++k) mus[k - 1] = mu[k] / std::pow(scale, k);
    Eigen::VectorXd lambda(4);
    lambda << -0.8, 0.6, -0.1, 0.02;
    const auto ev = dual_eval(lambda, 0, 15, mus, scale);
    auto psi = [&](const Eigen::VectorXd& l) {
        double z = 0.0;
        for (int x = 0; x <= 15; ++x) {
            double e = 0.0;
            for (int k = 1; k <= 4; ++k) e += l(k - 1) * std::pow(x / scale, k);
            z += std::exp(-e);
        }
        double s = std::log(z);
        for (int k = 1; k <= 4; ++k) s += l(k - 1) * mus[k - 1];
        return s;
    };
    double gerr = 0.0, herr = 0.0;
    for (int k = 0; k < 4; ++k) {
        Eigen::VectorXd lp = lambda, lm = lambda;
        lp(k) += 1e-6;
        lm(k) -= 1e-6;
        gerr = std::max(gerr, std::abs((psi(lp) - psi(lm)) / 2e-6 - ev.gradient(k)));
    }
    std::vector<double> w(16);
    double z = 0.0;
    for (int x = 0; x <= 15; ++x) {
        double e = 0.0;
        for (int k = 1; k <= 4; ++k) e += lambda(k - 1) * std::pow(x / scale, k);
        z += (w[x] = std::exp(-e));
    }
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) {
            double ea = 0, eb = 0, eab = 0;
            for (int x = 0; x <= 15; ++x) {
                const double q = w[x] / z, fa = std::pow(x / scale, a), fb = std::pow(x / scale, b);
                ea += q * fa;
                eb += q * fb;
                eab += q * fa * fb;
            }
            herr = std::max(herr, std::abs(ev.hessian(a - 1, b - 1) - (eab - ea * eb)));
        }
    if (gerr > 1e-5) failed.push_back("(e) gradient");
    if (herr > 1e-9) failed.push_back("(e) Hessian");
    const double rt = seconds(t0);
    if (rt >= 30.0) failed.push_back("time");
    std::string detail = "TV " + fmt(tv) + ", atom mass " + fmt(pm.density(7)) + ", max residual " + fmt(worst_residual) +
                         ", max normalization error " + fmt(worst_norm) + ", gradient error " + fmt(gerr) +
                         ", Hessian error " + fmt(herr) + ", " + fmt(rt) + " s";
    for (const auto& f : failed) detail += " [failed " + f + "]";
    verdict(failed.empty(), "max-entropy oracle suite", detail);
}

// ------------------------------------------------------------------ 4

MomentTable2D product_poisson(double a, double b, int M) {
    const auto ma = poisson_moments(a, M), mb = poisson_moments(b, M);
    MomentTable2D t;
    t.order = M;
    t.species = {"X", "Y"};
    for (int r = 0; r <= M; ++r)
        for (int l = 0; r + l <= M; ++l)
            if (r + l > 0) t.values[{r, l}] = ma[r] * mb[l];
    return t;
}

void maxent_2d() {
    bool counts = unknown_count(3) == 9 && unknown_count(5) == 20 && unknown_count(7) == 35;
    double fact = 0.0;
    for (int M : {4, 5}) {
        const auto sol = solve_maxent_2d(product_poisson(3.0, 6.0, M), M);
        std::vector<double> qx(sol.x_right + 1, 0.0), qy(sol.y_right + 1, 0.0);
        for (int x = sol.x_left; x <= sol.x_right; ++x)
            for (int y = sol.y_left; y <= sol.y_right; ++y) {
                qx[x] += sol.density(x, y);
                qy[y] += sol.density(x, y);
            }
        for (int x = sol.x_left; x <= sol.x_right; ++x)
            for (int y = sol.y_left; y <= sol.y_right; ++y)
                fact = std::max(fact, std::abs(sol.density(x, y) - qx[x] * qy[y]));
    }
    auto t = product_poisson(2.0, 5.0, 4);
    auto s = t;
    s.species = {"Y", "X"};
    s.values.clear();
    for (const auto& [k, v] : t.values) s.values[{k.second, k.first}] = v;
    const auto a = solve_maxent_2d(t, 4), b = solve_maxent_2d(s, 4);
    double sym = (a.x_left == b.y_left && a.x_right == b.y_right) ? 0.0 : 1.0;
    for (int x = a.x_left; x <= a.x_right; ++x)
        for (int y = a.y_left; y <= a.y_right; ++y) sym = std::max(sym, std::abs(a.density(x, y) - b.density(y, x)));
    verdict(counts && fact <= 1e-3 && sym <= 1e-10, "2D max-entropy solver",
            "unknowns 9/20/35 " + std::string(counts ? "ok" : "wrong") + ", factorization error " + fmt(fact) +
                ", symmetry error " + fmt(sym));
}

// ------------------------------------------------------------------ 5

void gene_expression_reconstruction() {
    const auto net = load_model(kModels + "/gene_expression_set2.rn");
    const double t = 10.0;
    const int M = 5;
    const auto cme = solve_cme(net, t);
    const auto part = make_partition(net);
    const auto mcm = solve_mcm(net, part, M + 1, t);
    const auto mm = solve_mm(net, M + 1, t);
    const std::size_t keep[1] = {net.species_index("P")};
    const auto oracle = marginalize(cme.joint, keep);
    std::map<std::string, Reconstruction> recon;
    for (auto method : {ReconMethod::WsMcm, ReconMethod::JMcm, ReconMethod::Mm})
        recon.emplace(method_name(method), reconstruct(method, net, &mm, &mcm, {"P"}, M));
    auto err = [&](const std::string& m, double delta) { return linf_percent_error(recon.at(m).distribution, oracle, delta); };
    const double ws = err("wsMCM", kDefaultDeltaSupp), jm = err("jMCM", kDefaultDeltaSupp), mmv = err("MM", kDefaultDeltaSupp);
    verdict(ws < jm && ws < mmv, "gene expression M=5 protein reconstruction ordering",
            "wsMCM " + fmt(ws) + " %, jMCM " + fmt(jm) + " %, MM " + fmt(mmv) + " % at delta_supp 1e-6; anchors 20.1 < 23.1 < 71.6");
    const std::map<std::string, double> anchors{{"wsMCM", 20.1}, {"jMCM", 23.1}, {"MM", 71.6}};
    for (const auto& [m, a] : anchors) {
        const double v = err(m, kDefaultDeltaSupp);
        note("%s anchor %.1f: %s (%.1f)", m.c_str(), a, std::abs(v - a) <= 0.5 * a ? "within 50%" : "missed", v);
    }
    int oracle_hi = 0;
    for (int x = oracle.lower[0]; x <= oracle.upper(0); ++x)
        if (oracle.at(x) >= kDefaultDeltaSupp * *std::max_element(oracle.values.begin(), oracle.values.end())) oracle_hi = x;
    note("comparison set reaches P=%d; reconstruction supports end at wsMCM %d, jMCM %d, MM %d", oracle_hi,
         recon.at("wsMCM").distribution.upper(0), recon.at("jMCM").distribution.upper(0),
         recon.at("MM").distribution.upper(0));
    for (double delta : {1e-4, 1e-3, 1e-2})
        note("delta_supp %.0e: wsMCM %.1f, jMCM %.1f, MM %.1f", delta, err("wsMCM", delta), err("jMCM", delta),
             err("MM", delta));
}

// ------------------------------------------------------------------ 6

/// Locations of the two highest local maxima, ascending.
std::vector<int> two_maxima(const DiscreteDistribution& d) {
    std::vector<std::pair<double, int>> peaks;
    for (int x = d.lower[0]; x <= d.upper(0); ++x) {
        const double p = d.at(x);
        if (p > d.at(x - 1) && p >= d.at(x + 1)) peaks.push_back({p, x});
    }
    std::sort(peaks.rbegin(), peaks.rend());
    std::vector<int> out;
    for (std::size_t i = 0; i < peaks.size() && i < 2; ++i) out.push_back(peaks[i].second);
    std::sort(out.begin(), out.end());
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return "(" + s + ")";
}

void exclusive_switch() {
    const auto net =
        load_model(kModels + "/exclusive_switch.rn", {{"rho", 5.0}, {"delta", 0.2}, {"beta", 0.005}, {"nu", 0.02}});
    const double t = 50.0;
    const int M = 5;
    const auto t0 = std::chrono::steady_clock::now();
    const auto cme = solve_cme(net, t);
    note("CME: %zu states, mass defect %.2e, %.1f s", cme.space.size(), cme.mass_defect, seconds(t0));
    const auto part = make_partition(net);
    const auto mcm = solve_mcm(net, part, M + 1, t);
    const auto mm = solve_mm(net, M + 1, t);

    bool peaks_ok = true;
    std::string detail;
    for (const char* sp : {"P1", "P2"}) {
        const std::size_t keep[1] = {net.species_index(sp)};
        const auto oracle_peaks = two_maxima(marginalize(cme.joint, keep));
        const auto ws = reconstruct_wsmcm(net, mcm, {sp}, M);
        const auto peaks = two_maxima(ws.distribution);
        bool ok = oracle_peaks.size() == 2 && peaks.size() == 2;
        for (std::size_t i = 0; ok && i < 2; ++i) ok = std::abs(peaks[i] - oracle_peaks[i]) <= 2;
        peaks_ok &= ok;
        detail += std::string(sp) + " maxima " + join(peaks) + " vs oracle " + join(oracle_peaks) + "; ";
    }

    const std::size_t keep2[2] = {net.species_index("P1"), net.species_index("P2")};
    const auto oracle2 = marginalize(cme.joint, keep2);
    const auto ws2 = reconstruct_wsmcm(net, mcm, {"P1", "P2"}, M);
    const double ws_err = linf_percent_error(ws2.distribution, oracle2);
    double mm_err = INFINITY;
    std::string mm_note;
    try {
        mm_err = linf_percent_error(reconstruct_mm(net, mm, {"P1", "P2"}, M).distribution, oracle2);
    } catch (const Error& e) {
        mm_note = std::string(" (MM failed: ") + e.what() + ")";
    }
    detail += "2D error wsMCM " + fmt(ws_err) + " % vs MM " + fmt(mm_err) + " %" + mm_note;
    verdict(peaks_ok && ws_err <= mm_err, "exclusive switch bimodality and 2D error, M=5", detail);
    note("constants rho=5 delta=0.2 beta=0.005 nu=0.02, t=50; mode probabilities %.3f %.3f %.3f", mcm.probabilities[0],
         mcm.probabilities[1], mcm.probabilities[2]);
}

// ------------------------------------------------------------------ 7

std::map<std::string, std::string> pipeline_outputs(const fs::path& dir) {
    fs::remove_all(dir);
    const std::string model = kModels + "/gene_expression_set2.rn", out = dir.string();
    const std::vector<std::vector<std::string>> runs{
        {"solve", "--model", model, "--method", "cme,mm,mcm", "--M", "4", "6", "--t", "10", "--out", out},
        {"reconstruct", "--model", model, "--M", "3", "5", "--t", "10", "--out", out, "--emit-plot-data"},
        {"compare", "--model", model, "--t", "10", "--out", out},
        {"report", "--t", "10", "--out", out}};
    std::ostringstream sink;
    for (const auto& r : runs)
        if (run_cli(r, sink, sink) != 0) throw std::runtime_error("pipeline run failed: " + sink.str());
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") files[e.path().filename().string()] = read_file(e.path());
    return files;
}

void determinism() {
    const auto base = fs::temp_directory_path() / "mcmrecon_acceptance";
    const auto a = pipeline_outputs(base / "a");
    const auto b = pipeline_outputs(base / "b");
    std::size_t differing = 0;
    for (const auto& [name, content] : a)
        if (!b.count(name) || b.at(name) != content) ++differing;
    verdict(a.size() == b.size() && differing == 0 && !a.empty(), "determinism",
            std::to_string(a.size()) + " CSV files from solve/reconstruct/compare/report, " + std::to_string(differing) +
                " differ");
    fs::remove_all(base);
}

void run(const std::string& name, const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        verdict(false, name, std::string("threw: ") + e.what());
    }
}

}  // namespace

int main() {
    run("equation counts", equation_counts);
    run("gene expression moments", gene_expression_moments);
    run("max-entropy oracle suite", maxent_suite);
    run("2D max-entropy solver", maxent_2d);
    run("gene expression reconstruction", gene_expression_reconstruction);
    run("exclusive switch", exclusive_switch);
    run("determinism", determinism);
    std::printf("%d failing criteria\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
