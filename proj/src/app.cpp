#include "mcmrecon/app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "mcmrecon/cme.hpp"
#include "mcmrecon/csv_io.hpp"
#include "mcmrecon/errors.hpp"
#include "mcmrecon/mcm.hpp"
#include "mcmrecon/metrics.hpp"
#include "mcmrecon/mm.hpp"
#include "mcmrecon/model.hpp"
#include "mcmrecon/reconstruct.hpp"

namespace mcmrecon {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kOutEnv = "MCMRECON_OUT";
constexpr const char* kDefaultOut = "mcmrecon_out";

struct Config {
    std::string model;
    std::vector<std::string> params;
    std::vector<std::string> methods;
    std::vector<int> orders;
    std::vector<double> times;
    std::vector<std::string> partition;
    std::vector<std::string> species;
    std::string out;
    double delta_psi = 1e-4;
    double delta_mode = kDefaultDeltaMode;
    double delta_supp = kDefaultDeltaSupp;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    bool plot_data = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

/// Accept "a,b" as well as repeated flags.
std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& r : raw) {
        std::stringstream ss(r);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok.erase(0, tok.find_first_not_of(" \t"));
            tok.erase(tok.find_last_not_of(" \t") + 1);
            if (!tok.empty()) out.push_back(tok);
        }
    }
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

ParamOverrides parse_params(const std::vector<std::string>& raw) {
    ParamOverrides out;
    for (const auto& p : raw) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("--param expects name=value, got '" + p + "'");
        const std::string name = p.substr(0, eq), value = p.substr(eq + 1);
        try {
            std::size_t used = 0;
            out[name] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ValidationError("--param " + name + ": '" + value + "' is not a number");
        }
    }
    return out;
}

struct Context {
    Config cfg;
    ReactionNetwork net;
    fs::path out;
    std::ostream& log;

    IntegratorOptions integrator() const {
        IntegratorOptions o;
        o.rel_tol = cfg.rel_tol;
        o.abs_tol = cfg.abs_tol;
        return o;
    }

    StatePartition partition() const {
        if (!cfg.partition.empty()) return make_partition(net, split_list(cfg.partition));
        if (net.small_species.empty())
            throw ValidationError("model declares no partition; pass --partition <small species>");
        return make_partition(net);
    }

    void write(const std::string& name, const std::string& content) const { write_file_atomic(out / name, content); }
    void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }
    void emit(const json& j) const { log << j.dump() << "\n"; }
};

json partition_json(const ReactionNetwork& net, const StatePartition& part) {
    std::vector<std::string> small, large;
    for (auto i : part.small) small.push_back(net.species[i]);
    for (auto i : part.large) large.push_back(net.species[i]);
    json modes = json::array();
    for (const auto& m : part.modes) modes.push_back(m);
    return {{"small", small}, {"large", large}, {"modes", modes}};
}

std::string mode_tag(const std::vector<int>& mode) {
    std::string s;
    for (std::size_t i = 0; i < mode.size(); ++i) s += (i ? "-" : "") + std::to_string(mode[i]);
    return s;
}

// ---------------------------------------------------------------- solve

void solve_cme_run(const Context& cx, double t) {
    const auto t0 = std::chrono::steady_clock::now();
    auto sol = solve_cme(cx.net, t);
    const double rt = seconds_since(t0);
    const auto tag = time_tag(t);
    auto joint = sol.joint;
    joint.axes = cx.net.species;
    const std::string file = "cme_t" + tag + "_joint.csv";
    cx.write(file, distribution_to_csv(joint));
    json meta = {{"model", cx.cfg.model},    {"method", "cme"},          {"t", t},
                 {"states", sol.space.size()}, {"mass_defect", sol.mass_defect}, {"rounds", sol.rounds},
                 {"bounds", sol.space.bounds()}, {"runtime_seconds", rt}};
    cx.write_json("cme_t" + tag + "_joint.json", meta);
    if (cx.cfg.plot_data) {
        for (std::size_t i = 0; i < cx.net.num_species(); ++i) {
            const std::size_t keep[1] = {i};
            cx.write("cme_t" + tag + "_marginal_" + cx.net.species[i] + ".csv",
                     distribution_to_csv(marginalize(joint, keep)));
        }
    }
    meta["file"] = file;
    meta.erase("runtime_seconds");
    cx.emit(meta);
}

void solve_mm_run(const Context& cx, int M, double t) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = generate_mm_system(cx.net, M);
    const auto moments = solve_mm(cx.net, M, t, cx.integrator());
    const double rt = seconds_since(t0);
    const std::string stem = "mm_M" + std::to_string(M) + "_t" + time_tag(t);
    cx.write(stem + "_moments.csv", moments_to_csv(moments));
    json meta = {{"model", cx.cfg.model}, {"method", "mm"},      {"M", M},
                 {"t", t},                 {"eq_count", sys.num_equations()}, {"species", cx.net.species},
                 {"closure", sys.closure_notes()}, {"runtime_seconds", rt}};
    cx.write_json(stem + "_moments.json", meta);
    cx.emit({{"method", "mm"}, {"M", M}, {"t", t}, {"eq_count", sys.num_equations()}, {"file", stem + "_moments.csv"}});
}

void solve_mcm_run(const Context& cx, int M, double t) {
    const auto part = cx.partition();
    McmOptions opts;
    opts.integrator = cx.integrator();
    opts.delta_mode = cx.cfg.delta_mode;
    const auto t0 = std::chrono::steady_clock::now();
    const auto st = solve_mcm(cx.net, part, M, t, opts);
    const double rt = seconds_since(t0);
    const std::string stem = "mcm_M" + std::to_string(M) + "_t" + time_tag(t);
    cx.write(stem + "_cond.csv", conditional_to_csv(st, cx.cfg.delta_mode));
    json meta = {{"model", cx.cfg.model}, {"method", "mcm"},         {"M", M},
                 {"t", t},                 {"eq_count", st.equations}, {"partition", partition_json(cx.net, part)},
                 {"delta_mode", cx.cfg.delta_mode}, {"runtime_seconds", rt}};
    cx.write_json(stem + "_cond.json", meta);
    cx.emit({{"method", "mcm"}, {"M", M}, {"t", t}, {"eq_count", st.equations}, {"file", stem + "_cond.csv"}});
}

void cmd_solve(const Context& cx) {
    auto methods = split_list(cx.cfg.methods);
    if (methods.empty()) throw ValidationError("solve needs --method cme|mm|mcm");
    for (auto& m : methods) {
        m = lower(m);
        if (m != "cme" && m != "mm" && m != "mcm") throw ValidationError("unknown solve method '" + m + "'");
        if (m != "cme" && cx.cfg.orders.empty()) throw ValidationError("--M is required for " + m);
    }
    for (double t : cx.cfg.times)
        for (const auto& m : methods) {
            if (m == "cme") solve_cme_run(cx, t);
            else
                for (int M : cx.cfg.orders) m == "mm" ? solve_mm_run(cx, M, t) : solve_mcm_run(cx, M, t);
        }
}

// ---------------------------------------------------------------- reconstruct

json component_json(const ComponentDiagnostics& c) {
    json j = {{"label", c.label},
              {"mode", c.mode},
              {"weight", c.weight},
              {"included", c.included},
              {"support_lower", c.support_lower},
              {"support_upper", c.support_upper},
              {"iterations", c.iterations},
              {"support_rounds", c.support_rounds},
              {"max_residual", c.max_residual},
              {"fallback_support", c.fallback_support}};
    if (!c.failure.empty()) j["failure"] = c.failure;
    return j;
}

std::vector<std::vector<std::string>> species_sets(const Context& cx, const StatePartition* part) {
    std::vector<std::vector<std::string>> sets;
    for (const auto& s : cx.cfg.species) {
        auto names = split_list({s});
        for (const auto& n : names) cx.net.species_index(n);
        sets.push_back(names);
    }
    if (sets.empty()) {
        if (part)
            for (auto i : part->large) sets.push_back({cx.net.species[i]});
        else
            for (const auto& n : cx.net.species) sets.push_back({n});
    }
    return sets;
}

void cmd_reconstruct(const Context& cx) {
    std::vector<ReconMethod> methods;
    for (const auto& m : split_list(cx.cfg.methods)) methods.push_back(parse_method(m));
    if (methods.empty()) methods = {ReconMethod::WsMcm, ReconMethod::JMcm, ReconMethod::Mm};
    auto orders = cx.cfg.orders;
    if (orders.empty()) orders = {3, 5, 7};
    const bool need_mcm = std::any_of(methods.begin(), methods.end(), [](auto m) { return m != ReconMethod::Mm; });
    const bool need_mm = std::any_of(methods.begin(), methods.end(), [](auto m) { return m == ReconMethod::Mm; });
    std::optional<StatePartition> part;
    if (need_mcm) part = cx.partition();
    const auto sets = species_sets(cx, part ? &*part : nullptr);

    ReconOptions ropts;
    ropts.maxent.delta_psi = cx.cfg.delta_psi;
    ropts.maxent2d.delta_psi = cx.cfg.delta_psi;
    ropts.delta_mode = cx.cfg.delta_mode;

    for (double t : cx.cfg.times) {
        const auto tag = time_tag(t);
        for (int M : orders) {
            if (M < 2) throw ValidationError("reconstruction order must be at least 2");
            // Moments are solved one order higher than they are used.
            std::optional<ConditionalMomentState> mcm;
            std::optional<MomentVector> mm;
            std::string mcm_failure, mm_failure;
            std::size_t mcm_eq = 0, mm_eq = 0;
            if (need_mcm) {
                McmOptions o;
                o.integrator = cx.integrator();
                o.delta_mode = cx.cfg.delta_mode;
                try {
                    mcm = solve_mcm(cx.net, *part, M + 1, t, o);
                    mcm_eq = mcm->equations;
                } catch (const IntegrationError& e) {
                    mcm_failure = std::string(e.kind()) + ": " + e.what();
                }
            }
            if (need_mm) {
                try {
                    mm_eq = generate_mm_system(cx.net, M + 1).num_equations();
                    mm = solve_mm(cx.net, M + 1, t, cx.integrator());
                } catch (const IntegrationError& e) {
                    mm_failure = std::string(e.kind()) + ": " + e.what();
                }
            }

            for (const auto& sp : sets) {
                const std::string sp_tag = join(sp, "-");
                json plot = json::array();
                for (auto method : methods) {
                    const std::string stem =
                        "recon_" + method_name(method) + "_" + sp_tag + "_M" + std::to_string(M) + "_t" + tag;
                    json meta = {{"model", cx.cfg.model}, {"method", method_name(method)},
                                 {"species", sp},          {"M", M},
                                 {"solved_order", M + 1},  {"t", t},
                                 {"delta_psi", cx.cfg.delta_psi}};
                    meta["eq_count"] = method == ReconMethod::Mm ? mm_eq : mcm_eq;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const std::string& upstream = method == ReconMethod::Mm ? mm_failure : mcm_failure;
                        if (!upstream.empty()) throw NewtonDivergence("moment solve failed: " + upstream);
                        auto r = reconstruct(method, cx.net, mm ? &*mm : nullptr, mcm ? &*mcm : nullptr, sp, M, ropts);
                        meta["runtime_seconds"] = seconds_since(t0);
                        meta["partial"] = r.partial;
                        json comps = json::array();
                        for (const auto& c : r.components) {
                            json cj = component_json(c);
                            if (method == ReconMethod::WsMcm && c.included && !c.mode.empty()) {
                                const std::string cfile = "recon_mode" + mode_tag(c.mode) + "_" + sp_tag + "_M" +
                                                          std::to_string(M) + "_t" + tag;
                                cx.write(cfile + ".csv", distribution_to_csv(c.distribution));
                                cx.write_json(cfile + ".json", {{"model", cx.cfg.model},
                                                                {"method", "mode(" + mode_tag(c.mode) + ")"},
                                                                {"mode", c.mode},
                                                                {"species", sp},
                                                                {"M", M},
                                                                {"t", t},
                                                                {"eq_count", mcm_eq},
                                                                {"component", component_json(c)}});
                                cj["file"] = cfile + ".csv";
                            }
                            comps.push_back(cj);
                        }
                        meta["components"] = comps;
                        cx.write(stem + ".csv", distribution_to_csv(r.distribution));
                        meta["file"] = stem + ".csv";
                        if (cx.cfg.plot_data)
                            for (std::size_t k = 0; k < r.distribution.size(); ++k)
                                plot.push_back({method_name(method), r.distribution.point(k), r.distribution.values[k]});
                    } catch (const Error& e) {
                        if (e.user_error()) throw;
                        meta["runtime_seconds"] = seconds_since(t0);
                        meta["failure"] = {{"error", e.kind()}, {"message", e.what()}};
                    }
                    cx.write_json(stem + ".json", meta);
                    json line = {{"method", method_name(method)}, {"species", sp}, {"M", M}, {"t", t}};
                    if (meta.contains("failure")) line["failure"] = meta["failure"];
                    else line["file"] = meta["file"];
                    cx.emit(line);
                }
                if (cx.cfg.plot_data && !plot.empty()) {
                    std::string csv = "method,";
                    for (const auto& s : sp) csv += s + ",";
                    csv += "p\n";
                    for (const auto& row : plot) {
                        csv += row[0].get<std::string>() + ",";
                        for (int x : row[1]) csv += std::to_string(x) + ",";
                        csv += format_double(row[2].get<double>()) + "\n";
                    }
                    cx.write("plot_" + sp_tag + "_M" + std::to_string(M) + "_t" + tag + ".csv", csv);
                }
            }
        }
    }
}

// ---------------------------------------------------------------- compare

/// Files in the output directory matching prefix/suffix, sorted by name.
std::vector<fs::path> list_outputs(const fs::path& dir, const std::string& prefix, const std::string& suffix) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() >= prefix.size() + suffix.size() && name.rfind(prefix, 0) == 0 &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
            out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

json read_json(const fs::path& p) {
    try {
        return json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw ValidationError("malformed JSON in " + p.string() + ": " + e.what());
    }
}

fs::path sidecar(const fs::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

std::vector<std::size_t> indices_of(const ReactionNetwork& net, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(net.species_index(n));
    return idx;
}

void cmd_compare(const Context& cx) {
    for (double t : cx.cfg.times) {
        const auto tag = time_tag(t);
        const auto oracle_path = cx.out / ("cme_t" + tag + "_joint.csv");
        if (!fs::exists(oracle_path))
            throw ValidationError("missing oracle run: " + oracle_path.string() +
                                  " not found (run `solve --method cme --t " + tag + "` first)");
        auto joint = distribution_from_csv(read_file(oracle_path));
        if (joint.axes != cx.net.species) throw ValidationError("oracle file species do not match the model");
        const std::string suffix = "_t" + tag;
        std::vector<ErrorReport> reports;

        for (const auto& f : list_outputs(cx.out, "mm_M", suffix + "_moments.csv")) {
            const auto meta = read_json(sidecar(f));
            const auto mv = moments_from_csv(read_file(f));
            const auto oracle = moments_from_distribution(joint, mv.order);
            ErrorReport r;
            r.model = cx.cfg.model;
            r.method = "MM";
            r.order = meta.at("M").get<int>();
            r.time = t;
            r.eq_count = meta.at("eq_count").get<std::size_t>();
            r.runtime_seconds = meta.value("runtime_seconds", 0.0);
            std::vector<std::string> warnings;
            for (int l = 1; l <= mv.order; ++l) r.eps_moments[l] = moment_rel_error(mv, oracle, l, &warnings);
            r.solver_diagnostics = {{"file", f.filename().string()}, {"warnings", warnings}};
            reports.push_back(std::move(r));
        }

        for (const auto& f : list_outputs(cx.out, "mcm_M", suffix + "_cond.csv")) {
            const auto meta = read_json(sidecar(f));
            const auto small = meta.at("partition").at("small").get<std::vector<std::string>>();
            const auto part = make_partition(cx.net, small);
            const int M = meta.at("M").get<int>();
            const auto st = conditional_from_csv(read_file(f), part, t);
            const auto conds = conditional_from_joint(joint, part, M);
            const auto oracle = moments_from_distribution(joint, M);
            const auto un = unconditional_moments(st, M);
            ErrorReport r;
            r.model = cx.cfg.model;
            r.method = "MCM";
            r.order = M;
            r.time = t;
            r.eq_count = meta.at("eq_count").get<std::size_t>();
            r.runtime_seconds = meta.value("runtime_seconds", 0.0);
            std::vector<std::string> warnings;
            json cond = json::object();
            for (int l = 1; l <= M; ++l) {
                r.eps_moments[l] = moment_rel_error(un, oracle, l, &warnings);
                cond[std::to_string(l)] = conditional_rel_error(st, conds, l, cx.cfg.delta_mode, &warnings);
            }
            r.solver_diagnostics = {{"file", f.filename().string()},
                                    {"eps_conditional_moments", cond},
                                    {"mode_probability_error", mode_probability_error(st, conds)},
                                    {"warnings", warnings}};
            reports.push_back(std::move(r));
        }

        std::optional<std::vector<ModeConditional>> conds;
        std::optional<StatePartition> part;
        for (const auto& f : list_outputs(cx.out, "recon_", suffix + ".json")) {
            const auto meta = read_json(f);
            ErrorReport r;
            r.model = cx.cfg.model;
            r.method = meta.at("method").get<std::string>();
            r.order = meta.at("M").get<int>();
            r.time = t;
            r.species = meta.at("species").get<std::vector<std::string>>();
            r.eq_count = meta.value("eq_count", std::size_t{0});
            r.runtime_seconds = meta.value("runtime_seconds", 0.0);
            r.solver_diagnostics = {{"file", f.filename().string()}, {"delta_supp", cx.cfg.delta_supp}};
            if (meta.contains("failure")) {
                r.failure = meta["failure"].at("message").get<std::string>();
                reports.push_back(std::move(r));
                continue;
            }
            const auto recon = distribution_from_csv(read_file(cx.out / f.filename().replace_extension(".csv")));
            const auto idx = indices_of(cx.net, r.species);
            if (meta.contains("mode")) {
                // Per-mode reconstruction: compare against the oracle conditional.
                if (!part) {
                    part = cx.partition();
                    conds = conditional_from_joint(joint, *part, 1);
                }
                const auto mode = meta.at("mode").get<std::vector<int>>();
                const auto u = part->mode_index(mode);
                if (!u) throw ValidationError("mode in " + f.filename().string() + " is not in the partition");
                const auto& mc = (*conds)[*u];
                if (!mc.defined) {
                    r.failure = "oracle mode has zero probability";
                    reports.push_back(std::move(r));
                    continue;
                }
                // Requested species: small ones are fixed by the mode, large ones index the conditional.
                std::vector<std::size_t> keep;
                std::vector<int> lower, extent;
                for (auto i : idx) {
                    auto it = std::find(part->large.begin(), part->large.end(), i);
                    if (it == part->large.end()) throw ValidationError("per-mode reconstruction over a small species");
                    keep.push_back(static_cast<std::size_t>(it - part->large.begin()));
                }
                auto oracle = marginalize(mc.conditional, keep);
                oracle.axes = r.species;
                r.linf_percent = linf_percent_error(recon, oracle, cx.cfg.delta_supp);
            } else {
                auto oracle = marginalize(joint, idx);
                r.linf_percent = linf_percent_error(recon, oracle, cx.cfg.delta_supp);
            }
            reports.push_back(std::move(r));
        }

        cx.write("compare_t" + tag + ".json", emit_report(reports, ReportFormat::Json, cx.cfg.delta_supp));
        for (const auto& r : reports) {
            json line = {{"method", r.method}, {"M", r.order}, {"t", t}};
            if (!r.species.empty()) line["species"] = r.species;
            if (r.linf_percent) line["linf_percent"] = *r.linf_percent;
            if (!r.eps_moments.empty()) line["eps_1"] = r.eps_moments.begin()->second;
            if (!r.failure.empty()) line["failure"] = r.failure;
            cx.emit(line);
        }
    }
}

// ---------------------------------------------------------------- report

int method_rank(const std::string& m) {
    if (m.rfind("mode(", 0) == 0) return 0;
    if (m == "wsMCM") return 1;
    if (m == "jMCM") return 2;
    if (m == "MM") return 3;
    return 4;
}

void cmd_report(const Context& cx) {
    for (double t : cx.cfg.times) {
        const auto tag = time_tag(t);
        const auto path = cx.out / ("compare_t" + tag + ".json");
        if (!fs::exists(path))
            throw ValidationError("missing comparison: " + path.string() + " not found (run `compare` first)");
        auto entries = parse_report_json(read_file(path));
        std::vector<ErrorReport> table;
        for (auto& e : entries)
            if (!e.species.empty()) table.push_back(std::move(e));
        std::stable_sort(table.begin(), table.end(), [](const ErrorReport& a, const ErrorReport& b) {
            if (a.species != b.species) return a.species < b.species;
            const int ra = method_rank(a.method), rb = method_rank(b.method);
            if (ra != rb) return ra < rb;
            if (a.method != b.method) return a.method < b.method;
            return a.order < b.order;
        });
        cx.write("report_t" + tag + ".csv", emit_report(table, ReportFormat::Csv, cx.cfg.delta_supp));
        cx.write("report_t" + tag + ".json", emit_report(table, ReportFormat::Json, cx.cfg.delta_supp));
        cx.emit({{"report", "report_t" + tag + ".csv"}, {"entries", table.size()}});
    }
}

int fail(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moment-based analysis and maximum-entropy reconstruction of reaction networks", "mcmrecon"};
    app.require_subcommand(1);
    Config cfg;

    auto add_common = [&](CLI::App* sub, bool need_model) {
        auto* m = sub->add_option("--model", cfg.model, "Model file");
        if (need_model) m->required();
        sub->add_option("--param", cfg.params, "Parameter override name=value (repeatable)");
        sub->add_option("--partition", cfg.partition, "Small species, e.g. Doff,Don");
        sub->add_option("--t", cfg.times, "Time point(s)")->required();
        sub->add_option("--out", cfg.out, std::string("Output directory (default $") + kOutEnv + " or " + kDefaultOut + ")");
        sub->add_option("--delta-mode", cfg.delta_mode, "Mode probability floor")->check(CLI::PositiveNumber);
        sub->add_option("--rel-tol", cfg.rel_tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--abs-tol", cfg.abs_tol, "Integrator absolute tolerance")->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "Integrate the CME, MM or MCM system");
    add_common(solve, true);
    solve->add_option("--method", cfg.methods, "cme, mm, mcm (repeatable or comma-separated)")->required();
    solve->add_option("--M", cfg.orders, "Moment order(s)");
    solve->add_flag("--emit-plot-data", cfg.plot_data, "Also write per-species CME marginals");

    auto* recon = app.add_subcommand("reconstruct", "Max-entropy reconstruction of marginals");
    add_common(recon, true);
    recon->add_option("--method", cfg.methods, "wsMCM, jMCM, MM (default: all)");
    recon->add_option("--M", cfg.orders, "Reconstruction order(s); moments are solved at M+1 (default 3 5 7)");
    recon->add_option("--species", cfg.species, "Species or pair A,B (repeatable; default: each large species)");
    recon->add_option("--delta-psi", cfg.delta_psi, "Support extension threshold")->check(CLI::PositiveNumber);
    recon->add_flag("--emit-plot-data", cfg.plot_data, "Also write tidy per-species plot tables");

    auto* compare = app.add_subcommand("compare", "Error metrics against the CME oracle in the output directory");
    add_common(compare, true);
    compare->add_option("--delta-supp", cfg.delta_supp, "Comparison set threshold relative to max p")
        ->check(CLI::PositiveNumber);

    auto* report = app.add_subcommand("report", "Render comparison results as tables");
    add_common(report, false);
    report->add_option("--delta-supp", cfg.delta_supp, "Recorded threshold")->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"mcmrecon"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, "usage_error", e.what(), 1);
    }

    try {
        if (cfg.out.empty()) {
            const char* env = std::getenv(kOutEnv);
            cfg.out = env && *env ? env : kDefaultOut;
        }
        for (int M : cfg.orders)
            if (M < 2) throw ValidationError("moment order must be at least 2 (got " + std::to_string(M) + ")");
        for (double t : cfg.times)
            if (!(t >= 0.0)) throw ValidationError("time points must be non-negative");
        ReactionNetwork net;
        if (!cfg.model.empty()) net = load_model(cfg.model, parse_params(cfg.params));
        fs::create_directories(cfg.out);
        Context cx{cfg, std::move(net), fs::path(cfg.out), out};
        if (solve->parsed()) cmd_solve(cx);
        else if (recon->parsed()) cmd_reconstruct(cx);
        else if (compare->parsed()) cmd_compare(cx);
        else if (report->parsed()) cmd_report(cx);
        return 0;
    } catch (const Error& e) {
        return fail(err, e.kind(), e.what(), e.user_error() ? 1 : 2);
    } catch (const fs::filesystem_error& e) {
        return fail(err, "io_error", e.what(), 1);
    } catch (const std::invalid_argument& e) {
        return fail(err, "invalid_argument", e.what(), 1);
    } catch (const std::exception& e) {
        return fail(err, "internal_error", e.what(), 2);
    }
}

}  // namespace mcmrecon
