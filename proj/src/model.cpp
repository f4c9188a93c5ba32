#include "mcmrecon/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

std::vector<int> Reaction::change() const {
    std::vector<int> v(reactants.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = products[i] - reactants[i];
    return v;
}

int Reaction::molecularity() const {
    return std::accumulate(reactants.begin(), reactants.end(), 0);
}

double Reaction::propensity(std::span<const int> x) const {
    double a = rate;
    for (std::size_t i = 0; i < reactants.size(); ++i) {
        if (reactants[i] == 0) continue;
        if (x[i] < reactants[i]) return 0.0;
        a *= binomial(x[i], reactants[i]);
    }
    return a;
}

std::size_t ReactionNetwork::species_index(std::string_view name) const {
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) throw ValidationError("unknown species '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - species.begin());
}

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

bool starts_with_keyword(const std::string& line, std::string_view kw) {
    return line.rfind(kw, 0) == 0;
}

struct Parser {
    ReactionNetwork net;
    const ParamOverrides& overrides;
    // Reaction lines are resolved after all params are known.
    struct PendingReaction {
        int line;
        std::string text;
    };
    std::vector<PendingReaction> pending;
    std::vector<std::pair<int, std::string>> pending_init;
    bool have_species = false;

    std::vector<int> parse_complex(const std::string& side, int line) {
        std::vector<int> stoich(net.species.size(), 0);
        std::string s = trim(side);
        if (s.empty() || s == "0" || s == "\xE2\x88\x85") return stoich;
        std::stringstream ss(s);
        std::string term;
        while (std::getline(ss, term, '+')) {
            term = trim(term);
            if (term.empty()) throw ParseError(line, "empty term in '" + side + "'");
            std::size_t pos = 0;
            while (pos < term.size() && std::isdigit(static_cast<unsigned char>(term[pos]))) ++pos;
            int coef = 1;
            if (pos > 0) {
                coef = std::stoi(term.substr(0, pos));
                term = trim(term.substr(pos));
            }
            if (term.empty()) throw ParseError(line, "missing species after coefficient");
            auto it = std::find(net.species.begin(), net.species.end(), term);
            if (it == net.species.end()) throw ParseError(line, "unknown species '" + term + "'");
            stoich[it - net.species.begin()] += coef;
        }
        return stoich;
    }

    double resolve_rate(const std::string& token, std::string& name, int line) {
        if (auto v = parse_number(token)) {
            name.clear();
            return *v;
        }
        auto it = std::find_if(net.params.begin(), net.params.end(),
                               [&](const auto& p) { return p.first == token; });
        if (it == net.params.end()) throw ParseError(line, "unknown parameter '" + token + "'");
        if (!it->second)
            throw ValidationError("parameter '" + token + "' has no value; supply it with --param " + token +
                                  "=<value>");
        name = token;
        return *it->second;
    }

    void reaction(const PendingReaction& pr) {
        auto at = pr.text.rfind('@');
        if (at == std::string::npos) throw ParseError(pr.line, "reaction needs '@ <rate>'");
        std::string body = pr.text.substr(0, at);
        std::string rate_tok = trim(pr.text.substr(at + 1));
        auto arrow = body.find("->");
        if (arrow == std::string::npos) throw ParseError(pr.line, "reaction needs '->'");
        Reaction r;
        r.reactants = parse_complex(body.substr(0, arrow), pr.line);
        r.products = parse_complex(body.substr(arrow + 2), pr.line);
        r.rate = resolve_rate(rate_tok, r.rate_name, pr.line);
        if (r.molecularity() > 2)
            throw ValidationError("line " + std::to_string(pr.line) +
                                  ": trimolecular (or higher) reaction is not supported");
        net.reactions.push_back(std::move(r));
    }

    void init(int line, const std::string& text) {
        auto open = text.find('(');
        auto close = text.find(')');
        if (open == std::string::npos || close == std::string::npos || close < open)
            throw ParseError(line, "init needs '(x1,...,xn) <probability>'");
        std::vector<int> state;
        std::stringstream ss(text.substr(open + 1, close - open - 1));
        std::string part;
        while (std::getline(ss, part, ',')) {
            auto v = parse_number(trim(part));
            if (!v || *v < 0 || std::floor(*v) != *v) throw ParseError(line, "bad state entry '" + part + "'");
            state.push_back(static_cast<int>(*v));
        }
        if (state.size() != net.species.size())
            throw ParseError(line, "initial state has " + std::to_string(state.size()) + " entries, expected " +
                                       std::to_string(net.species.size()));
        auto prob = parse_number(trim(text.substr(close + 1)));
        if (!prob) throw ParseError(line, "missing initial probability");
        // Repeated states are merged.
        auto it = std::find_if(net.initial.begin(), net.initial.end(),
                               [&](const InitialState& s) { return s.state == state; });
        if (it != net.initial.end())
            it->probability += *prob;
        else
            net.initial.push_back({std::move(state), *prob});
    }

    void line(int lineno, const std::string& raw) {
        std::string l = trim(raw.substr(0, raw.find('#')));
        if (l.empty()) return;
        if (starts_with_keyword(l, "species:")) {
            if (have_species) throw ParseError(lineno, "species declared twice");
            net.species = split_ws(l.substr(8));
            if (net.species.empty()) throw ParseError(lineno, "no species declared");
            for (std::size_t i = 0; i < net.species.size(); ++i)
                if (std::find(net.species.begin(), net.species.begin() + i, net.species[i]) !=
                    net.species.begin() + i)
                    throw ParseError(lineno, "duplicate species '" + net.species[i] + "'");
            have_species = true;
        } else if (starts_with_keyword(l, "param ") || starts_with_keyword(l, "param\t")) {
            auto toks = split_ws(l.substr(6));
            if (toks.empty() || toks.size() > 2) throw ParseError(lineno, "expected 'param <name> [value]'");
            std::optional<double> value;
            if (toks.size() == 2) {
                value = parse_number(toks[1]);
                if (!value) throw ParseError(lineno, "bad parameter value '" + toks[1] + "'");
            }
            if (std::any_of(net.params.begin(), net.params.end(), [&](const auto& p) { return p.first == toks[0]; }))
                throw ParseError(lineno, "parameter '" + toks[0] + "' declared twice");
            if (auto o = overrides.find(toks[0]); o != overrides.end()) value = o->second;
            net.params.emplace_back(toks[0], value);
        } else if (starts_with_keyword(l, "reaction:")) {
            if (!have_species) throw ParseError(lineno, "reaction before species declaration");
            pending.push_back({lineno, l.substr(9)});
        } else if (starts_with_keyword(l, "init:")) {
            if (!have_species) throw ParseError(lineno, "init before species declaration");
            pending_init.emplace_back(lineno, l.substr(5));
        } else if (starts_with_keyword(l, "partition:")) {
            auto toks = split_ws(l.substr(10));
            if (toks.empty() || toks[0] != "small") throw ParseError(lineno, "expected 'partition: small <species...>'");
            net.small_species.assign(toks.begin() + 1, toks.end());
        } else {
            throw ParseError(lineno, "unrecognized line '" + l + "'");
        }
    }
};

}  // namespace

ReactionNetwork parse_model(std::string_view text, const ParamOverrides& overrides) {
    Parser p{{}, overrides, {}, {}, false};
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) p.line(++lineno, raw);
    if (!p.have_species) throw ParseError(lineno, "missing 'species:' line");
    for (const auto& [name, _] : overrides)
        if (std::none_of(p.net.params.begin(), p.net.params.end(), [&](const auto& q) { return q.first == name; }))
            throw ValidationError("override for undeclared parameter '" + name + "'");
    for (const auto& pr : p.pending) p.reaction(pr);
    for (const auto& [lineno_i, text_i] : p.pending_init) p.init(lineno_i, text_i);
    validate(p.net);
    return std::move(p.net);
}

ReactionNetwork load_model(const std::string& path, const ParamOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str(), overrides);
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_complex(const std::vector<int>& stoich, const std::vector<std::string>& species) {
    std::string out;
    for (std::size_t i = 0; i < stoich.size(); ++i) {
        if (stoich[i] == 0) continue;
        if (!out.empty()) out += " + ";
        if (stoich[i] > 1) out += std::to_string(stoich[i]) + " ";
        out += species[i];
    }
    return out.empty() ? "0" : out;
}

}  // namespace

std::string serialize_model(const ReactionNetwork& net) {
    std::ostringstream out;
    out << "species:";
    for (const auto& s : net.species) out << ' ' << s;
    out << '\n';
    for (const auto& [name, value] : net.params) {
        out << "param " << name;
        if (value) out << ' ' << format_double(*value);
        out << '\n';
    }
    for (const auto& r : net.reactions) {
        out << "reaction: " << format_complex(r.reactants, net.species) << " -> "
            << format_complex(r.products, net.species) << " @ "
            << (r.rate_name.empty() ? format_double(r.rate) : r.rate_name) << '\n';
    }
    for (const auto& init : net.initial) {
        out << "init: (";
        for (std::size_t i = 0; i < init.state.size(); ++i) out << (i ? "," : "") << init.state[i];
        out << ") " << format_double(init.probability) << '\n';
    }
    if (!net.small_species.empty()) {
        out << "partition: small";
        for (const auto& s : net.small_species) out << ' ' << s;
        out << '\n';
    }
    return out.str();
}

void validate(const ReactionNetwork& net) {
    const std::size_t n = net.species.size();
    for (std::size_t j = 0; j < net.reactions.size(); ++j) {
        const auto& r = net.reactions[j];
        const std::string where = "reaction " + std::to_string(j + 1);
        if (r.reactants.size() != n || r.products.size() != n) throw ValidationError(where + ": dimension mismatch");
        if (r.molecularity() > 2) throw ValidationError(where + ": trimolecular (or higher) reaction is not supported");
        if (!(r.rate > 0.0) || !std::isfinite(r.rate))
            throw ValidationError(where + ": rate constant must be positive, got " + format_double(r.rate));
        auto v = r.change();
        if (std::all_of(v.begin(), v.end(), [](int d) { return d == 0; }))
            throw ValidationError(where + ": zero change vector");
    }
    if (net.initial.empty()) throw ValidationError("no initial state declared");
    double total = 0.0;
    for (const auto& s : net.initial) {
        if (s.state.size() != n) throw ValidationError("initial state dimension mismatch");
        if (std::any_of(s.state.begin(), s.state.end(), [](int x) { return x < 0; }))
            throw ValidationError("negative initial count");
        if (!(s.probability >= 0.0)) throw ValidationError("negative initial probability");
        total += s.probability;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("initial distribution is not normalized (sum = " + format_double(total) + ")");
    for (const auto& s : net.small_species) net.species_index(s);
}

MultiPolynomial propensity_polynomial(const ReactionNetwork& net, std::size_t j) {
    const Reaction& r = net.reactions.at(j);
    const std::size_t n = net.num_species();
    MultiPolynomial poly = MultiPolynomial::constant(n, r.rate);
    for (std::size_t i = 0; i < n; ++i) {
        // C(x, l) = x (x-1) ... (x-l+1) / l!
        for (int k = 0; k < r.reactants[i]; ++k) {
            MultiPolynomial factor = MultiPolynomial::variable(n, i);
            factor.add_term(MultiIndex(n, 0), -double(k));
            factor *= 1.0 / double(k + 1);
            poly = poly * factor;
        }
    }
    return poly;
}

}  // namespace mcmrecon
