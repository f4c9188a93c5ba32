#include "mcmrecon/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mcmrecon/errors.hpp"

namespace mcmrecon {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    for (auto& l : split(text, '\n')) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (!l.empty()) out.push_back(std::move(l));
    }
    return out;
}

double parse_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "not a number: '" + s + "'");
    }
}

int parse_int(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "not an integer: '" + s + "'");
    }
}

MultiIndex parse_index(const std::string& s, int line) {
    try {
        return parse_multi_index(s);
    } catch (const std::exception&) {
        throw ParseError(line, "bad multi-index '" + s + "'");
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string distribution_to_csv(const DiscreteDistribution& d) {
    std::string out;
    for (const auto& a : d.axes) out += a + ",";
    out += "p\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
        for (int x : d.point(k)) out += std::to_string(x) + ",";
        out += format_double(d.values[k]) + "\n";
    }
    return out;
}

DiscreteDistribution distribution_from_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError(1, "empty distribution file");
    auto header = split(lines[0], ',');
    if (header.size() < 2 || header.back() != "p") throw ParseError(1, "expected header '<axes>,p'");
    header.pop_back();
    const std::size_t n = header.size();
    std::vector<std::pair<std::vector<int>, double>> rows;
    std::vector<int> lo(n, 0), hi(n, -1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i + 1);
        auto f = split(lines[i], ',');
        if (f.size() != n + 1) throw ParseError(ln, "expected " + std::to_string(n + 1) + " fields");
        std::vector<int> x(n);
        for (std::size_t a = 0; a < n; ++a) {
            x[a] = parse_int(f[a], ln);
            if (rows.empty() || x[a] < lo[a]) lo[a] = x[a];
            if (rows.empty() || x[a] > hi[a]) hi[a] = x[a];
        }
        rows.emplace_back(std::move(x), parse_double(f[n], ln));
    }
    if (rows.empty()) throw ParseError(2, "distribution has no rows");
    std::vector<int> extent(n);
    for (std::size_t a = 0; a < n; ++a) extent[a] = hi[a] - lo[a] + 1;
    auto d = DiscreteDistribution::box(header, lo, extent);
    for (const auto& [x, p] : rows) d.values[d.linear_index(x)] = p;
    return d;
}

std::string moments_to_csv(const MomentVector& m) {
    std::string out = "alpha,value\n";
    for (const auto& a : enumerate_multi_indices(m.num_species, 1, m.order))
        if (m.contains(a)) out += format_multi_index(a) + "," + format_double(m[a]) + "\n";
    return out;
}

MomentVector moments_from_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "alpha,value") throw ParseError(1, "expected header 'alpha,value'");
    MomentVector m;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i + 1);
        auto f = split(lines[i], ',');
        if (f.size() != 2) throw ParseError(ln, "expected 2 fields");
        auto a = parse_index(f[0], ln);
        if (m.values.empty()) m.num_species = a.size();
        else if (a.size() != m.num_species) throw ParseError(ln, "multi-index length differs from earlier rows");
        m.order = std::max(m.order, total_order(a));
        m.values[a] = parse_double(f[1], ln);
    }
    return m;
}

std::string conditional_to_csv(const ConditionalMomentState& st, double delta_mode) {
    std::string out = "mode,alpha,partial,conditional\n";
    const std::size_t nz = st.partition.large.size();
    for (std::size_t u = 0; u < st.partition.num_modes(); ++u) {
        const auto mode = format_multi_index(st.partition.modes[u]);
        out += mode + ",p," + format_double(st.probabilities[u]) + "," + format_double(st.probabilities[u]) + "\n";
        for (const auto& a : enumerate_multi_indices(nz, 1, st.order))
            out += mode + "," + format_multi_index(a) + "," + format_double(st.partial[u].at(a)) + "," +
                   format_double(st.conditional(u, a, delta_mode)) + "\n";
    }
    return out;
}

ConditionalMomentState conditional_from_csv(std::string_view text, const StatePartition& partition, double time) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "mode,alpha,partial,conditional")
        throw ParseError(1, "expected header 'mode,alpha,partial,conditional'");
    ConditionalMomentState st;
    st.partition = partition;
    st.time = time;
    st.probabilities.assign(partition.num_modes(), 0.0);
    st.partial.assign(partition.num_modes(), {});
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i + 1);
        auto f = split(lines[i], ',');
        if (f.size() != 4) throw ParseError(ln, "expected 4 fields");
        const auto mode = f[0].empty() ? MultiIndex{} : parse_index(f[0], ln);
        const auto u = partition.mode_index(mode);
        if (!u) throw ParseError(ln, "mode '" + f[0] + "' is not in the partition");
        if (f[1] == "p") {
            st.probabilities[*u] = parse_double(f[2], ln);
            continue;
        }
        auto a = parse_index(f[1], ln);
        if (a.size() != partition.large.size()) throw ParseError(ln, "multi-index length differs from large species");
        st.order = std::max(st.order, total_order(a));
        st.partial[*u][a] = parse_double(f[2], ln);
    }
    return st;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw ValidationError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mcmrecon
