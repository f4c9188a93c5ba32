#include "mcmrecon/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mcmrecon {

DiscreteDistribution DiscreteDistribution::box(std::vector<std::string> axes, std::vector<int> lower,
                                               std::vector<int> extent) {
    if (lower.size() != extent.size()) throw std::invalid_argument("box: dimension mismatch");
    std::size_t total = 1;
    for (int e : extent) {
        if (e <= 0) throw std::invalid_argument("box: empty extent");
        total *= static_cast<std::size_t>(e);
    }
    DiscreteDistribution d;
    d.axes = std::move(axes);
    d.axes.resize(lower.size());
    d.lower = std::move(lower);
    d.extent = std::move(extent);
    d.values.assign(total, 0.0);
    return d;
}

DiscreteDistribution DiscreteDistribution::one_d(std::string axis, int lower, std::vector<double> values) {
    DiscreteDistribution d;
    d.axes = {std::move(axis)};
    d.lower = {lower};
    d.extent = {static_cast<int>(values.size())};
    d.values = std::move(values);
    return d;
}

bool DiscreteDistribution::contains(std::span<const int> x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t a = 0; a < x.size(); ++a)
        if (x[a] < lower[a] || x[a] >= lower[a] + extent[a]) return false;
    return true;
}

std::size_t DiscreteDistribution::linear_index(std::span<const int> x) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < x.size(); ++a) idx = idx * extent[a] + static_cast<std::size_t>(x[a] - lower[a]);
    return idx;
}

std::vector<int> DiscreteDistribution::point(std::size_t linear) const {
    std::vector<int> x(lower.size());
    for (std::size_t a = lower.size(); a-- > 0;) {
        x[a] = lower[a] + static_cast<int>(linear % extent[a]);
        linear /= extent[a];
    }
    return x;
}

double DiscreteDistribution::at(std::span<const int> x) const {
    return contains(x) ? values[linear_index(x)] : 0.0;
}

double DiscreteDistribution::total() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

DiscreteDistribution marginalize(const DiscreteDistribution& d, std::span<const std::size_t> keep) {
    std::vector<std::string> axes;
    std::vector<int> lo, ext;
    for (std::size_t a : keep) {
        if (a >= d.dims()) throw std::out_of_range("marginalize: axis out of range");
        axes.push_back(a < d.axes.size() ? d.axes[a] : std::string());
        lo.push_back(d.lower[a]);
        ext.push_back(d.extent[a]);
    }
    DiscreteDistribution out = DiscreteDistribution::box(axes, lo, ext);
    out.time = d.time;
    std::vector<int> sub(keep.size());
    for (std::size_t k = 0; k < d.values.size(); ++k) {
        if (d.values[k] == 0.0) continue;
        auto x = d.point(k);
        for (std::size_t i = 0; i < keep.size(); ++i) sub[i] = x[keep[i]];
        out.values[out.linear_index(sub)] += d.values[k];
    }
    return out;
}

MomentVector moments_from_distribution(const DiscreteDistribution& d, int M) {
    if (M < 1) throw std::invalid_argument("moment order must be >= 1");
    const std::size_t n = d.dims();
    MomentVector mv;
    mv.num_species = n;
    mv.order = M;
    auto indices = enumerate_multi_indices(n, 1, M);
    std::vector<double> acc(indices.size(), 0.0);
    // powers[a][k] = x_a^k for the current point
    std::vector<std::vector<double>> powers(n, std::vector<double>(M + 1, 1.0));
    for (std::size_t k = 0; k < d.values.size(); ++k) {
        const double p = d.values[k];
        if (p == 0.0) continue;
        auto x = d.point(k);
        for (std::size_t a = 0; a < n; ++a)
            for (int e = 1; e <= M; ++e) powers[a][e] = powers[a][e - 1] * x[a];
        for (std::size_t m = 0; m < indices.size(); ++m) {
            double v = p;
            for (std::size_t a = 0; a < n; ++a) v *= powers[a][indices[m][a]];
            acc[m] += v;
        }
    }
    for (std::size_t m = 0; m < indices.size(); ++m) mv.values.emplace(indices[m], acc[m]);
    return mv;
}

}  // namespace mcmrecon
