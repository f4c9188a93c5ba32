#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcmrecon/moments.hpp"

namespace mcmrecon {

/// Probability values on a dense integer box (1D interval, 2D rectangle, or
/// a full state-space box). Row-major, last axis fastest.
struct DiscreteDistribution {
    std::vector<std::string> axes;
    std::vector<int> lower;
    std::vector<int> extent;
    std::vector<double> values;
    double time = 0.0;

    static DiscreteDistribution box(std::vector<std::string> axes, std::vector<int> lower, std::vector<int> extent);
    static DiscreteDistribution one_d(std::string axis, int lower, std::vector<double> values);

    std::size_t dims() const { return lower.size(); }
    std::size_t size() const { return values.size(); }
    int upper(std::size_t axis) const { return lower[axis] + extent[axis] - 1; }
    bool contains(std::span<const int> x) const;
    std::size_t linear_index(std::span<const int> x) const;
    std::vector<int> point(std::size_t linear) const;
    /// 0 outside the box.
    double at(std::span<const int> x) const;
    double at(int x) const { return at(std::span<const int>(&x, 1)); }
    double at(int x, int y) const {
        int p[2] = {x, y};
        return at(std::span<const int>(p, 2));
    }
    double total() const;
};

/// Sum out every axis not listed; result axes follow the order in `keep`.
DiscreteDistribution marginalize(const DiscreteDistribution& dist, std::span<const std::size_t> keep);

/// Exact raw moments of the (truncated) distribution for 1 <= |alpha| <= M.
/// Moments are of the stored values as-is (no renormalization).
MomentVector moments_from_distribution(const DiscreteDistribution& dist, int M);

}  // namespace mcmrecon
