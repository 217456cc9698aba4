#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "youngbsde/paths.hpp"

namespace testing {

inline ybsde::DiscretePath uniform_path(std::vector<double> values, double horizon = 1.0) {
    const std::size_t cells = values.size() - 1;
    return ybsde::DiscretePath(ybsde::TimeGrid::uniform(horizon, cells), std::move(values));
}

/// Path t -> fn(t) sampled on a uniform grid.
template <class Fn>
ybsde::DiscretePath sampled(Fn fn, std::size_t cells, double horizon = 1.0) {
    const auto grid = ybsde::TimeGrid::uniform(horizon, cells);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = fn(grid[i]);
    return ybsde::DiscretePath(grid, std::move(v));
}

/// Gaussian random walk on a jittered grid of [0, 1].
inline ybsde::DiscretePath random_walk(std::mt19937_64& rng, std::size_t nodes, double scale = 1.0) {
    std::uniform_real_distribution<double> gap(0.2, 1.0);
    std::normal_distribution<double> step(0.0, scale);
    std::vector<double> t(nodes, 0.0);
    for (std::size_t i = 1; i < nodes; ++i) t[i] = t[i - 1] + gap(rng);
    for (auto& s : t) s /= t.back();
    std::vector<double> v(nodes);
    v[0] = step(rng);
    for (std::size_t i = 1; i < nodes; ++i) v[i] = v[i - 1] + step(rng);
    return ybsde::DiscretePath(ybsde::TimeGrid(t), std::move(v));
}

inline double rel_gap(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

}  // namespace testing
