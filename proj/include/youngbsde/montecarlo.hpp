#pragma once

// Brownian ensembles and Euler-Maruyama forward simulation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "youngbsde/paths.hpp"

namespace ybsde {

/// M paths of d-dimensional Brownian motion on a grid; each path starts at 0.
class BrownianEnsemble {
public:
    BrownianEnsemble(TimeGrid grid, std::size_t paths, std::size_t dim, std::uint64_t seed, std::vector<double> data);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t paths() const noexcept { return paths_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t nodes() const noexcept { return grid_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }

    double value(std::size_t path, std::size_t node, std::size_t coord = 0) const {
        return data_[(path * nodes() + node) * dim_ + coord];
    }
    /// W_{t_{cell+1}} - W_{t_cell}
    double increment(std::size_t path, std::size_t cell, std::size_t coord = 0) const {
        return value(path, cell + 1, coord) - value(path, cell, coord);
    }
    /// Row-major nodes x dim block of one path.
    std::span<const double> path_data(std::size_t path) const {
        return {data_.data() + path * nodes() * dim_, nodes() * dim_};
    }
    DiscretePath path(std::size_t i) const;
    std::span<const double> data() const noexcept { return data_; }

private:
    TimeGrid grid_;
    std::size_t paths_;
    std::size_t dim_;
    std::uint64_t seed_;
    std::vector<double> data_;
};

/// Increments are N(0, dt) draws keyed by (seed, path, node, coord).
BrownianEnsemble sample_brownian(const TimeGrid& grid, std::size_t paths, std::size_t dim, std::uint64_t seed,
                                 unsigned workers = 1);

using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

/// dX = b(X) dt + sigma(X) dW started at x0 at time start_time.
struct SdeSpec {
    std::size_t state_dim = 1;  ///< m
    VectorField drift;          ///< writes m values
    VectorField diffusion;      ///< writes an m x d row-major matrix
    std::vector<double> x0;
    double start_time = 0.0;
    double drift_lipschitz = 0.0;
    double diffusion_lipschitz = 0.0;
};

/// m = d = 1 with b(x) = b0 + b1 x and sigma(x) = s0 + s1 x.
SdeSpec affine_sde(double b0, double b1, double s0, double s1, double x0, double start_time = 0.0);

/// Forward states X on the ensemble grid.
class ForwardEnsemble {
public:
    ForwardEnsemble(TimeGrid grid, std::size_t paths, std::size_t dim, std::size_t start_node, std::vector<double> data);

    /// X = W, as used when the terminal value is a functional of the Brownian path itself.
    static ForwardEnsemble identity(const BrownianEnsemble& w);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t paths() const noexcept { return paths_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t nodes() const noexcept { return grid_.size(); }
    std::size_t start_node() const noexcept { return start_node_; }

    std::span<const double> state(std::size_t path, std::size_t node) const {
        return {data_.data() + (path * nodes() + node) * dim_, dim_};
    }
    /// paths x dim block of states at one node.
    std::vector<double> slice(std::size_t node) const;
    DiscretePath path(std::size_t i) const;

private:
    TimeGrid grid_;
    std::size_t paths_;
    std::size_t dim_;
    std::size_t start_node_;
    std::vector<double> data_;
};

/// X_{k+1} = X_k + b(X_k) dt_k + sigma(X_k) dW_k from the start node on;
/// X is held at x0 before it. The start time must be a grid node.
ForwardEnsemble euler_maruyama(const SdeSpec& sde, const BrownianEnsemble& ensemble, unsigned workers = 1);

}  // namespace ybsde
