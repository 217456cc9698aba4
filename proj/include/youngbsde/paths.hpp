#pragma once

// Discrete paths and exact variation norms.
//
// A DiscretePath is the piecewise-linear interpolation of its node values.
// For such a path the supremum over partitions in the p-variation is attained
// on partitions made of grid nodes, so every norm here is computed exactly
// over the node skeleton.

#include <cstddef>
#include <span>
#include <vector>

namespace ybsde {

class TimeGrid {
public:
    /// Strictly increasing, starts at 0, at least two nodes.
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(double horizon, std::size_t cells);

    /// Union of node times; times closer than 1e-12 * horizon are identified.
    static TimeGrid merge(const TimeGrid& a, const TimeGrid& b);

    std::size_t size() const noexcept { return times_.size(); }
    double operator[](std::size_t i) const { return times_[i]; }
    double horizon() const noexcept { return times_.back(); }
    double mesh() const noexcept;
    double step(std::size_t i) const { return times_[i + 1] - times_[i]; }
    std::span<const double> times() const noexcept { return times_; }

    /// Index of the cell [t_i, t_{i+1}] containing t (t clamped to the grid).
    std::size_t cell_of(double t) const;
    /// Node index whose time is within `tol` of t, or size() if none.
    std::size_t find_node(double t, double tol = 1e-12) const;

    /// Each cell split into `factor` equal sub-cells.
    TimeGrid refined(std::size_t factor) const;

    bool operator==(const TimeGrid& other) const = default;

private:
    std::vector<double> times_;
};

/// Inclusive range of node indices [first, last].
struct Window {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t nodes() const noexcept { return last - first + 1; }
};

class DiscretePath {
public:
    /// `values` is row-major, one row of `dim` coordinates per grid node.
    DiscretePath(TimeGrid grid, std::vector<double> values, std::size_t dim = 1);

    static DiscretePath constant(TimeGrid grid, std::span<const double> point);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    Window full_window() const noexcept { return {0, size() - 1}; }

    std::span<const double> node(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    double at(std::size_t i, std::size_t coord = 0) const { return values_[i * dim_ + coord]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Linear interpolation; t is clamped to [0, T].
    std::vector<double> evaluate(double t) const;
    DiscretePath resample(const TimeGrid& grid) const;
    /// Single coordinate as a scalar path.
    DiscretePath channel(std::size_t coord) const;

    DiscretePath scaled(double c) const;

private:
    TimeGrid grid_;
    std::vector<double> values_;
    std::size_t dim_;
};

/// a - b on the union grid of both paths.
DiscretePath path_difference(const DiscretePath& a, const DiscretePath& b);
/// a + c * b on the union grid.
DiscretePath path_axpy(const DiscretePath& a, double c, const DiscretePath& b);

/// Largest window accepted by the O(n^2) variation DP.
inline constexpr std::size_t kMaxVariationWindow = 20000;
/// Largest window accepted by exhaustive partition enumeration.
inline constexpr std::size_t kMaxBruteForceWindow = 14;

/// ( max over partitions of the window of sum |X_{u,v}|^p )^{1/p}, Euclidean increments.
double pvar_norm(const DiscretePath& path, double p, Window window);
double pvar_norm(const DiscretePath& path, double p);

/// Same value by enumerating every partition; test oracle for windows of at most 14 nodes.
double brute_force_pvar(const DiscretePath& path, double p, Window window);

/// Max Euclidean norm over the window's nodes.
double sup_norm(const DiscretePath& path, Window window);
double sup_norm(const DiscretePath& path);

/// pvar_norm(a - b, q) + |a_0 - b_0| on the union grid.
double var_distance(const DiscretePath& a, const DiscretePath& b, double q);

/// For a scalar sequence x_0..x_n returns S with S[i] = sup over partitions of [i, n]
/// of sum |x_v - x_u|^p, i.e. the p-th power of the p-variation of every suffix.
std::vector<double> suffix_pvar_powers(std::span<const double> x, double p);

}  // namespace ybsde
