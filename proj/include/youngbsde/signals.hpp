#pragma once

// Driving signals of finite q-variation (q < 2) and their smooth approximations.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "youngbsde/paths.hpp"

namespace ybsde {

struct EtaSpec;

/// eta_c(t) = A_c sin(2 pi f_c t + phi_c), one entry per channel.
struct SinusoidSpec {
    std::vector<double> amplitudes;
    std::vector<double> frequencies;
    std::vector<double> phases;
};

/// Piecewise-linear path through `nodes` equally spaced knots with
/// independent N(0, increment_scale^2) increments, starting at 0.
struct RandomPlSpec {
    std::size_t nodes = 2;
    double increment_scale = 1.0;
    std::uint64_t seed = 0;
};

/// Fractional Brownian motion, Hurst index in (1/2, 1), sampled exactly on the grid.
struct FbmSpec {
    double hurst = 0.75;
    std::uint64_t seed = 0;
    double scale = 1.0;
};

/// Moving average of `base` with half-width mollifier_half_width(nodes, level).
struct MollifiedSpec {
    std::shared_ptr<const EtaSpec> base;
    std::size_t level = 0;
};

struct EtaSpec {
    std::variant<SinusoidSpec, RandomPlSpec, FbmSpec, MollifiedSpec> kind;
    std::size_t dimension = 1;
    double horizon = 1.0;
};

struct GeneratedEta {
    DiscretePath path;
    /// Diagonal jitter that had to be added before the fBm covariance factorised; 0 when none.
    double cholesky_jitter = 0.0;
};

inline constexpr std::size_t kMaxFbmNodes = 4096;

/// Deterministic function of (spec, grid).
GeneratedEta generate_eta(const EtaSpec& spec, const TimeGrid& grid);

/// fBm covariance 1/2 (s^{2H} + t^{2H} - |t - s|^{2H}).
double fbm_covariance(double s, double t, double hurst);

/// Half-width of the level-k moving-average window on a grid of `nodes` nodes:
/// floor((nodes - 1) / (2 * 4^k)). Zero means no smoothing.
std::size_t mollifier_half_width(std::size_t nodes, std::size_t level);

/// Centered moving average; the window shrinks near the ends so both endpoints are kept.
DiscretePath moving_average(const DiscretePath& path, std::size_t half_width);

enum class ApproximationKind {
    moving_average,        ///< mollification with geometrically shrinking windows
    coarse_interpolation,  ///< linear interpolation through every s-th node
};

/// `levels` smooth approximations eta^n, coarsest first; the last level uses the
/// finest non-trivial window. q in [1, 2) is the variation exponent of eta.
std::vector<DiscretePath> approximation_sequence(const DiscretePath& eta, double q, std::size_t levels,
                                                 ApproximationKind kind = ApproximationKind::moving_average);

/// var_distance(level, eta, q_prime) for each level.
std::vector<double> ladder_distances(std::span<const DiscretePath> levels, const DiscretePath& eta, double q_prime);

struct QvarProfileRow {
    double exponent = 1.0;
    double pvar = 0.0;
    /// sum |increment|^p over the dyadic partition with 2^l cells, l = 0, 1, ...
    std::vector<double> dyadic_sums;
};

std::vector<QvarProfileRow> qvar_profile(const DiscretePath& eta, std::span<const double> exponents);

}  // namespace ybsde
