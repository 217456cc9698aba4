#include "youngbsde/signals.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "youngbsde/errors.hpp"
#include "youngbsde/rng.hpp"

namespace ybsde {

namespace {

DiscretePath sinusoid(const SinusoidSpec& s, std::size_t dim, const TimeGrid& grid) {
    if (s.amplitudes.size() != dim || s.frequencies.size() != dim || s.phases.size() != dim) {
        throw ValidationError("sinusoid needs one amplitude, frequency and phase per channel");
    }
    for (std::size_t c = 0; c < dim; ++c) {
        if (!std::isfinite(s.amplitudes[c]) || !std::isfinite(s.frequencies[c]) || !std::isfinite(s.phases[c])) {
            throw ValidationError("sinusoid parameters must be finite");
        }
    }
    std::vector<double> v(grid.size() * dim);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t c = 0; c < dim; ++c) {
            v[i * dim + c] =
                s.amplitudes[c] * std::sin(2.0 * std::numbers::pi * s.frequencies[c] * grid[i] + s.phases[c]);
        }
    }
    return DiscretePath(grid, std::move(v), dim);
}

DiscretePath random_pl(const RandomPlSpec& s, std::size_t dim, double horizon, const TimeGrid& grid) {
    if (s.nodes < 2) throw ValidationError("random-pl needs at least 2 knots");
    if (!std::isfinite(s.increment_scale)) throw ValidationError("random-pl increment scale must be finite");
    const KeyedNormal rng(s.seed);
    const TimeGrid knots = TimeGrid::uniform(horizon, s.nodes - 1);
    std::vector<double> v(s.nodes * dim, 0.0);
    for (std::size_t k = 1; k < s.nodes; ++k) {
        for (std::size_t c = 0; c < dim; ++c) {
            const double z = rng.normal(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(k), 0,
                                        static_cast<std::uint32_t>(Stream::random_pl));
            v[k * dim + c] = v[(k - 1) * dim + c] + s.increment_scale * z;
        }
    }
    return DiscretePath(knots, std::move(v), dim).resample(grid);
}

GeneratedEta fbm(const FbmSpec& s, std::size_t dim, const TimeGrid& grid) {
    if (!(s.hurst > 0.5 && s.hurst < 1.0)) {
        throw ValidationError("fbm Hurst index must lie strictly inside (0.5, 1), got " + std::to_string(s.hurst));
    }
    if (grid.size() > kMaxFbmNodes) {
        throw ValidationError("fbm generation is limited to " + std::to_string(kMaxFbmNodes) + " nodes, grid has " +
                              std::to_string(grid.size()));
    }
    const std::size_t n = grid.size() - 1;  // B_0 = 0 is not random
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            cov(i, j) = cov(j, i) = fbm_covariance(grid[i + 1], grid[j + 1], s.hurst);
        }
    }
    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const double scale = cov.diagonal().maxCoeff();
    while (llt.info() != Eigen::Success) {
        jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 10.0;
        if (jitter > 1e-6 * scale) throw NumericalError("fbm covariance is not positive definite even with jitter");
        Eigen::MatrixXd c = cov;
        c.diagonal().array() += jitter;
        llt.compute(c);
    }
    const Eigen::MatrixXd lower = llt.matrixL();

    const KeyedNormal rng(s.seed);
    std::vector<double> v((n + 1) * dim, 0.0);
    Eigen::VectorXd z(n);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            z(static_cast<Eigen::Index>(k)) = rng.normal(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(k),
                                                         0, static_cast<std::uint32_t>(Stream::fbm));
        }
        const Eigen::VectorXd x = lower.triangularView<Eigen::Lower>() * z;
        for (std::size_t k = 0; k < n; ++k) v[(k + 1) * dim + c] = s.scale * x(static_cast<Eigen::Index>(k));
    }
    return {DiscretePath(grid, std::move(v), dim), jitter};
}

}  // namespace

double fbm_covariance(double s, double t, double hurst) {
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::fabs(t - s), h2));
}

GeneratedEta generate_eta(const EtaSpec& spec, const TimeGrid& grid) {
    if (spec.dimension == 0) throw ValidationError("eta dimension must be >= 1");
    if (std::fabs(grid.horizon() - spec.horizon) > 1e-12 * std::max(1.0, spec.horizon)) {
        throw ValidationError("grid horizon does not match the eta horizon");
    }
    return std::visit(
        [&](const auto& kind) -> GeneratedEta {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, SinusoidSpec>) {
                return {sinusoid(kind, spec.dimension, grid), 0.0};
            } else if constexpr (std::is_same_v<K, RandomPlSpec>) {
                return {random_pl(kind, spec.dimension, spec.horizon, grid), 0.0};
            } else if constexpr (std::is_same_v<K, FbmSpec>) {
                return fbm(kind, spec.dimension, grid);
            } else {
                if (!kind.base) throw ValidationError("mollified eta needs a base spec");
                GeneratedEta base = generate_eta(*kind.base, grid);
                if (base.path.dim() != spec.dimension) throw ValidationError("mollified base dimension mismatch");
                base.path = moving_average(base.path, mollifier_half_width(grid.size(), kind.level));
                return base;
            }
        },
        spec.kind);
}

std::size_t mollifier_half_width(std::size_t nodes, std::size_t level) {
    if (nodes < 2) return 0;
    std::size_t denom = 2;
    for (std::size_t k = 0; k < level; ++k) {
        if (denom > nodes) return 0;
        denom *= 4;
    }
    return (nodes - 1) / denom;
}

DiscretePath moving_average(const DiscretePath& path, std::size_t half_width) {
    if (half_width == 0) return path;
    const std::size_t n = path.size();
    const std::size_t d = path.dim();
    // prefix[i * d + c] = sum of the first i values of channel c
    std::vector<double> prefix((n + 1) * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) prefix[(i + 1) * d + c] = prefix[i * d + c] + path.at(i, c);
    }
    std::vector<double> v(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = std::min({half_width, i, n - 1 - i});
        const std::size_t lo = i - r;
        const std::size_t hi = i + r + 1;
        for (std::size_t c = 0; c < d; ++c) {
            v[i * d + c] = (r == 0) ? path.at(i, c)
                                    : (prefix[hi * d + c] - prefix[lo * d + c]) / static_cast<double>(hi - lo);
        }
    }
    return DiscretePath(path.grid(), std::move(v), d);
}

std::vector<DiscretePath> approximation_sequence(const DiscretePath& eta, double q, std::size_t levels,
                                                 ApproximationKind kind) {
    if (!(q >= 1.0 && q < 2.0)) throw ValidationError("approximation_sequence needs q in [1, 2)");
    if (levels < 2) throw ValidationError("approximation_sequence needs at least 2 levels");
    const std::size_t n = eta.size();

    // Finest level with a non-trivial window.
    std::size_t last = 0;
    while (mollifier_half_width(n, last + 1) >= 1) ++last;

    std::vector<DiscretePath> out;
    out.reserve(levels);
    for (std::size_t j = 0; j < levels; ++j) {
        const std::size_t back = levels - 1 - j;
        const std::size_t level = (back > last) ? 0 : last - back;
        const std::size_t h = mollifier_half_width(n, level);
        if (kind == ApproximationKind::moving_average) {
            out.push_back(moving_average(eta, h));
        } else {
            const std::size_t stride = std::max<std::size_t>(1, 2 * h);
            std::vector<double> knots;
            for (std::size_t i = 0; i < n; i += stride) knots.push_back(eta.grid()[i]);
            if (knots.back() != eta.grid().horizon()) knots.push_back(eta.grid().horizon());
            if (knots.size() < 2) knots = {0.0, eta.grid().horizon()};
            const TimeGrid coarse(std::move(knots));
            out.push_back(eta.resample(coarse).resample(eta.grid()));
        }
    }
    return out;
}

std::vector<double> ladder_distances(std::span<const DiscretePath> levels, const DiscretePath& eta, double q_prime) {
    std::vector<double> d;
    d.reserve(levels.size());
    for (const auto& lvl : levels) d.push_back(var_distance(lvl, eta, q_prime));
    return d;
}

std::vector<QvarProfileRow> qvar_profile(const DiscretePath& eta, std::span<const double> exponents) {
    const std::size_t cells = eta.size() - 1;
    std::vector<QvarProfileRow> rows;
    for (double p : exponents) {
        QvarProfileRow row;
        row.exponent = p;
        row.pvar = pvar_norm(eta, p);
        for (std::size_t parts = 1; parts <= cells; parts *= 2) {
            double sum = 0.0;
            std::size_t prev = 0;
            for (std::size_t j = 1; j <= parts; ++j) {
                const std::size_t idx = (j * cells) / parts;
                double s2 = 0.0;
                for (std::size_t c = 0; c < eta.dim(); ++c) {
                    const double dlt = eta.at(idx, c) - eta.at(prev, c);
                    s2 += dlt * dlt;
                }
                sum += std::pow(std::sqrt(s2), p);
                prev = idx;
            }
            row.dyadic_sums.push_back(sum);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ybsde
