#include "youngbsde/montecarlo.hpp"

#include <cmath>
#include <string>

#include "youngbsde/errors.hpp"
#include "youngbsde/parallel.hpp"
#include "youngbsde/rng.hpp"

namespace ybsde {

BrownianEnsemble::BrownianEnsemble(TimeGrid grid, std::size_t paths, std::size_t dim, std::uint64_t seed,
                                   std::vector<double> data)
    : grid_(std::move(grid)), paths_(paths), dim_(dim), seed_(seed), data_(std::move(data)) {
    if (paths_ == 0 || dim_ == 0) throw ValidationError("ensemble needs at least one path and one dimension");
    if (data_.size() != paths_ * grid_.size() * dim_) throw ValidationError("ensemble data has the wrong size");
}

DiscretePath BrownianEnsemble::path(std::size_t i) const {
    const auto block = path_data(i);
    return DiscretePath(grid_, std::vector<double>(block.begin(), block.end()), dim_);
}

BrownianEnsemble sample_brownian(const TimeGrid& grid, std::size_t paths, std::size_t dim, std::uint64_t seed,
                                 unsigned workers) {
    if (paths == 0) throw ValidationError("sample_brownian needs M >= 1");
    if (dim == 0) throw ValidationError("sample_brownian needs d >= 1");
    const std::size_t n = grid.size();
    std::vector<double> data(paths * n * dim, 0.0);
    std::vector<double> sq(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) sq[i] = std::sqrt(grid.step(i));
    const KeyedNormal rng(seed);
    parallel_for(paths, workers, [&](std::size_t m) {
        double* w = data.data() + m * n * dim;
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t c = 0; c < dim; ++c) {
                const double z = rng.normal(static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(i),
                                            static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(Stream::brownian));
                w[i * dim + c] = w[(i - 1) * dim + c] + sq[i - 1] * z;
            }
        }
    });
    return BrownianEnsemble(grid, paths, dim, seed, std::move(data));
}

SdeSpec affine_sde(double b0, double b1, double s0, double s1, double x0, double start_time) {
    SdeSpec s;
    s.state_dim = 1;
    s.drift = [b0, b1](std::span<const double> x, std::span<double> out) { out[0] = b0 + b1 * x[0]; };
    s.diffusion = [s0, s1](std::span<const double> x, std::span<double> out) { out[0] = s0 + s1 * x[0]; };
    s.x0 = {x0};
    s.start_time = start_time;
    s.drift_lipschitz = std::fabs(b1);
    s.diffusion_lipschitz = std::fabs(s1);
    return s;
}

ForwardEnsemble::ForwardEnsemble(TimeGrid grid, std::size_t paths, std::size_t dim, std::size_t start_node,
                                 std::vector<double> data)
    : grid_(std::move(grid)), paths_(paths), dim_(dim), start_node_(start_node), data_(std::move(data)) {
    if (data_.size() != paths_ * grid_.size() * dim_) throw ValidationError("forward ensemble data has the wrong size");
    if (start_node_ >= grid_.size()) throw ValidationError("forward start node out of range");
}

ForwardEnsemble ForwardEnsemble::identity(const BrownianEnsemble& w) {
    return ForwardEnsemble(w.grid(), w.paths(), w.dim(), 0, std::vector<double>(w.data().begin(), w.data().end()));
}

std::vector<double> ForwardEnsemble::slice(std::size_t node) const {
    std::vector<double> out(paths_ * dim_);
    for (std::size_t m = 0; m < paths_; ++m) {
        const auto s = state(m, node);
        std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(m * dim_));
    }
    return out;
}

DiscretePath ForwardEnsemble::path(std::size_t i) const {
    const auto* b = data_.data() + i * nodes() * dim_;
    return DiscretePath(grid_, std::vector<double>(b, b + nodes() * dim_), dim_);
}

ForwardEnsemble euler_maruyama(const SdeSpec& sde, const BrownianEnsemble& ensemble, unsigned workers) {
    const std::size_t m_dim = sde.state_dim;
    const std::size_t d = ensemble.dim();
    if (m_dim == 0 || sde.x0.size() != m_dim) throw ValidationError("SDE initial point must have state_dim entries");
    if (!sde.drift || !sde.diffusion) throw ValidationError("SDE needs drift and diffusion");
    const TimeGrid& grid = ensemble.grid();
    const std::size_t n = grid.size();
    const std::size_t start = grid.find_node(sde.start_time, 1e-10 * grid.horizon());
    if (start >= n) {
        throw ValidationError("SDE start time " + std::to_string(sde.start_time) + " is not a grid node");
    }

    std::vector<double> data(ensemble.paths() * n * m_dim);
    parallel_for(ensemble.paths(), workers, [&](std::size_t p) {
        double* x = data.data() + p * n * m_dim;
        for (std::size_t i = 0; i <= start; ++i) std::copy(sde.x0.begin(), sde.x0.end(), x + i * m_dim);
        std::vector<double> b(m_dim), sig(m_dim * d);
        for (std::size_t i = start; i + 1 < n; ++i) {
            const std::span<const double> cur(x + i * m_dim, m_dim);
            sde.drift(cur, b);
            sde.diffusion(cur, sig);
            const double dt = grid.step(i);
            for (std::size_t r = 0; r < m_dim; ++r) {
                double v = cur[r] + b[r] * dt;
                for (std::size_t c = 0; c < d; ++c) v += sig[r * d + c] * ensemble.increment(p, i, c);
                if (!std::isfinite(v)) {
                    throw NumericalError("Euler-Maruyama state of path " + std::to_string(p) +
                                             " became non-finite at node " + std::to_string(i + 1),
                                         p);
                }
                x[(i + 1) * m_dim + r] = v;
            }
        }
    });
    return ForwardEnsemble(grid, ensemble.paths(), m_dim, start, std::move(data));
}

}  // namespace ybsde
