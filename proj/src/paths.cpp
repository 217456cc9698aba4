#include "youngbsde/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "youngbsde/errors.hpp"

namespace ybsde {

namespace {

void check_exponent(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw ValidationError("variation exponent must be finite and >= 1, got " + std::to_string(p));
    }
}

void check_window(const DiscretePath& path, Window w) {
    if (w.first > w.last || w.last >= path.size()) {
        throw ValidationError("empty or out-of-range window [" + std::to_string(w.first) + ", " +
                              std::to_string(w.last) + "] on a path of " + std::to_string(path.size()) +
                              " nodes");
    }
}

double increment_norm(const DiscretePath& path, std::size_t u, std::size_t v) {
    if (path.dim() == 1) return std::fabs(path.at(v) - path.at(u));
    double s = 0.0;
    for (std::size_t c = 0; c < path.dim(); ++c) {
        const double d = path.at(v, c) - path.at(u, c);
        s += d * d;
    }
    return std::sqrt(s);
}

inline double powp(double x, double p) {
    if (p == 1.0) return x;
    if (p == 2.0) return x * x;
    return std::pow(x, p);
}

// Nodes of a scalar window that may appear in an optimal partition: the two
// endpoints and every weak local extremum in between. A node through which the
// path is monotone can always be dropped or moved to a neighbour without
// decreasing the sum, since |.|^p is convex and superadditive for p >= 1.
std::vector<std::size_t> scalar_candidates(std::span<const double> x, std::size_t first, std::size_t last) {
    std::vector<std::size_t> keep;
    keep.reserve(last - first + 1);
    keep.push_back(first);
    for (std::size_t j = first + 1; j < last; ++j) {
        if ((x[j] - x[j - 1]) * (x[j + 1] - x[j]) <= 0.0) keep.push_back(j);
    }
    if (last != first) keep.push_back(last);
    return keep;
}

double scalar_pvar_power(std::span<const double> x, double p, std::size_t first, std::size_t last) {
    const auto nodes = scalar_candidates(x, first, last);
    std::vector<double> best(nodes.size(), 0.0);
    for (std::size_t j = 1; j < nodes.size(); ++j) {
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            b = std::max(b, best[i] + powp(std::fabs(x[nodes[j]] - x[nodes[i]]), p));
        }
        best[j] = b;
    }
    return best.back();
}

}  // namespace

// ---------------------------------------------------------------- TimeGrid

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) throw ValidationError("a time grid needs at least 2 nodes");
    if (times_.front() != 0.0) throw ValidationError("a time grid must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1]) || !std::isfinite(times_[i])) {
            throw ValidationError("time grid is not strictly increasing at node " + std::to_string(i));
        }
    }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t cells) {
    if (!(horizon > 0.0) || cells == 0) throw ValidationError("uniform grid needs horizon > 0 and cells >= 1");
    std::vector<double> t(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) t[i] = horizon * static_cast<double>(i) / static_cast<double>(cells);
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::merge(const TimeGrid& a, const TimeGrid& b) {
    if (a == b) return a;
    const double tol = 1e-12 * std::max(a.horizon(), b.horizon());
    std::vector<double> all;
    all.reserve(a.size() + b.size());
    std::merge(a.times_.begin(), a.times_.end(), b.times_.begin(), b.times_.end(), std::back_inserter(all));
    std::vector<double> out;
    out.reserve(all.size());
    for (double t : all) {
        if (out.empty() || t - out.back() > tol) out.push_back(t);
    }
    return TimeGrid(std::move(out));
}

double TimeGrid::mesh() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) m = std::max(m, times_[i + 1] - times_[i]);
    return m;
}

std::size_t TimeGrid::cell_of(double t) const {
    if (t <= times_.front()) return 0;
    if (t >= times_.back()) return times_.size() - 2;
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::size_t TimeGrid::find_node(double t, double tol) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    if (it != times_.end() && std::fabs(*it - t) <= tol) return static_cast<std::size_t>(it - times_.begin());
    return times_.size();
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
    if (factor == 0) throw ValidationError("refinement factor must be >= 1");
    if (factor == 1) return *this;
    std::vector<double> t;
    t.reserve((times_.size() - 1) * factor + 1);
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        const double h = times_[i + 1] - times_[i];
        for (std::size_t k = 0; k < factor; ++k) {
            t.push_back(times_[i] + h * static_cast<double>(k) / static_cast<double>(factor));
        }
    }
    t.push_back(times_.back());
    return TimeGrid(std::move(t));
}

// ------------------------------------------------------------ DiscretePath

DiscretePath::DiscretePath(TimeGrid grid, std::vector<double> values, std::size_t dim)
    : grid_(std::move(grid)), values_(std::move(values)), dim_(dim) {
    if (dim_ == 0) throw ValidationError("path dimension must be >= 1");
    if (values_.size() != grid_.size() * dim_) {
        throw ValidationError("path has " + std::to_string(values_.size()) + " values, expected " +
                              std::to_string(grid_.size() * dim_));
    }
}

DiscretePath DiscretePath::constant(TimeGrid grid, std::span<const double> point) {
    std::vector<double> v;
    v.reserve(grid.size() * point.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v.insert(v.end(), point.begin(), point.end());
    return DiscretePath(std::move(grid), std::move(v), point.size());
}

std::vector<double> DiscretePath::evaluate(double t) const {
    const std::size_t i = grid_.cell_of(t);
    const double t0 = grid_[i];
    const double t1 = grid_[i + 1];
    const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    std::vector<double> out(dim_);
    for (std::size_t c = 0; c < dim_; ++c) {
        const double a = at(i, c);
        const double b = at(i + 1, c);
        out[c] = (w == 1.0) ? b : a + w * (b - a);
    }
    return out;
}

DiscretePath DiscretePath::resample(const TimeGrid& grid) const {
    if (grid == grid_) return *this;
    std::vector<double> v;
    v.reserve(grid.size() * dim_);
    for (double t : grid.times()) {
        const std::size_t exact = grid_.find_node(t, 1e-13 * grid_.horizon());
        if (exact < grid_.size()) {
            const auto n = node(exact);
            v.insert(v.end(), n.begin(), n.end());
        } else {
            const auto e = evaluate(t);
            v.insert(v.end(), e.begin(), e.end());
        }
    }
    return DiscretePath(grid, std::move(v), dim_);
}

DiscretePath DiscretePath::channel(std::size_t coord) const {
    if (coord >= dim_) throw ValidationError("channel index out of range");
    std::vector<double> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = at(i, coord);
    return DiscretePath(grid_, std::move(v), 1);
}

DiscretePath DiscretePath::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return DiscretePath(grid_, std::move(v), dim_);
}

DiscretePath path_axpy(const DiscretePath& a, double c, const DiscretePath& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("path dimensions differ: " + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()));
    }
    const TimeGrid grid = TimeGrid::merge(a.grid(), b.grid());
    const DiscretePath ra = a.resample(grid);
    const DiscretePath rb = b.resample(grid);
    std::vector<double> v(ra.values().begin(), ra.values().end());
    const auto bv = rb.values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += c * bv[k];
    return DiscretePath(grid, std::move(v), a.dim());
}

DiscretePath path_difference(const DiscretePath& a, const DiscretePath& b) { return path_axpy(a, -1.0, b); }

// ------------------------------------------------------------------- norms

double pvar_norm(const DiscretePath& path, double p, Window window) {
    check_exponent(p);
    check_window(path, window);
    if (window.nodes() > kMaxVariationWindow) {
        throw ValidationError("window of " + std::to_string(window.nodes()) + " nodes exceeds the " +
                              std::to_string(kMaxVariationWindow) + "-node limit of the exact variation DP");
    }
    if (window.first == window.last) return 0.0;

    if (path.dim() == 1) {
        return std::pow(scalar_pvar_power(path.values(), p, window.first, window.last), 1.0 / p);
    }

    const std::size_t n = window.nodes();
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double b = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            b = std::max(b, best[i] + powp(increment_norm(path, window.first + i, window.first + j), p));
        }
        best[j] = b;
    }
    return std::pow(best.back(), 1.0 / p);
}

double pvar_norm(const DiscretePath& path, double p) { return pvar_norm(path, p, path.full_window()); }

double brute_force_pvar(const DiscretePath& path, double p, Window window) {
    check_exponent(p);
    check_window(path, window);
    const std::size_t n = window.nodes();
    if (n > kMaxBruteForceWindow) {
        throw ValidationError("brute-force enumeration is limited to " + std::to_string(kMaxBruteForceWindow) +
                              " nodes, window has " + std::to_string(n));
    }
    if (n == 1) return 0.0;
    const std::size_t interior = n - 2;
    double best = 0.0;
    for (unsigned long mask = 0; mask < (1UL << interior); ++mask) {
        double sum = 0.0;
        std::size_t prev = window.first;
        for (std::size_t k = 0; k < interior; ++k) {
            if (mask & (1UL << k)) {
                const std::size_t node = window.first + 1 + k;
                sum += powp(increment_norm(path, prev, node), p);
                prev = node;
            }
        }
        sum += powp(increment_norm(path, prev, window.last), p);
        best = std::max(best, sum);
    }
    return std::pow(best, 1.0 / p);
}

double sup_norm(const DiscretePath& path, Window window) {
    check_window(path, window);
    double m = 0.0;
    for (std::size_t i = window.first; i <= window.last; ++i) {
        double s = 0.0;
        for (double v : path.node(i)) s += v * v;
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

double sup_norm(const DiscretePath& path) { return sup_norm(path, path.full_window()); }

double var_distance(const DiscretePath& a, const DiscretePath& b, double q) {
    check_exponent(q);
    const DiscretePath d = path_difference(a, b);
    double start = 0.0;
    for (double v : d.node(0)) start += v * v;
    return pvar_norm(d, q) + std::sqrt(start);
}

std::vector<double> suffix_pvar_powers(std::span<const double> x, double p) {
    check_exponent(p);
    const std::size_t n = x.size();
    std::vector<double> s(n, 0.0);
    if (n < 2) return s;
    const std::size_t last = n - 1;

    // Candidate right neighbours: weak local extrema and the last node.
    std::vector<std::size_t> cand;
    cand.reserve(n);
    for (std::size_t j = 1; j < last; ++j) {
        if ((x[j] - x[j - 1]) * (x[j + 1] - x[j]) <= 0.0) cand.push_back(j);
    }
    cand.push_back(last);

    // Suffix range of x over candidates from position k on, used to stop early:
    // S is non-increasing in the start index, so D_k^p + S[cand_k] bounds every
    // later candidate.
    std::vector<double> smax(cand.size()), smin(cand.size());
    for (std::size_t k = cand.size(); k-- > 0;) {
        const double v = x[cand[k]];
        smax[k] = (k + 1 < cand.size()) ? std::max(v, smax[k + 1]) : v;
        smin[k] = (k + 1 < cand.size()) ? std::min(v, smin[k + 1]) : v;
    }

    std::size_t first_cand = cand.size();  // first candidate index with cand > i
    for (std::size_t i = last; i-- > 0;) {
        while (first_cand > 0 && cand[first_cand - 1] > i) --first_cand;
        double best = 0.0;
        for (std::size_t k = first_cand; k < cand.size(); ++k) {
            const double reach = std::max(smax[k] - x[i], x[i] - smin[k]);
            if (powp(reach, p) + s[cand[k]] <= best) break;
            best = std::max(best, powp(std::fabs(x[cand[k]] - x[i]), p) + s[cand[k]]);
        }
        s[i] = best;
    }
    return s;
}

}  // namespace ybsde
