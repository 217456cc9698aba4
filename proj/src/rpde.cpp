#include "youngbsde/rpde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "youngbsde/errors.hpp"
#include "youngbsde/young.hpp"

namespace ybsde {

namespace {

std::size_t locate(std::span<const double> nodes, double v, const char* what) {
    double scale = 1.0;
    for (double n : nodes) scale = std::max(scale, std::fabs(n));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (std::fabs(nodes[i] - v) <= 1e-9 * scale) return i;
    }
    throw ValidationError(std::string(what) + " " + std::to_string(v) + " is not a solution node");
}

// Grid through 0, every time in `extra` and T, merged with a uniform grid of `cells` cells.
TimeGrid simulation_grid(double horizon, std::size_t cells, std::span<const double> extra) {
    std::vector<double> t{0.0};
    std::vector<double> sorted(extra.begin(), extra.end());
    std::sort(sorted.begin(), sorted.end());
    for (double v : sorted) {
        if (!(v >= 0.0 && v <= horizon)) {
            throw ValidationError("time " + std::to_string(v) + " lies outside [0, T]");
        }
        if (v > t.back() + 1e-12 * horizon && v < horizon - 1e-12 * horizon) t.push_back(v);
    }
    t.push_back(horizon);
    return TimeGrid::merge(TimeGrid::uniform(horizon, cells), TimeGrid(std::move(t)));
}

void validate(const PdeProblem& pde) {
    if (!(pde.horizon > 0.0) || !std::isfinite(pde.horizon)) throw ValidationError("PDE horizon must be positive");
    if (pde.sde.state_dim == 0 || !pde.sde.drift || !pde.sde.diffusion) {
        throw ValidationError("PDE needs forward drift and diffusion coefficients");
    }
    if (!std::isfinite(pde.sde.drift_lipschitz) || !std::isfinite(pde.sde.diffusion_lipschitz)) {
        throw ValidationError("forward coefficient Lipschitz bounds must be finite");
    }
    if (pde.brownian_dim == 0) throw ValidationError("PDE needs a Brownian dimension >= 1");
}

BsdeProblem point_problem(const PdeProblem& pde, std::span<const double> x, double start_time) {
    BsdeProblem pb;
    pb.horizon = pde.horizon;
    pb.driver = pde.driver;
    pb.drift_fields = pde.drift_fields;
    pb.eta = pde.eta;
    pb.terminal = pde.terminal;
    SdeSpec sde = pde.sde;
    sde.x0.assign(x.begin(), x.end());
    sde.start_time = start_time;
    pb.forward = std::move(sde);
    return pb;
}

std::pair<double, double> solve_point(const PdeProblem& pde, const std::shared_ptr<const BrownianEnsemble>& ens,
                                      double t, double x, const RegressionSpec& regression,
                                      const SolverOptions& solver) {
    const TimeGrid& grid = ens->grid();
    const std::size_t node = grid.find_node(t, 1e-10 * grid.horizon());
    if (node + 1 >= grid.size()) return {pde.terminal(std::span<const double>(&x, 1)), 0.0};
    const std::vector<double> x0(pde.sde.state_dim, x);
    const BsdeSolution sol = solve_backward(point_problem(pde, x0, grid[node]), ens, regression, solver);
    return {sol.y0(), sol.y0_standard_error()};
}

double sigma_of(const PdeProblem& pde, double x) {
    double s = 0.0;
    pde.sde.diffusion(std::span<const double>(&x, 1), std::span<double>(&s, 1));
    return s;
}

double drift_of(const PdeProblem& pde, double x) {
    double b = 0.0;
    pde.sde.drift(std::span<const double>(&x, 1), std::span<double>(&b, 1));
    return b;
}

double pvar_between(const DiscretePath& eta, double q, double a, double b) {
    const double T = eta.grid().horizon();
    std::vector<double> marks{0.0};
    for (double v : {a, b}) {
        if (v > marks.back() + 1e-12 * T && v < T - 1e-12 * T) marks.push_back(v);
    }
    marks.push_back(T);
    const TimeGrid grid = TimeGrid::merge(eta.grid(), TimeGrid(std::move(marks)));
    const DiscretePath r = eta.resample(grid);
    const std::size_t i = grid.find_node(a, 1e-12 * T);
    const std::size_t j = grid.find_node(b, 1e-12 * T);
    if (i >= grid.size() || j >= grid.size()) throw ValidationError("modulus probe time outside eta's range");
    return pvar_norm(r, q, Window{std::min(i, j), std::max(i, j)});
}

}  // namespace

double PdeSolution::at(double t, double x) const {
    return at_index(locate(times, t, "time"), locate(xs, x, "space point"));
}

double PdeSolution::standard_error_at(double t, double x) const {
    return standard_errors[locate(times, t, "time") * xs.size() + locate(xs, x, "space point")];
}

PdeSolution feynman_kac_solve(const PdeProblem& pde, std::span<const double> times, std::span<const double> xs,
                              const MonteCarloSettings& mc, const RegressionSpec& regression) {
    validate(pde);
    if (times.empty() || xs.empty()) throw ValidationError("feynman_kac_solve needs time and space nodes");
    for (double x : xs) {
        if (!std::isfinite(x)) throw ValidationError("space nodes must be finite");
    }
    const TimeGrid grid = simulation_grid(pde.horizon, mc.steps, times);
    const auto ens = std::make_shared<const BrownianEnsemble>(
        sample_brownian(grid, mc.paths, pde.brownian_dim, mc.seed, mc.solver.workers));

    PdeSolution u;
    u.times.assign(times.begin(), times.end());
    u.xs.assign(xs.begin(), xs.end());
    u.values.assign(times.size() * xs.size(), 0.0);
    u.standard_errors.assign(times.size() * xs.size(), 0.0);
    u.scheme = "feynman-kac";
    u.seed = mc.seed;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            const auto [v, se] = solve_point(pde, ens, times[ti], xs[xi], regression, mc.solver);
            u.values[ti * xs.size() + xi] = v;
            u.standard_errors[ti * xs.size() + xi] = se;
        }
    }
    return u;
}

std::vector<std::pair<double, double>> feynman_kac_probes(const PdeProblem& pde, std::span<const Probe> probes,
                                                          const MonteCarloSettings& mc,
                                                          const RegressionSpec& regression) {
    validate(pde);
    std::vector<double> times;
    for (const auto& p : probes) times.push_back(p.t);
    const TimeGrid grid = simulation_grid(pde.horizon, mc.steps, times);
    const auto ens = std::make_shared<const BrownianEnsemble>(
        sample_brownian(grid, mc.paths, pde.brownian_dim, mc.seed, mc.solver.workers));
    std::vector<std::pair<double, double>> out;
    out.reserve(probes.size());
    for (const auto& p : probes) out.push_back(solve_point(pde, ens, p.t, p.x, regression, mc.solver));
    return out;
}

std::pair<double, double> fd_box(double probe_lo, double probe_hi, double sigma_max, double horizon) {
    const double w = 6.0 * sigma_max * std::sqrt(horizon);
    return {probe_lo - w, probe_hi + w};
}

double boundary_influence(double distance, double sigma_max, double horizon) {
    if (sigma_max == 0.0) return 0.0;
    if (distance <= 0.0) return 1.0;
    return std::erfc(distance / (sigma_max * std::sqrt(horizon)) / std::sqrt(2.0));
}

PdeSolution fd_reference_solve(const PdeProblem& pde, const FdSettings& st) {
    validate(pde);
    if (pde.sde.state_dim != 1 || pde.brownian_dim != 1) {
        throw ValidationError("the finite-difference solver handles scalar state and Brownian motion only");
    }
    if (st.t_cells == 0 || st.x_cells < 2) throw ValidationError("fd grid needs >= 1 time cell and >= 2 space cells");
    if (!(st.x_hi > st.x_lo)) throw ValidationError("fd box must have x_hi > x_lo");
    if (!(st.theta >= 0.0 && st.theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
    if (st.inner_iters == 0) throw ValidationError("inner_iters must be >= 1");
    if (pde.drift_fields.size() != pde.eta.dim()) throw ValidationError("one drift field per eta channel required");
    if (std::fabs(pde.eta.grid().horizon() - pde.horizon) > 1e-12 * pde.horizon) {
        throw ValidationError("eta horizon does not match the PDE horizon");
    }
    if (st.probe_lo < st.x_lo || st.probe_hi > st.x_hi || st.probe_lo > st.probe_hi) {
        throw ValidationError("probe region must lie inside the fd box");
    }

    const std::size_t nx = st.x_cells + 1;
    const std::size_t nt = st.t_cells + 1;
    const double dx = (st.x_hi - st.x_lo) / static_cast<double>(st.x_cells);
    const TimeGrid tgrid = TimeGrid::uniform(pde.horizon, st.t_cells);
    const double dt = tgrid.step(0);
    const DiscretePath eta = pde.eta.resample(tgrid);
    const std::size_t e = eta.dim();

    std::vector<double> xs(nx), sig(nx), drift(nx);
    double sigma_max = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
        xs[j] = (j + 1 == nx) ? st.x_hi : st.x_lo + static_cast<double>(j) * dx;
        sig[j] = sigma_of(pde, xs[j]);
        drift[j] = drift_of(pde, xs[j]);
        sigma_max = std::max(sigma_max, std::fabs(sig[j]));
    }
    if (st.theta < 0.5) {
        const double r = (1.0 - 2.0 * st.theta) * sigma_max * sigma_max * dt / (dx * dx);
        if (r > 1.0) {
            throw ValidationError("explicit fd step violates the CFL condition: (1 - 2 theta) sigma^2 dt / dx^2 = " +
                                  std::to_string(r) + " > 1");
        }
    }

    PdeSolution u;
    u.times.assign(tgrid.times().begin(), tgrid.times().end());
    u.xs = xs;
    u.values.assign(nt * nx, 0.0);
    u.standard_errors.assign(nt * nx, 0.0);
    u.scheme = "fd-theta";
    const double distance = std::min(st.probe_lo - st.x_lo, st.x_hi - st.probe_hi);
    const double influence = boundary_influence(distance, sigma_max, pde.horizon);
    if (influence > kBoundaryInfluenceLimit) {
        u.warnings.push_back("fd box too small: boundary heat-kernel mass at the probe region is " +
                             std::to_string(influence));
    }

    // L u_j = lo_j u_{j-1} + mid_j u_j + hi_j u_{j+1}
    std::vector<double> lo(nx, 0.0), mid(nx, 0.0), hi(nx, 0.0);
    for (std::size_t j = 1; j + 1 < nx; ++j) {
        const double diff = 0.5 * sig[j] * sig[j] / (dx * dx);
        const double adv = drift[j] / (2.0 * dx);
        lo[j] = diff - adv;
        hi[j] = diff + adv;
        mid[j] = -2.0 * diff;
    }

    std::vector<double> old(nx), cur(nx), rhs(nx), explicit_part(nx), cp(nx), dp(nx);
    for (std::size_t j = 0; j < nx; ++j) old[j] = pde.terminal(std::span<const double>(&xs[j], 1));
    std::copy(old.begin(), old.end(), u.values.begin() + static_cast<std::ptrdiff_t>((nt - 1) * nx));

    const std::vector<double> zero_z(1, 0.0);
    std::vector<double> d_eta(e);
    auto young_term = [&](double y) {
        double r = 0.0;
        for (std::size_t c = 0; c < e; ++c) {
            if (d_eta[c] != 0.0) r += pde.drift_fields[c](y) * d_eta[c];
        }
        return r;
    };

    for (std::size_t k = nt - 1; k-- > 0;) {
        const double t = tgrid[k];
        for (std::size_t c = 0; c < e; ++c) d_eta[c] = eta.at(k + 1, c) - eta.at(k, c);
        for (std::size_t j = 1; j + 1 < nx; ++j) {
            explicit_part[j] =
                old[j] + (1.0 - st.theta) * dt * (lo[j] * old[j - 1] + mid[j] * old[j] + hi[j] * old[j + 1]);
        }
        cur = old;
        for (std::size_t b : {std::size_t{0}, nx - 1}) {
            cur[b] = old[b] + pde.driver(t, old[b], zero_z) * dt + young_term(old[b]);
        }

        for (std::size_t it = 0; it < st.inner_iters; ++it) {
            for (std::size_t j = 1; j + 1 < nx; ++j) {
                const double z = sig[j] * (cur[j + 1] - cur[j - 1]) / (2.0 * dx);
                rhs[j] = explicit_part[j] + pde.driver(t, cur[j], std::span<const double>(&z, 1)) * dt +
                         young_term(cur[j]);
            }
            // Thomas algorithm for (I - theta dt L) u = rhs with Dirichlet ends.
            const double w = st.theta * dt;
            rhs[1] += w * lo[1] * cur[0];
            rhs[nx - 2] += w * hi[nx - 2] * cur[nx - 1];
            for (std::size_t j = 1; j + 1 < nx; ++j) {
                const double a = -w * lo[j];
                const double bdiag = 1.0 - w * mid[j];
                const double c = -w * hi[j];
                const double denom = (j == 1) ? bdiag : bdiag - a * cp[j - 1];
                cp[j] = (j + 2 < nx) ? c / denom : 0.0;
                dp[j] = (j == 1) ? rhs[j] / denom : (rhs[j] - a * dp[j - 1]) / denom;
            }
            std::vector<double> next = cur;
            next[nx - 2] = dp[nx - 2];
            for (std::size_t j = nx - 2; j-- > 1;) next[j] = dp[j] - cp[j] * next[j + 1];
            cur.swap(next);
        }
        for (std::size_t j = 0; j < nx; ++j) {
            if (!std::isfinite(cur[j])) {
                throw NumericalError("fd solution became non-finite at time step " + std::to_string(k), k);
            }
        }
        std::copy(cur.begin(), cur.end(), u.values.begin() + static_cast<std::ptrdiff_t>(k * nx));
        old.swap(cur);
    }
    return u;
}

ConvergenceStudy rough_convergence_study(const PdeProblem& pde, std::span<const DiscretePath> eta_levels, double q,
                                         std::span<const Probe> probes, const FdSettings& fd,
                                         const MonteCarloSettings& mc, const RegressionSpec& regression) {
    if (eta_levels.size() < 3) throw ValidationError("rough_convergence_study needs at least 3 levels");
    if (probes.empty()) throw ValidationError("rough_convergence_study needs probes");

    ConvergenceStudy study;
    for (const auto& [v, se] : feynman_kac_probes(pde, probes, mc, regression)) {
        study.mc_values.push_back(v);
        study.mc_standard_errors.push_back(se);
    }

    std::vector<std::vector<double>> level_values;
    for (const auto& eta : eta_levels) {
        PdeProblem pn = pde;
        pn.eta = eta;
        const PdeSolution un = fd_reference_solve(pn, fd);
        std::vector<double> vals;
        for (const auto& p : probes) vals.push_back(un.at(p.t, p.x));
        level_values.push_back(std::move(vals));
    }

    for (std::size_t n = 0; n < eta_levels.size(); ++n) {
        ConvergenceRow row;
        row.level = n;
        row.qvar_distance = var_distance(eta_levels[n], pde.eta, q);
        row.cauchy_gap = std::numeric_limits<double>::quiet_NaN();
        if (n + 1 < eta_levels.size()) {
            row.cauchy_gap = 0.0;
            for (std::size_t k = 0; k < probes.size(); ++k) {
                row.cauchy_gap = std::max(row.cauchy_gap, std::fabs(level_values[n][k] - level_values[n + 1][k]));
            }
        }
        for (std::size_t k = 0; k < probes.size(); ++k) {
            row.mc_gap = std::max(row.mc_gap, std::fabs(level_values[n][k] - study.mc_values[k]));
        }
        study.rows.push_back(row);
    }
    study.cauchy_strictly_decreasing = true;
    for (std::size_t n = 0; n + 2 < study.rows.size(); ++n) {
        if (!(study.rows[n + 1].cauchy_gap < study.rows[n].cauchy_gap)) study.cauchy_strictly_decreasing = false;
    }
    return study;
}

ModulusConstants fit_modulus(const PdeSolution& u, const DiscretePath& eta, double q, const ModulusProbes& probes) {
    ModulusConstants k;
    for (const auto& p : probes.spatial) {
        const double dx = std::fabs(p.x - p.x_prime);
        if (dx == 0.0) continue;
        k.spatial = std::max(k.spatial, std::fabs(u.at(p.t, p.x) - u.at(p.t, p.x_prime)) / dx);
    }
    for (const auto& p : probes.temporal) {
        const double d = std::fabs(p.t_later - p.t);
        const double scale = std::sqrt(d) + d + pvar_between(eta, q, p.t, p.t_later);
        if (scale == 0.0) continue;
        k.temporal = std::max(k.temporal, std::fabs(u.at(p.t_later, p.x) - u.at(p.t, p.x)) / scale);
    }
    return k;
}

ModulusReport modulus_check(const PdeSolution& u, const DiscretePath& eta, double q, const ModulusProbes& probes,
                            const ModulusConstants& constants) {
    ModulusReport r;
    r.observed = fit_modulus(u, eta, q, probes);
    r.spatial_ok = r.observed.spatial <= constants.spatial * (1.0 + 1e-12);
    r.temporal_ok = r.observed.temporal <= constants.temporal * (1.0 + 1e-12);
    return r;
}

BarrierBounds barrier_bounds(const PdeProblem& pde, std::size_t cells, std::size_t substeps) {
    validate(pde);
    if (cells == 0) throw ValidationError("barrier grid needs at least one cell");
    const TimeGrid grid = TimeGrid::merge(TimeGrid::uniform(pde.horizon, cells), pde.eta.grid());
    const std::vector<double> zero_z(pde.brownian_dim, 0.0);
    OdeSpec spec{0.0, pde.drift_fields, pde.eta.resample(grid), OdeDirection::backward,
                 [&pde, zero_z](double t, double y) { return pde.driver(t, y, zero_z); }};
    spec.y0 = -pde.terminal.bound;
    DiscretePath lower = ode_euler(spec, substeps);
    spec.y0 = pde.terminal.bound;
    DiscretePath upper = ode_euler(spec, substeps);
    return {std::move(lower), std::move(upper)};
}

double barrier_excess(const PdeSolution& u, const BarrierBounds& bounds) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t ti = 0; ti < u.times.size(); ++ti) {
        const double lo = bounds.lower.evaluate(u.times[ti])[0];
        const double hi = bounds.upper.evaluate(u.times[ti])[0];
        for (std::size_t xi = 0; xi < u.xs.size(); ++xi) {
            const double v = u.at_index(ti, xi);
            worst = std::max({worst, v - hi, lo - v});
        }
    }
    return worst;
}

}  // namespace ybsde
