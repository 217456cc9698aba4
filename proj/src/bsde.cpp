#include "youngbsde/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "youngbsde/errors.hpp"
#include "youngbsde/parallel.hpp"

namespace ybsde {

namespace {

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Everything the schemes share once the problem has been laid onto the ensemble grid.
struct Setup {
    TimeGrid grid;
    std::size_t paths;
    std::size_t d;
    std::size_t e;
    std::size_t start;
    std::vector<double> d_eta;  // (nodes - 1) x e
    std::vector<double> xi;     // per path, clamped
    std::shared_ptr<const ForwardEnsemble> states;
};

Setup prepare(const BsdeProblem& pb, const std::shared_ptr<const BrownianEnsemble>& ens, unsigned workers) {
    if (!ens) throw ValidationError("BSDE solve needs a Brownian ensemble");
    const TimeGrid& grid = ens->grid();
    if (std::fabs(grid.horizon() - pb.horizon) > 1e-12 * std::max(1.0, pb.horizon)) {
        throw ValidationError("ensemble horizon does not match the BSDE horizon");
    }
    if (std::fabs(pb.eta.grid().horizon() - pb.horizon) > 1e-12 * std::max(1.0, pb.horizon)) {
        throw ValidationError("eta horizon does not match the BSDE horizon");
    }
    if (pb.drift_fields.size() != pb.eta.dim()) {
        throw ValidationError("BSDE has " + std::to_string(pb.drift_fields.size()) +
                              " drift fields for an eta of dimension " + std::to_string(pb.eta.dim()));
    }
    for (const auto& g : pb.drift_fields) {
        if (!g.value) throw ValidationError("drift field has no value function");
        if (!g.d1_bound) throw ValidationError("drift field '" + g.name + "' needs a derivative bound");
    }
    if (!pb.driver.fn) throw ValidationError("BSDE driver is empty");
    if (!std::isfinite(pb.driver.lipschitz) || pb.driver.lipschitz < 0.0) {
        throw ValidationError("driver Lipschitz constant must be finite and >= 0");
    }
    if (!pb.terminal.fn) throw ValidationError("BSDE terminal functional is empty");
    if (!std::isfinite(pb.terminal.bound) || pb.terminal.bound < 0.0) {
        throw ValidationError("terminal bound must be finite and >= 0");
    }

    Setup s{grid, ens->paths(), ens->dim(), pb.eta.dim(), 0, {}, {}, nullptr};
    if (pb.forward) {
        s.states = std::make_shared<const ForwardEnsemble>(euler_maruyama(*pb.forward, *ens, workers));
    } else {
        s.states = std::make_shared<const ForwardEnsemble>(ForwardEnsemble::identity(*ens));
    }
    s.start = s.states->start_node();
    if (s.start + 1 >= grid.size()) throw ValidationError("BSDE start time must lie before the horizon");

    const DiscretePath eta = pb.eta.resample(grid);
    s.d_eta.resize((grid.size() - 1) * s.e);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        for (std::size_t c = 0; c < s.e; ++c) s.d_eta[i * s.e + c] = eta.at(i + 1, c) - eta.at(i, c);
    }

    s.xi.resize(s.paths);
    const std::size_t last = grid.size() - 1;
    for (std::size_t m = 0; m < s.paths; ++m) s.xi[m] = pb.terminal(s.states->state(m, last));
    return s;
}

BsdeSolution empty_solution(const Setup& s, const std::shared_ptr<const BrownianEnsemble>& ens, std::string scheme) {
    BsdeSolution sol;
    sol.grid = s.grid;
    sol.paths = s.paths;
    sol.brownian_dim = s.d;
    sol.start_node = s.start;
    sol.y.assign(s.paths * s.grid.size(), 0.0);
    sol.z.assign(s.paths * s.grid.size() * s.d, 0.0);
    sol.scheme = std::move(scheme);
    sol.states = s.states;
    sol.brownian = ens;
    return sol;
}

double drift_increment(const std::vector<ScalarFunction>& g, std::span<const double> d_eta, double y) {
    double r = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (d_eta[c] != 0.0) r += g[c](y) * d_eta[c];
    }
    return r;
}

// Y before the start node is not part of the problem; it is held at the start value with Z = 0.
void fill_before_start(BsdeSolution& sol) {
    const std::size_t n = sol.nodes();
    for (std::size_t m = 0; m < sol.paths; ++m) {
        for (std::size_t i = 0; i < sol.start_node; ++i) sol.y[m * n + i] = sol.y[m * n + sol.start_node];
    }
}

// Z_i = E_i[(Y_{i+1} - E_i Y_{i+1}) dW_i] / dt_i for every coordinate.
void estimate_z(const SliceRegression& reg, const BrownianEnsemble& w, std::span<const double> next,
                std::span<const double> expected_next, std::size_t cell, BsdeSolution& sol) {
    const std::size_t n = sol.nodes();
    const double dt = sol.grid.step(cell);
    std::vector<double> target(sol.paths), fitted(sol.paths);
    for (std::size_t c = 0; c < sol.brownian_dim; ++c) {
        for (std::size_t m = 0; m < sol.paths; ++m) target[m] = (next[m] - expected_next[m]) * w.increment(m, cell, c);
        reg.project(target, fitted);
        for (std::size_t m = 0; m < sol.paths; ++m) sol.z[(m * n + cell) * sol.brownian_dim + c] = fitted[m] / dt;
    }
}

void record_diagnostics(const SliceRegression& reg, std::span<const double> target, std::span<const double> fitted,
                        std::size_t cell, BsdeSolution& sol) {
    StepDiagnostics diag;
    diag.condition_number = reg.diagnostics().condition_number;
    diag.ridge_fallback = reg.diagnostics().ridge_fallback;
    diag.residual_rms = residual_rms(target, fitted);
    if (diag.ridge_fallback) {
        sol.warnings.push_back("regression at node " + std::to_string(cell) +
                               " was near singular; ridge raised to the fallback value");
    }
    sol.diagnostics.push_back(diag);
}

std::vector<double> payload_difference(const BsdeSolution& a, const BsdeSolution& b) {
    std::vector<double> d(a.payload.size());
    for (std::size_t m = 0; m < d.size(); ++m) d[m] = a.payload[m] - b.payload[m];
    return d;
}

}  // namespace

Driver Driver::zero() { return affine(0.0, 0.0); }

Driver Driver::affine(double c, double a_y, double a_z, std::size_t brownian_dim) {
    return with_term(c, a_y, a_z, brownian_dim, 0.0, constant_function(0.0));
}

Driver Driver::with_term(double c, double a_y, double a_z, std::size_t brownian_dim, double k,
                         const ScalarFunction& phi) {
    if (k != 0.0 && (!phi.d1_bound || !std::isfinite(*phi.d1_bound))) {
        throw ValidationError("driver term '" + phi.name + "' needs a finite derivative bound");
    }
    Driver d;
    d.fn = [=](double, double y, std::span<const double> z) {
        double zs = 0.0;
        for (double v : z) zs += v;
        double r = c + a_y * y + a_z * zs;
        if (k != 0.0) r += k * phi(y);
        return r;
    };
    d.lipschitz = std::fabs(a_y) + std::fabs(a_z) * std::sqrt(static_cast<double>(brownian_dim)) +
                  (k != 0.0 ? std::fabs(k) * *phi.d1_bound : 0.0);
    d.zero_bound = std::fabs(c) + (k != 0.0 ? std::fabs(k * phi(0.0)) : 0.0);
    return d;
}

double Terminal::operator()(std::span<const double> x) const {
    const double v = fn(x);
    if (std::isnan(v)) throw NumericalError("terminal functional returned NaN");
    return std::clamp(v, -bound, bound);
}

Terminal Terminal::constant(double c) {
    return {[c](std::span<const double>) { return c; }, std::fabs(c)};
}

Terminal Terminal::of_first(const ScalarFunction& h, double bound) {
    return {[h](std::span<const double> x) { return h(x[0]); }, bound};
}

double BsdeSolution::y0() const {
    double s = 0.0;
    for (std::size_t m = 0; m < paths; ++m) s += Y(m, start_node);
    return s / static_cast<double>(paths);
}

double BsdeSolution::y0_standard_error() const {
    return sample_sd(payload) / std::sqrt(static_cast<double>(std::max<std::size_t>(payload.size(), 1)));
}

BsdeSolution solve_backward(const BsdeProblem& problem, std::shared_ptr<const BrownianEnsemble> ensemble,
                            const RegressionSpec& regression, const SolverOptions& options) {
    if (options.inner_iters == 0) throw ValidationError("inner_iters must be >= 1");
    const Setup s = prepare(problem, ensemble, options.workers);
    BsdeSolution sol = empty_solution(s, ensemble, "backward");
    const std::size_t n = s.grid.size();
    const std::size_t last = n - 1;
    const double lip = problem.driver.lipschitz;

    for (std::size_t m = 0; m < s.paths; ++m) sol.y[m * n + last] = s.xi[m];

    std::vector<double> next(s.paths), expected(s.paths);
    sol.payload = s.xi;
    for (std::size_t i = last; i-- > s.start;) {
        const double dt = s.grid.step(i);
        const std::span<const double> d_eta(s.d_eta.data() + i * s.e, s.e);
        double contraction = lip * dt;
        for (std::size_t c = 0; c < s.e; ++c) {
            if (d_eta[c] != 0.0) contraction += *problem.drift_fields[c].d1_bound * std::fabs(d_eta[c]);
        }
        if (!(contraction < 1.0)) {
            throw NumericalError("cell " + std::to_string(i) + " on [" + std::to_string(s.grid[i]) + ", " +
                                     std::to_string(s.grid[i + 1]) + "] has C_f dt + sum |Dg| |d eta| = " +
                                     std::to_string(contraction) + " >= 1; refine the grid",
                                 i);
        }

        const SliceRegression reg(s.states->slice(i), s.states->dim(), regression);
        for (std::size_t m = 0; m < s.paths; ++m) next[m] = sol.y[m * n + i + 1];
        reg.project(next, expected);
        record_diagnostics(reg, next, expected, i, sol);
        estimate_z(reg, *ensemble, next, expected, i, sol);

        const double t = s.grid[i];
        parallel_for(s.paths, options.workers, [&](std::size_t m) {
            const std::span<const double> z(sol.z.data() + (m * n + i) * s.d, s.d);
            double y = expected[m];
            double previous_update = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < options.inner_iters; ++k) {
                const double updated = expected[m] + problem.driver(t, y, z) * dt + drift_increment(problem.drift_fields, d_eta, y);
                const double update = std::fabs(updated - y);
                if (!std::isfinite(updated) ||
                    (update > previous_update && update > 1e-12 * (1.0 + std::fabs(y)))) {
                    throw NumericalError("inner fixpoint diverged at step " + std::to_string(i) + " (path " +
                                             std::to_string(m) + ")",
                                         i);
                }
                previous_update = update;
                y = updated;
            }
            sol.y[m * n + i] = y;
            sol.payload[m] += problem.driver(t, y, z) * dt + drift_increment(problem.drift_fields, d_eta, y);
        });
    }
    std::reverse(sol.diagnostics.begin(), sol.diagnostics.end());
    fill_before_start(sol);
    return sol;
}

PicardResult solve_picard(const BsdeProblem& problem, std::shared_ptr<const BrownianEnsemble> ensemble,
                          const RegressionSpec& regression, std::size_t sweeps, const SolverOptions& options) {
    if (sweeps == 0) throw ValidationError("solve_picard needs at least one sweep");
    const Setup s = prepare(problem, ensemble, options.workers);
    const std::size_t n = s.grid.size();
    const std::size_t last = n - 1;

    std::vector<SliceRegression> regs;
    regs.reserve(last - s.start);
    for (std::size_t i = s.start; i < last; ++i) regs.emplace_back(s.states->slice(i), s.states->dim(), regression);

    PicardResult result{empty_solution(s, ensemble, "picard"), {}, {}};
    BsdeSolution& cur = result.solution;  // holds (Y^{(k)}, Z^{(k)}), starting from zero
    BsdeSolution nxt = cur;

    // Per-path tail payloads P_i = xi + sum_{j >= i} F_j, stored slice-major.
    std::vector<double> tail(n * s.paths);
    std::vector<double> target(s.paths), fitted(s.paths), expected(s.paths);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        parallel_for(s.paths, options.workers, [&](std::size_t m) {
            double acc = s.xi[m];
            tail[last * s.paths + m] = acc;
            for (std::size_t i = last; i-- > s.start;) {
                const std::span<const double> z(cur.z.data() + (m * n + i) * s.d, s.d);
                const std::span<const double> d_eta(s.d_eta.data() + i * s.e, s.e);
                const double y = cur.y[m * n + i];
                acc += problem.driver(s.grid[i], y, z) * s.grid.step(i) + drift_increment(problem.drift_fields, d_eta, y);
                if (!std::isfinite(acc)) {
                    throw NumericalError("Picard payload became non-finite at step " + std::to_string(i), i);
                }
                tail[i * s.paths + m] = acc;
            }
        });

        nxt.diagnostics.clear();
        nxt.warnings.clear();
        for (std::size_t m = 0; m < s.paths; ++m) nxt.y[m * n + last] = s.xi[m];
        for (std::size_t i = s.start; i < last; ++i) {
            const SliceRegression& reg = regs[i - s.start];
            const std::span<const double> p(tail.data() + i * s.paths, s.paths);
            reg.project(p, fitted);
            for (std::size_t m = 0; m < s.paths; ++m) nxt.y[m * n + i] = fitted[m];
            record_diagnostics(reg, p, fitted, i, nxt);
        }
        for (std::size_t i = s.start; i < last; ++i) {
            const SliceRegression& reg = regs[i - s.start];
            for (std::size_t m = 0; m < s.paths; ++m) target[m] = nxt.y[m * n + i + 1];
            reg.project(target, expected);
            estimate_z(reg, *ensemble, target, expected, i, nxt);
        }

        double diff = 0.0;
        for (std::size_t i = s.start; i < n; ++i) {
            double ss = 0.0;
            for (std::size_t m = 0; m < s.paths; ++m) {
                const double dy = nxt.y[m * n + i] - cur.y[m * n + i];
                ss += dy * dy;
            }
            diff = std::max(diff, std::sqrt(ss / static_cast<double>(s.paths)));
        }
        result.sweep_differences.push_back(diff);
        if (sweep > 0) {
            const double prev = result.sweep_differences[sweep - 1];
            result.contraction_ratios.push_back(prev > 0.0 ? diff / prev : 0.0);
        }
        nxt.payload.assign(tail.begin() + static_cast<std::ptrdiff_t>(s.start * s.paths),
                           tail.begin() + static_cast<std::ptrdiff_t>((s.start + 1) * s.paths));
        std::swap(cur, nxt);
    }
    fill_before_start(cur);
    return result;
}

double bp_norm_estimate(const BsdeSolution& solution, double p, const RegressionSpec& conditioning) {
    if (!(p > 2.0)) throw ValidationError("bp_norm_estimate needs p > 2");
    if (!solution.states) throw ValidationError("solution carries no forward states");
    const std::size_t n = solution.nodes();
    const std::size_t s0 = solution.start_node;
    const std::size_t len = n - s0;

    // sq[i * M + m] = ||Y^m||^2_{p-var; [t_i, T]}
    std::vector<double> sq(len * solution.paths);
    for (std::size_t m = 0; m < solution.paths; ++m) {
        const auto path = solution.y_path(m).subspan(s0);
        const std::vector<double> powers = suffix_pvar_powers(path, p);
        for (std::size_t i = 0; i < len; ++i) sq[i * solution.paths + m] = std::pow(powers[i], 2.0 / p);
    }

    double best = 0.0;
    std::vector<double> fitted(solution.paths);
    for (std::size_t i = 0; i + 1 < len; ++i) {
        const SliceRegression reg(solution.states->slice(s0 + i), solution.states->dim(), conditioning);
        reg.project(std::span<const double>(sq.data() + i * solution.paths, solution.paths), fitted);
        for (double f : fitted) best = std::max(best, f);
    }
    double terminal = 0.0;
    for (std::size_t m = 0; m < solution.paths; ++m) terminal = std::max(terminal, std::fabs(solution.Y(m, n - 1)));
    return std::sqrt(best) + terminal;
}

std::vector<double> bmo_profile(const BsdeSolution& solution, const RegressionSpec& conditioning) {
    if (!solution.states) throw ValidationError("solution carries no forward states");
    const std::size_t n = solution.nodes();
    const std::size_t s0 = solution.start_node;
    const std::size_t d = solution.brownian_dim;

    std::vector<double> tail(solution.paths, 0.0);
    std::vector<double> fitted(solution.paths);
    std::vector<double> profile(n - s0, 0.0);
    for (std::size_t i = n - 1; i-- > s0;) {
        const double dt = solution.grid.step(i);
        for (std::size_t m = 0; m < solution.paths; ++m) {
            double z2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) z2 += solution.Z(m, i, c) * solution.Z(m, i, c);
            tail[m] += z2 * dt;
        }
        const SliceRegression reg(solution.states->slice(i), solution.states->dim(), conditioning);
        reg.project(tail, fitted);
        double best = 0.0;
        for (double f : fitted) best = std::max(best, f);
        profile[i - s0] = best;
    }
    return profile;
}

double bmo_norm_estimate(const BsdeSolution& solution, const RegressionSpec& conditioning) {
    const auto prof = bmo_profile(solution, conditioning);
    return prof.empty() ? 0.0 : *std::max_element(prof.begin(), prof.end());
}

ComparisonReport comparison_check(const BsdeProblem& first, const BsdeProblem& second,
                                  std::shared_ptr<const BrownianEnsemble> ensemble, const RegressionSpec& regression,
                                  ComparisonTolerance tolerance, const SolverOptions& options) {
    const BsdeSolution a = solve_backward(first, ensemble, regression, options);
    const BsdeSolution b = solve_backward(second, ensemble, regression, options);
    ComparisonReport r;
    const double se1 = a.y0_standard_error();
    const double se2 = b.y0_standard_error();
    r.pooled_standard_error = std::sqrt(se1 * se1 + se2 * se2);
    r.epsilon = tolerance.absolute + tolerance.standard_errors * r.pooled_standard_error;
    r.y0_first = a.y0();
    r.y0_second = b.y0();
    r.max_violation = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    std::size_t total = 0;
    for (std::size_t m = 0; m < a.paths; ++m) {
        for (std::size_t i = a.start_node; i < a.nodes(); ++i) {
            const double excess = a.Y(m, i) - b.Y(m, i);
            r.max_violation = std::max(r.max_violation, excess);
            if (excess > r.epsilon) ++violations;
            ++total;
        }
    }
    r.violation_fraction = static_cast<double>(violations) / static_cast<double>(total);
    return r;
}

BsdeSolution solution_difference(const BsdeSolution& a, const BsdeSolution& b) {
    if (a.paths != b.paths || !(a.grid == b.grid) || a.brownian_dim != b.brownian_dim ||
        a.start_node != b.start_node) {
        throw ValidationError("solutions live on different ensembles");
    }
    BsdeSolution d = a;
    for (std::size_t k = 0; k < d.y.size(); ++k) d.y[k] -= b.y[k];
    for (std::size_t k = 0; k < d.z.size(); ++k) d.z[k] -= b.z[k];
    d.payload = payload_difference(a, b);
    d.diagnostics.clear();
    d.warnings.clear();
    d.scheme = a.scheme + "-difference";
    return d;
}

StabilityTable stability_in_eta(const BsdeProblem& problem, std::span<const DiscretePath> etas,
                                std::shared_ptr<const BrownianEnsemble> ensemble, const RegressionSpec& regression,
                                const StabilityOptions& options) {
    for (const auto& eta : etas) {
        if (eta.dim() != problem.eta.dim()) throw ValidationError("all eta^n must share the limit's dimension");
    }
    const BsdeSolution limit = solve_backward(problem, ensemble, regression, options.solver);
    StabilityTable table;
    table.y0_limit = limit.y0();
    for (const auto& eta : etas) {
        BsdeProblem pn = problem;
        pn.eta = eta;
        const BsdeSolution sol = solve_backward(pn, ensemble, regression, options.solver);
        StabilityRow row;
        row.qvar_distance = var_distance(eta, problem.eta, options.q);
        row.y0_gap = std::fabs(sol.y0() - limit.y0());
        const auto diff = payload_difference(sol, limit);
        row.y0_gap_standard_error = sample_sd(diff) / std::sqrt(static_cast<double>(diff.size()));
        row.bp_gap = bp_norm_estimate(solution_difference(sol, limit), options.bp_exponent, regression);
        table.rows.push_back(row);
    }
    table.gaps_non_increasing = true;
    for (std::size_t k = 0; k + 1 < table.rows.size(); ++k) {
        const auto& a = table.rows[k];
        const auto& b = table.rows[k + 1];
        if (b.y0_gap > a.y0_gap + 2.0 * b.y0_gap_standard_error) table.gaps_non_increasing = false;
    }
    return table;
}

LipschitzReport lipschitz_in_xi(const BsdeProblem& problem, const Terminal& xi, const Terminal& xi_prime,
                                double bound, std::shared_ptr<const BrownianEnsemble> ensemble,
                                const RegressionSpec& regression, const SolverOptions& options) {
    if (xi.bound > bound || xi_prime.bound > bound) {
        throw ValidationError("terminal bounds exceed the declared bound " + std::to_string(bound));
    }
    BsdeProblem a = problem;
    a.terminal = xi;
    BsdeProblem b = problem;
    b.terminal = xi_prime;
    const BsdeSolution sa = solve_backward(a, ensemble, regression, options);
    const BsdeSolution sb = solve_backward(b, ensemble, regression, options);

    LipschitzReport r;
    r.numerator = std::fabs(sa.y0() - sb.y0());
    const std::size_t last = sa.nodes() - 1;
    double ss = 0.0;
    for (std::size_t m = 0; m < sa.paths; ++m) {
        const double dx = sa.Y(m, last) - sb.Y(m, last);
        ss += dx * dx;
    }
    r.denominator = std::sqrt(ss / static_cast<double>(sa.paths));
    if (r.denominator > 0.0) {
        r.ratio = r.numerator / r.denominator;
        const auto diff = payload_difference(sa, sb);
        r.ratio_standard_error =
            sample_sd(diff) / std::sqrt(static_cast<double>(diff.size())) / r.denominator;
    } else if (r.numerator > 0.0) {
        r.inconsistent = true;
        r.ratio = std::numeric_limits<double>::infinity();
    }
    return r;
}

BdgReport bdg_diagnostic(const BsdeSolution& solution, double p) {
    if (!(p > 2.0)) throw ValidationError("bdg_diagnostic needs p > 2");
    if (!solution.brownian) throw ValidationError("solution carries no Brownian ensemble");
    const std::size_t n = solution.nodes();
    const std::size_t d = solution.brownian_dim;
    const std::size_t s0 = solution.start_node;
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<double> integral(n, 0.0);
    for (std::size_t m = 0; m < solution.paths; ++m) {
        double acc = 0.0;
        double quad = 0.0;
        for (std::size_t i = s0; i + 1 < n; ++i) {
            integral[i] = acc;
            for (std::size_t c = 0; c < d; ++c) {
                const double z = solution.Z(m, i, c);
                acc += z * solution.brownian->increment(m, i, c);
                quad += z * z * solution.grid.step(i);
            }
        }
        integral[n - 1] = acc;
        const double v = std::pow(suffix_pvar_powers(std::span<const double>(integral).subspan(s0), p)[0], 1.0 / p);
        lhs += v * v;
        rhs += quad;
    }
    BdgReport r;
    r.lhs = lhs / static_cast<double>(solution.paths);
    r.rhs = rhs / static_cast<double>(solution.paths);
    r.fitted_constant = (r.rhs > 0.0) ? r.lhs / r.rhs : 0.0;
    return r;
}

}  // namespace ybsde
