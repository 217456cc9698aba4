// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Every threshold below is the published tolerance; nothing is tuned per run.
// Randomised families are drawn from fixed seeds so the suite is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "youngbsde/bsde.hpp"
#include "youngbsde/errors.hpp"
#include "youngbsde/paths.hpp"
#include "youngbsde/rpde.hpp"
#include "youngbsde/signals.hpp"
#include "youngbsde/young.hpp"

using namespace ybsde;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Random piecewise-linear scalar path on a random grid of [0, 1].
DiscretePath random_path(std::mt19937_64& rng, std::size_t nodes, double scale) {
    std::uniform_real_distribution<double> gap(0.2, 1.0);
    std::normal_distribution<double> step(0.0, scale);
    std::vector<double> t(nodes, 0.0);
    for (std::size_t i = 1; i < nodes; ++i) t[i] = t[i - 1] + gap(rng);
    for (auto& s : t) s /= t.back();
    std::vector<double> v(nodes);
    v[0] = step(rng);
    for (std::size_t i = 1; i < nodes; ++i) v[i] = v[i - 1] + step(rng);
    return DiscretePath(TimeGrid(t), v);
}

Outcome criterion_pvar_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> len(2, 12);
    const double exponents[] = {1.0, 1.3, 2.0, 3.7};
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto path = random_path(rng, len(rng), 1.0);
        for (double p : exponents) {
            const double dp = pvar_norm(path, p);
            const double bf = brute_force_pvar(path, p, path.full_window());
            worst = std::max(worst, std::fabs(dp - bf) / std::max(bf, 1e-300));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 10.0, fmt("max relative gap %.3g, %.2f s", worst, secs)};
}

Outcome criterion_young_bound() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> len(2, 60);
    const VariationExponents pairs[] = {{2.5, 1.4}, {3.0, 1.2}, {1.2, 1.2}};
    std::size_t violations = 0;
    for (auto [p, q] : pairs) {
        for (int k = 0; k < 500; ++k) {
            const auto x = random_path(rng, len(rng), 1.0);
            const auto y = random_path(rng, len(rng), 1.0);
            if (!young_bound_report(x, y, p, q).satisfied) ++violations;
        }
    }
    const double secs = seconds_since(t0);
    return {violations == 0 && secs < 30.0, fmt("%zu violations in 1500 pairs, %.2f s", violations, secs)};
}

/// Random pair on a shared grid, as the composition lemma compares paths pointwise.
std::pair<DiscretePath, DiscretePath> random_pair(std::mt19937_64& rng, std::size_t nodes) {
    const auto a = random_path(rng, nodes, 1.0);
    std::normal_distribution<double> step(0.0, 0.3);
    std::vector<double> v(a.values().begin(), a.values().end());
    for (auto& x : v) x += step(rng);
    return {a, DiscretePath(a.grid(), v)};
}

Outcome criterion_lemmas() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> len(2, 40);
    const double exponents[] = {1.0, 2.0, 3.0};
    const ScalarFunction fields[] = {make_function(Shape::tanh), make_function(Shape::sin)};
    std::size_t product_bad = 0;
    std::size_t composition_bad = 0;
    for (int k = 0; k < 500; ++k) {
        const double p = exponents[k % 3];
        const auto [a, b] = random_pair(rng, len(rng));
        if (!product_lemma_check(a, b, p).satisfied) ++product_bad;
    }
    for (int k = 0; k < 500; ++k) {
        const double p = exponents[k % 3];
        const auto [a, b] = random_pair(rng, len(rng));
        if (!composition_lemma_check(fields[k % 2], a, b, p).satisfied) ++composition_bad;
    }
    return {product_bad == 0 && composition_bad == 0,
            fmt("product %zu/500, composition %zu/500 violations", product_bad, composition_bad)};
}

Outcome criterion_young_ode() {
    // eta = t carried on 100 cells, so `substeps` counts Euler steps per cell.
    const auto grid = TimeGrid::uniform(1.0, 100);
    std::vector<double> t(grid.times().begin(), grid.times().end());
    OdeSpec spec{1.0, {linear_function(1.0)}, DiscretePath(grid, t), OdeDirection::forward, {}};
    const double e = std::numbers::e;
    const auto run = [&](std::size_t sub) { return std::fabs(ode_euler(spec, sub).at(grid.size() - 1) - e); };
    const double err = run(1000);
    std::vector<double> errors;
    for (std::size_t sub = 1000; sub <= 8000; sub *= 2) errors.push_back(run(sub));
    double worst_ratio = 1e300;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) worst_ratio = std::min(worst_ratio, errors[k] / errors[k + 1]);
    return {err <= 1e-3 && worst_ratio >= 1.9,
            fmt("|y_T - e| = %.3g at 1000 substeps, min Richardson ratio %.4f", err, worst_ratio)};
}

Outcome criterion_bsde_closed_forms() {
    const auto grid = TimeGrid::uniform(1.0, 200);
    const auto ens = std::make_shared<const BrownianEnsemble>(sample_brownian(grid, 10000, 1, 7));
    const RegressionSpec reg;
    const double c = 0.7;
    std::string detail;
    bool pass = true;

    // (a) g = 1, xi = c: Y_t = c + eta_T - eta_t on every path.
    {
        const auto t0 = Clock::now();
        BsdeProblem p;
        p.drift_fields = {constant_function(1.0)};
        p.eta = generate_eta(EtaSpec{SinusoidSpec{{0.5}, {2.0}, {0.3}}, 1, 1.0}, grid).path;
        p.terminal = Terminal::constant(c);
        const auto s = solve_backward(p, ens, reg);
        double err = 0.0;
        const std::size_t n = s.nodes() - 1;
        for (std::size_t m = 0; m < s.paths; ++m)
            for (std::size_t i = 0; i <= n; ++i)
                err = std::max(err, std::fabs(s.Y(m, i) - (c + p.eta.at(n) - p.eta.at(i))));
        const double secs = seconds_since(t0);
        pass = pass && err <= 1e-12 && secs < 60.0;
        detail += fmt("(a) max err %.2g %.1fs; ", err, secs);
    }
    // (b) f = a y: Y_0 = c e^{aT}.
    {
        const auto t0 = Clock::now();
        const double a = 1.0;
        BsdeProblem p;
        p.driver = Driver::affine(0.0, a);
        p.terminal = Terminal::constant(c);
        const auto s = solve_backward(p, ens, reg);
        const double exact = c * std::exp(a);
        const double rel = std::fabs(s.y0() - exact) / exact;
        const double secs = seconds_since(t0);
        pass = pass && rel <= 0.01 && secs < 60.0;
        detail += fmt("(b) rel err %.3g %.1fs; ", rel, secs);
    }
    // (c) g = beta y against the backward Young ODE on every node.
    {
        const auto t0 = Clock::now();
        const double beta = 0.5;
        BsdeProblem p;
        p.drift_fields = {linear_function(beta)};
        p.eta = generate_eta(EtaSpec{SinusoidSpec{{0.5}, {1.0}, {0.0}}, 1, 1.0}, grid).path;
        p.terminal = Terminal::constant(c);
        const auto s = solve_backward(p, ens, reg);
        OdeSpec ode{c, {linear_function(beta)}, p.eta, OdeDirection::backward, {}};
        const auto oracle = ode_solve(ode, 64).path;
        double rel = 0.0;
        for (std::size_t i = 0; i < s.nodes(); ++i) {
            double mean = 0.0;
            for (std::size_t m = 0; m < s.paths; ++m) mean += s.Y(m, i);
            mean /= static_cast<double>(s.paths);
            rel = std::max(rel, std::fabs(mean - oracle.at(i)) / std::fabs(oracle.at(i)));
        }
        const double secs = seconds_since(t0);
        pass = pass && rel <= 0.01 && secs < 60.0;
        detail += fmt("(c) max rel err %.3g %.1fs", rel, secs);
    }
    return {pass, detail};
}

Outcome criterion_comparison() {
    const auto grid = TimeGrid::uniform(1.0, 200);
    const auto ens = std::make_shared<const BrownianEnsemble>(sample_brownian(grid, 10000, 1, 21));
    const RegressionSpec reg;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t bad_pairs = 0;
    double worst_excess = -1e300;
    for (int k = 0; k < 20; ++k) {
        BsdeProblem p1;
        const double ga = 0.2 + 0.4 * u(rng);
        const double gb = 0.5 + 0.7 * u(rng);
        p1.drift_fields = {make_function(k % 2 ? Shape::tanh : Shape::sin, ga, gb)};
        p1.eta = generate_eta(EtaSpec{RandomPlSpec{11, 0.2, static_cast<std::uint64_t>(k)}, 1, 1.0}, grid).path;
        const double c = -0.5 + u(rng);
        const double ay = -0.5 + u(rng);
        const double az = 0.6 * (-0.5 + u(rng));
        p1.driver = Driver::affine(c, ay, az);
        const double al = -0.5 + u(rng);
        const double be = 0.3 + 0.7 * u(rng);
        const double gm = 0.5 + 1.5 * u(rng);
        p1.terminal = {[=](std::span<const double> x) { return al + be * std::tanh(gm * x[0]); }, 2.0};
        if (k % 3 == 0) p1.forward = affine_sde(0.1, -0.2, 1.0, 0.1, 0.0);

        // xi2 - xi1 = d0 + d1 sigmoid >= 0 and f2 - f1 = e0 + ek (1 + sin y) >= 0;
        // every fourth pair shares xi, the next one shares f.
        BsdeProblem p2 = p1;
        const bool same_xi = k % 4 == 0;
        const bool same_f = k % 4 == 1;
        const double d0 = same_xi ? 0.0 : 0.05 + 0.25 * u(rng);
        const double d1 = same_xi ? 0.0 : d0 * u(rng);
        const double e0 = same_f ? 0.0 : 0.1 + 0.4 * u(rng);
        const double ek = same_f ? 0.0 : 0.5 * e0 * u(rng);
        p2.driver = Driver::with_term(c + e0, ay, az, 1, ek, make_function(Shape::sin, 1.0, 1.0, 1.0));
        p2.terminal = {[=](std::span<const double> x) {
                           return al + be * std::tanh(gm * x[0]) + d0 + d1 / (1.0 + std::exp(-x[0]));
                       },
                       2.0};
        const auto r = comparison_check(p1, p2, ens, reg, {0.0, 3.0});
        if (r.violation_fraction > 0.0) ++bad_pairs;
        worst_excess = std::max(worst_excess, r.max_violation - r.epsilon);
    }
    return {bad_pairs == 0, fmt("%zu/20 pairs with violations, max(Y1 - Y2 - eps) = %.3g", bad_pairs, worst_excess)};
}

Outcome criterion_picard() {
    const double horizon = 0.25;
    const auto grid = TimeGrid::uniform(horizon, 50);
    const auto ens = std::make_shared<const BrownianEnsemble>(sample_brownian(grid, 10000, 1, 3));
    const RegressionSpec reg;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool pass = true;
    std::string detail;
    for (int k = 0; k < 5; ++k) {
        BsdeProblem p;
        p.horizon = horizon;
        // C_f = |a_y| + |a_z| + k = 1 exactly.
        const double ay = -0.5 + u(rng);
        const double az = 0.5 * (-1.0 + 2.0 * u(rng));
        const double rest = 1.0 - std::fabs(ay) - std::fabs(az);
        p.driver = Driver::with_term(0.1 * k, ay, az, 1, rest, make_function(Shape::sin));
        p.drift_fields = {make_function(k % 2 ? Shape::tanh : Shape::sin)};
        const auto raw =
            generate_eta(EtaSpec{RandomPlSpec{6, 1.0, static_cast<std::uint64_t>(k + 100)}, 1, horizon}, grid).path;
        p.eta = raw.scaled(0.2 / pvar_norm(raw, 1.5));
        p.terminal = Terminal::of_first(make_function(Shape::tanh, 1.0, 2.0, 0.2 * k), 2.0);

        const auto pr = solve_picard(p, ens, reg, 5);
        const auto bk = solve_backward(p, ens, reg);
        bool decreasing = pr.sweep_differences.size() == 5;
        for (std::size_t s = 1; s < pr.sweep_differences.size(); ++s)
            decreasing = decreasing && pr.sweep_differences[s] < pr.sweep_differences[s - 1];
        const double se = bk.y0_standard_error();
        const double gap = std::fabs(pr.solution.y0() - bk.y0());
        pass = pass && decreasing && gap <= 2.0 * se && std::fabs(p.driver.lipschitz - 1.0) < 1e-12;
        detail += fmt("[%d: last sweep %.2g, gap %.2g se %.2g%s] ", k, pr.sweep_differences.back(), gap, se,
                      decreasing ? "" : " NOT DECREASING");
    }
    return {pass, detail};
}

Outcome criterion_stability() {
    const auto t0 = Clock::now();
    // fBm on 201 nodes; the simulation grid refines each eta cell 8-fold so the
    // left-point discretisation error stays below the approximation gaps.
    const auto eta = generate_eta(EtaSpec{FbmSpec{0.75, 5, 1.0}, 1, 1.0}, TimeGrid::uniform(1.0, 200)).path;
    const auto levels = approximation_sequence(eta, 1.4, 4);
    const auto grid = TimeGrid::uniform(1.0, 1600);
    const auto ens = std::make_shared<const BrownianEnsemble>(sample_brownian(grid, 5000, 1, 11));
    BsdeProblem p;
    p.driver = Driver::affine(1.0, 0.2);
    p.drift_fields = {make_function(Shape::tanh)};
    p.eta = eta;
    p.terminal = Terminal::of_first(make_function(Shape::tanh, 0.5), 0.5);
    StabilityOptions opts;
    opts.q = 1.4;
    opts.solver.workers = 4;
    const auto table = stability_in_eta(p, levels, ens, RegressionSpec{}, opts);
    std::string gaps;
    for (const auto& r : table.rows) gaps += fmt("%.3g(%.1g) ", r.y0_gap, r.y0_gap_standard_error);
    const double first = table.rows.front().y0_gap;
    const double last = table.rows.back().y0_gap;
    const bool pass = table.gaps_non_increasing && last < 0.25 * first;
    return {pass, fmt("gaps %slast/first %.3f, %.1f s", gaps.c_str(), last / first, seconds_since(t0))};
}

Outcome criterion_lipschitz() {
    const auto grid = TimeGrid::uniform(1.0, 200);
    const auto ens = std::make_shared<const BrownianEnsemble>(sample_brownian(grid, 10000, 1, 11));
    BsdeProblem p;
    p.drift_fields = {make_function(Shape::tanh)};
    p.eta = DiscretePath(TimeGrid::uniform(1.0, 1), std::vector<double>{0.0, 1.0});
    const Terminal xi{[](std::span<const double> x) { return 1.0 + std::tanh(2.0 * x[0]); }, 2.0};
    const double deltas[] = {0.2, 0.1, 0.05, 0.025};
    std::vector<double> ratio;
    std::vector<double> se;
    for (double d : deltas) {
        const Terminal xi_prime{[d](std::span<const double> x) {
                                    const double sign = (x[0] > 0.0) - (x[0] < 0.0);
                                    return 1.0 + std::tanh(2.0 * x[0]) + d * sign;
                                },
                                2.0 + d};
        const auto r = lipschitz_in_xi(p, xi, xi_prime, 2.5, ens, RegressionSpec{});
        ratio.push_back(r.ratio);
        se.push_back(r.ratio_standard_error);
    }
    const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
    // Weighted least-squares slope of ratio against delta; growth as delta shrinks
    // is a significantly negative slope.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < ratio.size(); ++k) {
        const double w = 1.0 / (se[k] * se[k]);
        sw += w;
        sx += w * deltas[k];
        sy += w * ratio[k];
        sxx += w * deltas[k] * deltas[k];
        sxy += w * deltas[k] * ratio[k];
    }
    const double denom = sw * sxx - sx * sx;
    const double slope = (sw * sxy - sx * sy) / denom;
    const double slope_se = std::sqrt(sw / denom);
    const bool band = *lo > 0.0 && *hi <= 2.0 * *lo;
    const bool no_growth = slope >= -2.0 * slope_se;
    return {band && no_growth, fmt("ratios %.4f %.4f %.4f %.4f, max/min %.3f, slope %.3g (se %.2g)", ratio[0],
                                   ratio[1], ratio[2], ratio[3], *hi / *lo, slope, slope_se)};
}

Outcome criterion_rough_pde() {
    bool pass = true;
    std::string detail;
    const RegressionSpec reg;

    // Heat equation with h = x^2: u(0, 0) = T.
    {
        PdeProblem heat;
        heat.terminal = {[](std::span<const double> x) { return x[0] * x[0]; }, 1e6};
        FdSettings fd;
        const auto u = fd_reference_solve(heat, fd);
        MonteCarloSettings mc;
        mc.paths = 100000;
        mc.steps = 100;
        mc.seed = 1;
        mc.solver.workers = 4;
        const std::vector<Probe> origin{{0.0, 0.0}};
        const auto v = feynman_kac_probes(heat, origin, mc, reg);
        const double fd_err = std::fabs(u.at(0.0, 0.0) - 1.0);
        const double mc_rel = std::fabs(v[0].first - 1.0);
        pass = pass && fd_err <= 1e-3 && mc_rel <= 0.02;
        detail += fmt("heat fd err %.2g mc rel %.3g; ", fd_err, mc_rel);
    }

    // Smooth eta, g = tanh: fd against Monte Carlo at five interior probes.
    PdeProblem smooth;
    smooth.driver = Driver::affine(0.2, 0.3);
    smooth.drift_fields = {make_function(Shape::tanh)};
    smooth.eta = generate_eta(EtaSpec{SinusoidSpec{{0.5}, {1.0}, {0.0}}, 1, 1.0}, TimeGrid::uniform(1.0, 400)).path;
    smooth.terminal = Terminal::of_first(make_function(Shape::tanh, 0.5, 1.0, 1.0), 1.5);
    smooth.terminal_lipschitz = 0.5;
    const auto [lo, hi] = fd_box(-1.0, 1.0, 1.0, 1.0);
    FdSettings fd;
    fd.t_cells = 400;
    fd.x_cells = 560;
    fd.x_lo = lo;
    fd.x_hi = hi;
    fd.probe_lo = -1.0;
    fd.probe_hi = 1.0;
    const std::vector<Probe> probes{{0.0, -1.0}, {0.0, 0.0}, {0.0, 1.0}, {0.5, -0.5}, {0.5, 0.5}};
    MonteCarloSettings mc;
    mc.paths = 10000;
    mc.steps = 200;
    mc.seed = 2;
    mc.solver.workers = 4;
    {
        const auto u = fd_reference_solve(smooth, fd);
        const auto v = feynman_kac_probes(smooth, probes, mc, reg);
        double worst = 0.0;
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const double ref = u.at(probes[k].t, probes[k].x);
            worst = std::max(worst, std::fabs(ref - v[k].first) / std::fabs(ref));
        }
        pass = pass && worst <= 0.02;
        detail += fmt("fd vs mc max rel %.3g; ", worst);
    }

    // Rough eta: fd along a 4-level mollification ladder of fBm.
    {
        PdeProblem rough = smooth;
        rough.eta = generate_eta(EtaSpec{FbmSpec{0.75, 5, 1.0}, 1, 1.0}, TimeGrid::uniform(1.0, 400)).path;
        const auto levels = approximation_sequence(rough.eta, 1.4, 4);
        const auto study = rough_convergence_study(rough, levels, 1.4, probes, fd, mc, reg);
        std::string col;
        for (const auto& r : study.rows)
            if (!std::isnan(r.cauchy_gap)) col += fmt("%.3g ", r.cauchy_gap);
        pass = pass && study.cauchy_strictly_decreasing;
        detail += fmt("cauchy %s", col.c_str());
    }
    return {pass, detail};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {"1 pvar DP equals partition enumeration", criterion_pvar_oracle},
        {"2 Young integral bound", criterion_young_bound},
        {"3 composition and product lemmas", criterion_lemmas},
        {"4 Young ODE exponential and Richardson", criterion_young_ode},
        {"5 BSDE closed forms", criterion_bsde_closed_forms},
        {"6 comparison on 20 random pairs", criterion_comparison},
        {"7 Picard contraction and agreement", criterion_picard},
        {"8 stability along fBm mollification", criterion_stability},
        {"9 Lipschitz in terminal value", criterion_lipschitz},
        {"10 rough PDE", criterion_rough_pde},
    };
    const auto t0 = Clock::now();
    int failed = 0;
    for (const auto& e : entries) {
        const auto start = Clock::now();
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        if (!out.pass) ++failed;
        std::printf("%s  criterion %-42s %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", e.name, out.detail.c_str(),
                    seconds_since(start));
        std::fflush(stdout);
    }
    const double total = seconds_since(t0);
    const bool in_budget = total < 900.0;
    if (!in_budget) ++failed;
    std::printf("%s  total runtime %.1f s (budget 900 s)\n", in_budget ? "PASS" : "FAIL", total);
    return failed == 0 ? 0 : 1;
}
