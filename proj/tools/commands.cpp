#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

#include "youngbsde/bsde.hpp"
#include "youngbsde/io.hpp"
#include "youngbsde/montecarlo.hpp"
#include "youngbsde/rpde.hpp"
#include "youngbsde/signals.hpp"
#include "youngbsde/young.hpp"

namespace cli {

using namespace ybsde;

std::uint64_t Run::require_seed() const {
    if (!seed_) throw ConfigError("config field 'seed': required for this command (or pass --seed)");
    return *seed_;
}

std::filesystem::path Run::target(const std::string& name) {
    files_.push_back(name);
    return out_dir_ / name;
}

void Run::write_table(const std::string& name, std::span<const std::string> header,
                      const std::vector<std::vector<double>>& rows) {
    write_table_csv(target(name), header, rows);
}

void Run::write_path(const std::string& name, const DiscretePath& path) { write_path_csv(target(name), path); }

void Run::write_json(const std::string& name, const json& document) {
    std::ofstream out(target(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir_ / name).string());
    out << document.dump(2) << '\n';
}

void Run::record(const std::string& key, json value) { results_[key] = std::move(value); }

void Run::report(const std::string& key, const json& value) {
    results_[key] = value;
    std::cout << key << " = " << (value.is_number_float() ? format_double(value.get<double>()) : value.dump())
              << '\n';
}

namespace {

std::size_t read_count(Section& s, const std::string& key, std::size_t fallback) {
    const auto v = s.integer(key, fallback);
    if (v > (std::uint64_t{1} << 40)) s.fail(key, "value too large");
    return static_cast<std::size_t>(v);
}

std::size_t read_count(Section& s, const std::string& key) {
    if (!s.has(key)) s.fail(key, "required but missing");
    return read_count(s, key, 0);
}

ApproximationKind read_approximation(Section& s) {
    const std::string kind = s.text("approximation", "moving_average");
    if (kind == "moving_average") return ApproximationKind::moving_average;
    if (kind == "coarse_interpolation") return ApproximationKind::coarse_interpolation;
    s.fail("approximation", "unknown approximation '" + kind + "' (moving_average, coarse_interpolation)");
}

struct Ladder {
    std::size_t levels = 0;
    double q = 1.5;
    ApproximationKind kind = ApproximationKind::moving_average;
};

Ladder read_ladder(Section s) {
    Ladder l;
    l.levels = read_count(s, "levels");
    l.q = s.number("q");
    l.kind = read_approximation(s);
    s.finish();
    if (l.levels == 0) throw ConfigError("config field '" + s.path() + ".levels': must be positive");
    return l;
}

MonteCarloSettings read_mc(Section s, std::uint64_t seed, unsigned workers) {
    MonteCarloSettings mc;
    mc.paths = read_count(s, "paths");
    mc.steps = read_count(s, "steps");
    mc.solver.inner_iters = read_count(s, "inner_iters", mc.solver.inner_iters);
    s.finish();
    mc.seed = seed;
    mc.solver.workers = workers;
    return mc;
}

json warnings_json(const std::vector<std::string>& warnings) {
    json out = json::array();
    for (const auto& w : warnings) out.push_back(w);
    return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------- pvar

void cmd_pvar(Section& root, Run& run) {
    const double horizon = root.number("horizon", 0.0);
    const auto eta = read_eta(root.child("path"), horizon, run.context());
    const std::vector<double> exponents = root.numbers("exponents");
    Window window = eta.path.full_window();
    if (root.has("window")) {
        const auto w = root.numbers("window");
        if (w.size() != 2 || w[0] < 0 || w[1] < w[0] || w[0] != std::floor(w[0]) || w[1] != std::floor(w[1]))
            root.fail("window", "expected [first, last] node indices");
        window = {static_cast<std::size_t>(w[0]), static_cast<std::size_t>(w[1])};
        if (window.last >= eta.path.size()) root.fail("window", "last index beyond the path");
    }
    const bool profile = root.flag("profile", false);
    root.finish();
    if (exponents.empty()) throw ConfigError("config field 'exponents': needs at least one exponent");

    std::vector<std::vector<double>> rows;
    run.timed("pvar_norm", [&] {
        for (double p : exponents) {
            const double v = pvar_norm(eta.path, p, window);
            rows.push_back({p, v, sup_norm(eta.path, window)});
            std::cout << "pvar p=" << format_double(p) << " " << format_double(v) << '\n';
        }
    });
    json norms = json::array();
    for (const auto& r : rows) norms.push_back({{"exponent", r[0]}, {"pvar", r[1]}});
    run.record("pvar", norms);
    run.write_table("pvar.csv", std::vector<std::string>{"exponent", "pvar", "sup"}, rows);

    if (profile) {
        const auto table = run.timed("qvar_profile", [&] { return qvar_profile(eta.path, exponents); });
        std::vector<std::vector<double>> prof;
        for (const auto& r : table)
            for (std::size_t l = 0; l < r.dyadic_sums.size(); ++l)
                prof.push_back({r.exponent, r.pvar, static_cast<double>(l), r.dyadic_sums[l]});
        run.write_table("profile.csv", std::vector<std::string>{"exponent", "pvar", "dyadic_level", "dyadic_sum"},
                        prof);
    }
}

// ---------------------------------------------------------------- young

IntegrationMode read_mode(Section& s) {
    const std::string mode = s.text("mode", "exact_pl");
    if (mode == "exact_pl") return IntegrationMode::exact_pl;
    if (mode == "left_point") return IntegrationMode::left_point;
    s.fail("mode", "unknown mode '" + mode + "' (exact_pl, left_point)");
}

void cmd_young(Section& root, Run& run) {
    const double horizon = root.number("horizon", 0.0);
    const auto x = read_eta(root.child("x"), horizon, run.context());
    const auto y = read_eta(root.child("y"), horizon, run.context());
    const IntegrationMode mode = read_mode(root);
    const std::size_t refinement = read_count(root, "refinement", 1);
    std::optional<VariationExponents> exponents;
    if (auto e = root.optional_child("exponents")) {
        exponents = VariationExponents{e->number("p"), e->number("q")};
        e->finish();
    }
    struct LemmaSweep {
        std::size_t pairs, nodes;
        double scale, p;
        ScalarFunction g;
        std::uint64_t seed;
    };
    std::optional<LemmaSweep> sweep;
    if (auto l = root.optional_child("lemmas")) {
        const std::size_t pairs = read_count(*l, "pairs");
        const std::size_t nodes = read_count(*l, "nodes", 20);
        const double scale = l->number("scale", 0.5);
        const double p = l->number("p");
        ScalarFunction g = read_function(l->child("field"));
        const std::uint64_t seed = l->integer("seed");
        l->finish();
        if (nodes < 2) l->fail("nodes", "needs at least 2");
        sweep = LemmaSweep{pairs, nodes, scale, p, std::move(g), seed};
    }
    root.finish();

    const auto result = run.timed("young_integral", [&] { return young_integral(x.path, y.path, mode, refinement, exponents); });
    run.write_path("integral.csv", result.integral_path);
    const auto& ip = result.integral_path;
    run.report("integral_end", ip.at(ip.size() - 1));
    if (exponents) {
        const auto bound = run.timed("young_bound", [&] { return young_bound_report(x.path, y.path, exponents->p, exponents->q); });
        run.write_table("bound.csv", std::vector<std::string>{"p", "q", "constant", "lhs", "rhs", "satisfied"},
                        {{exponents->p, exponents->q, young_constant(exponents->p, exponents->q), bound.lhs, bound.rhs,
                          bound.satisfied ? 1.0 : 0.0}});
        run.report("bound_satisfied", bound.satisfied);
    }

    if (sweep) {
        const auto& [pairs, nodes, scale, p, g, seed] = *sweep;
        // Pair i uses random piecewise-linear paths keyed by seed + 2i and seed + 2i + 1.
        const double T = horizon > 0.0 ? horizon : 1.0;
        const TimeGrid grid = TimeGrid::uniform(T, nodes - 1);
        auto walk = [&](std::uint64_t key) {
            return generate_eta(EtaSpec{RandomPlSpec{nodes, scale, key}, 1, T}, grid).path;
        };
        std::vector<std::vector<double>> rows;
        std::size_t failures = 0;
        run.timed("lemma_sweep", [&] {
            for (std::size_t i = 0; i < pairs; ++i) {
                const auto a = walk(seed + 2 * i);
                const auto b = walk(seed + 2 * i + 1);
                const auto prod = product_lemma_check(a, b, p);
                const auto comp = composition_lemma_check(g, a, b, p);
                failures += (prod.satisfied ? 0 : 1) + (comp.satisfied ? 0 : 1);
                rows.push_back({static_cast<double>(i), prod.lhs, prod.rhs, comp.lhs, comp.rhs});
            }
        });
        run.write_table("lemmas.csv",
                        std::vector<std::string>{"pair", "product_lhs", "product_rhs", "composition_lhs", "composition_rhs"},
                        rows);
        run.report("lemma_failures", failures);
    }
}

// ---------------------------------------------------------------- ode

void cmd_ode(Section& root, Run& run) {
    const double horizon = root.number("horizon", 0.0);
    const double y0 = root.number("y0");
    std::vector<ScalarFunction> fields;
    for (auto& f : root.children("fields")) fields.push_back(read_function(f));
    DiscretePath driver = read_eta(root.child("eta"), horizon, run.context()).path;
    const std::string direction = root.text("direction", "forward");
    if (direction != "forward" && direction != "backward") root.fail("direction", "expected forward or backward");
    const OdeSpec spec{y0, std::move(fields), std::move(driver),
                       direction == "forward" ? OdeDirection::forward : OdeDirection::backward, {}};
    const std::size_t substeps = read_count(root, "substeps", 100);
    root.finish();

    const auto result = run.timed("ode_solve", [&] { return ode_solve(spec, substeps); });
    run.write_path("ode.csv", result.path);
    const double end = spec.direction == OdeDirection::forward ? result.path.at(result.path.size() - 1)
                                                               : result.path.at(0);
    run.write_table("ode_report.csv", std::vector<std::string>{"substeps", "solution_end", "richardson_discrepancy"},
                    {{static_cast<double>(substeps), end, result.richardson_discrepancy}});
    run.report("solution_end", end);
    run.report("richardson_discrepancy", result.richardson_discrepancy);
}

// ---------------------------------------------------------------- gen-eta

void cmd_gen_eta(Section& root, Run& run) {
    const double horizon = root.number("horizon", 1.0);
    const auto eta = run.timed("generate_eta", [&] { return read_eta(root.child("eta"), horizon, run.context()); });
    std::optional<Ladder> ladder;
    if (auto l = root.optional_child("ladder")) ladder = read_ladder(*l);
    const std::vector<double> exponents = root.numbers("profile_exponents", {});
    root.finish();

    run.write_path("eta.csv", eta.path);
    run.report("cholesky_jitter", eta.cholesky_jitter);
    if (ladder) {
        const auto levels = run.timed("approximation_sequence",
                                      [&] { return approximation_sequence(eta.path, ladder->q, ladder->levels, ladder->kind); });
        const auto distances = ladder_distances(levels, eta.path, ladder->q);
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            run.write_path("eta_level_" + std::to_string(k) + ".csv", levels[k]);
            rows.push_back({static_cast<double>(k), distances[k]});
        }
        run.write_table("ladder.csv", std::vector<std::string>{"level", "qvar_distance"}, rows);
    }
    if (!exponents.empty()) {
        const auto table = run.timed("qvar_profile", [&] { return qvar_profile(eta.path, exponents); });
        std::vector<std::vector<double>> rows;
        for (const auto& r : table)
            for (std::size_t l = 0; l < r.dyadic_sums.size(); ++l)
                rows.push_back({r.exponent, r.pvar, static_cast<double>(l), r.dyadic_sums[l]});
        run.write_table("profile.csv", std::vector<std::string>{"exponent", "pvar", "dyadic_level", "dyadic_sum"},
                        rows);
    }
}

// ---------------------------------------------------------------- sde

void cmd_sde(Section& root, Run& run) {
    const double horizon = root.number("horizon", 1.0);
    const std::size_t steps = read_count(root, "steps");
    const std::size_t paths = read_count(root, "paths");
    const SdeSpec sde = read_sde(root.child("forward"));
    const std::size_t exported = read_count(root, "export_paths", 0);
    root.finish();
    if (steps == 0 || paths == 0) throw ConfigError("config fields 'steps' and 'paths' must be positive");
    if (exported > paths) throw ConfigError("config field 'export_paths': exceeds 'paths'");
    const std::uint64_t seed = run.require_seed();

    const TimeGrid grid = TimeGrid::uniform(horizon, steps);
    const auto ensemble = run.timed("sample_brownian", [&] { return sample_brownian(grid, paths, 1, seed, run.workers()); });
    const auto states = run.timed("euler_maruyama", [&] { return euler_maruyama(sde, ensemble, run.workers()); });

    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < grid.size(); ++n) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t m = 0; m < paths; ++m) mean += states.state(m, n)[0];
        mean /= static_cast<double>(paths);
        for (std::size_t m = 0; m < paths; ++m) sq += std::pow(states.state(m, n)[0] - mean, 2);
        const double sd = paths > 1 ? std::sqrt(sq / static_cast<double>(paths - 1)) : 0.0;
        rows.push_back({grid[n], mean, sd});
    }
    run.write_table("moments.csv", std::vector<std::string>{"t", "mean", "sd"}, rows);
    run.report("terminal_mean", rows.back()[1]);
    run.report("terminal_sd", rows.back()[2]);

    if (exported > 0) {
        std::vector<std::string> header{"t"};
        for (std::size_t m = 0; m < exported; ++m) header.push_back("path" + std::to_string(m));
        std::vector<std::vector<double>> table;
        for (std::size_t n = 0; n < grid.size(); ++n) {
            std::vector<double> row{grid[n]};
            for (std::size_t m = 0; m < exported; ++m) row.push_back(states.state(m, n)[0]);
            table.push_back(std::move(row));
        }
        run.write_table("paths.csv", header, table);
    }
}

// ---------------------------------------------------------------- bsde

void cmd_bsde(Section& root, Run& run) {
    const BsdeSetup setup = read_bsde_problem(root.child("problem"), run.context());
    const RegressionSpec regression = read_regression(root.optional_child("regression"));
    std::string scheme = "backward";
    std::size_t sweeps = 5;
    SolverOptions options;
    options.workers = run.workers();
    if (auto s = root.optional_child("solver")) {
        scheme = s->text("scheme", scheme);
        if (scheme != "backward" && scheme != "picard") s->fail("scheme", "expected backward or picard");
        sweeps = read_count(*s, "sweeps", sweeps);
        options.inner_iters = read_count(*s, "inner_iters", options.inner_iters);
        s->finish();
    }
    double bp_exponent = 2.5;
    std::vector<double> export_nodes{0.0};
    if (auto d = root.optional_child("diagnostics")) {
        bp_exponent = d->number("bp_exponent", bp_exponent);
        export_nodes = d->numbers("export_nodes", export_nodes);
        d->finish();
    }
    root.finish();
    if (bp_exponent <= 2.0) throw ConfigError("config field 'diagnostics.bp_exponent': must exceed 2");
    for (double n : export_nodes)
        if (n < 0 || n != std::floor(n) || n > static_cast<double>(setup.steps))
            throw ConfigError("config field 'diagnostics.export_nodes': entries must be node indices in [0, steps]");
    const std::uint64_t seed = run.require_seed();

    const TimeGrid grid = TimeGrid::uniform(setup.problem.horizon, setup.steps);
    auto ensemble = run.timed("sample_brownian", [&] {
        return std::make_shared<const BrownianEnsemble>(
            sample_brownian(grid, setup.paths, setup.brownian_dim, seed, run.workers()));
    });

    std::optional<PicardResult> picard;
    BsdeSolution solution = run.timed("solve", [&] {
        if (scheme == "picard") {
            picard = solve_picard(setup.problem, ensemble, regression, sweeps, options);
            return picard->solution;
        }
        return solve_backward(setup.problem, ensemble, regression, options);
    });
    print_warnings(solution.warnings);

    const double bp = run.timed("bp_norm", [&] { return bp_norm_estimate(solution, bp_exponent, regression); });
    const auto bmo = run.timed("bmo_profile", [&] { return bmo_profile(solution, regression); });
    double bmo_norm = 0.0;
    for (double v : bmo) bmo_norm = std::max(bmo_norm, v);

    json summary = {
        {"y0", solution.y0()},
        {"y0_standard_error", solution.y0_standard_error()},
        {"bp_norm", bp},
        {"bp_exponent", bp_exponent},
        {"bmo_norm", bmo_norm},
        {"scheme", solution.scheme},
        {"seed", seed},
        {"steps", setup.steps},
        {"paths", setup.paths},
        {"warnings", warnings_json(solution.warnings)},
    };
    if (picard) summary["sweep_differences"] = picard->sweep_differences;
    run.write_json("summary.json", summary);
    run.report("y0", solution.y0());
    run.report("y0_standard_error", solution.y0_standard_error());
    run.report("bp_norm", bp);
    run.report("bmo_norm", bmo_norm);

    // One row per node: sample moments of Y and Z plus the regression diagnostics of the cell.
    std::vector<std::vector<double>> rows;
    const std::size_t M = solution.paths;
    for (std::size_t n = 0; n < solution.nodes(); ++n) {
        double ym = 0.0, ysq = 0.0, zm = 0.0, zsq = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            ym += solution.Y(m, n);
            for (std::size_t c = 0; c < solution.brownian_dim; ++c) zsq += std::pow(solution.Z(m, n, c), 2);
            zm += solution.Z(m, n, 0);
        }
        ym /= static_cast<double>(M);
        zm /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m) ysq += std::pow(solution.Y(m, n) - ym, 2);
        const double ysd = std::sqrt(ysq / static_cast<double>(M - 1));
        const double zrms = std::sqrt(zsq / static_cast<double>(M));
        double cond = 1.0, resid = 0.0, fallback = 0.0, bmo_n = 0.0;
        if (n >= solution.start_node) {
            const std::size_t k = n - solution.start_node;
            if (k < solution.diagnostics.size()) {
                cond = solution.diagnostics[k].condition_number;
                resid = solution.diagnostics[k].residual_rms;
                fallback = solution.diagnostics[k].ridge_fallback ? 1.0 : 0.0;
            }
            if (k < bmo.size()) bmo_n = bmo[k];
        }
        rows.push_back({static_cast<double>(n), solution.grid[n], ym, ysd, zm, zrms, cond, resid, fallback, bmo_n});
    }
    run.write_table("slices.csv",
                    std::vector<std::string>{"node", "t", "y_mean", "y_sd", "z1_mean", "z_rms", "condition_number",
                                             "residual_rms", "ridge_fallback", "bmo_profile"},
                    rows);

    for (double node_d : export_nodes) {
        const auto node = static_cast<std::size_t>(node_d);
        std::vector<std::string> header{"sample", "Y"};
        for (std::size_t c = 0; c < solution.brownian_dim; ++c) header.push_back("Z" + std::to_string(c + 1));
        std::vector<std::vector<double>> table;
        table.reserve(M);
        for (std::size_t m = 0; m < M; ++m) {
            std::vector<double> row{static_cast<double>(m), solution.Y(m, node)};
            for (std::size_t c = 0; c < solution.brownian_dim; ++c) row.push_back(solution.Z(m, node, c));
            table.push_back(std::move(row));
        }
        run.write_table("slice_" + std::to_string(node) + ".csv", header, table);
    }

    if (picard) {
        std::vector<std::vector<double>> sweep_rows;
        for (std::size_t k = 0; k < picard->sweep_differences.size(); ++k)
            sweep_rows.push_back({static_cast<double>(k), picard->sweep_differences[k],
                                  k > 0 ? picard->contraction_ratios[k - 1] : std::nan("")});
        run.write_table("sweeps.csv", std::vector<std::string>{"sweep", "difference", "contraction_ratio"},
                        sweep_rows);
    }
}

// ---------------------------------------------------------------- pde

void write_pde(Run& run, const PdeSolution& u, bool with_errors) {
    std::vector<std::string> header{"t"};
    for (double x : u.xs) header.push_back("x=" + format_double(x));
    std::vector<std::vector<double>> rows, se_rows;
    for (std::size_t i = 0; i < u.times.size(); ++i) {
        std::vector<double> row{u.times[i]}, se{u.times[i]};
        for (std::size_t j = 0; j < u.xs.size(); ++j) {
            row.push_back(u.at_index(i, j));
            se.push_back(u.standard_errors[i * u.xs.size() + j]);
        }
        rows.push_back(std::move(row));
        se_rows.push_back(std::move(se));
    }
    run.write_table("u.csv", header, rows);
    if (with_errors) run.write_table("u_standard_error.csv", header, se_rows);
}

void cmd_pde(Section& root, Run& run) {
    double jitter = 0.0;
    const PdeProblem pde = read_pde_problem(root.child("problem"), run.context(), &jitter);
    const std::string method = root.text("method");
    if (method != "fd" && method != "feynman-kac") root.fail("method", "expected fd or feynman-kac");

    PdeSolution u;
    if (method == "fd") {
        const FdSettings fd = read_fd(root.optional_child("fd"), pde.horizon);
        root.finish();
        u = run.timed("fd_reference_solve", [&] { return fd_reference_solve(pde, fd); });
    } else {
        const std::vector<double> times = root.numbers("times");
        const std::vector<double> xs = root.numbers("xs");
        const RegressionSpec regression = read_regression(root.optional_child("regression"));
        const MonteCarloSettings mc = read_mc(root.child("mc"), run.require_seed(), run.workers());
        root.finish();
        u = run.timed("feynman_kac_solve", [&] { return feynman_kac_solve(pde, times, xs, mc, regression); });
    }
    print_warnings(u.warnings);
    write_pde(run, u, method == "feynman-kac");
    json meta = {
        {"scheme", u.scheme},
        {"seed", u.seed},
        {"times", u.times.size()},
        {"xs", u.xs.size()},
        {"x_lo", u.xs.front()},
        {"x_hi", u.xs.back()},
        {"eta_cholesky_jitter", jitter},
        {"warnings", warnings_json(u.warnings)},
    };
    run.write_json("pde.json", meta);
    run.report("scheme", u.scheme);
    run.report("u_first_row_mid", u.at_index(0, u.xs.size() / 2));
}

// ---------------------------------------------------------------- studies

void cmd_study_stability(Section& root, Run& run) {
    const BsdeSetup setup = read_bsde_problem(root.child("problem"), run.context());
    const Ladder ladder = read_ladder(root.child("ladder"));
    const RegressionSpec regression = read_regression(root.optional_child("regression"));
    StabilityOptions options;
    options.q = ladder.q;
    options.bp_exponent = root.number("bp_exponent", options.bp_exponent);
    options.solver.workers = run.workers();
    options.solver.inner_iters = read_count(root, "inner_iters", options.solver.inner_iters);

    struct LipschitzSetup {
        std::vector<double> deltas;
        std::string perturbation;
        double bound = 0.0;
    };
    std::optional<LipschitzSetup> lip;
    if (auto l = root.optional_child("lipschitz")) {
        lip = LipschitzSetup{l->numbers("deltas"), l->text("perturbation", "sign"), l->number("bound")};
        if (lip->perturbation != "sign" && lip->perturbation != "shift")
            l->fail("perturbation", "expected sign or shift");
        l->finish();
    }
    root.finish();
    const std::uint64_t seed = run.require_seed();

    const TimeGrid grid = TimeGrid::uniform(setup.problem.horizon, setup.steps);
    auto ensemble = run.timed("sample_brownian", [&] {
        return std::make_shared<const BrownianEnsemble>(
            sample_brownian(grid, setup.paths, setup.brownian_dim, seed, run.workers()));
    });
    const auto etas = run.timed("approximation_sequence", [&] {
        return approximation_sequence(setup.problem.eta, ladder.q, ladder.levels, ladder.kind);
    });
    const auto table = run.timed("stability_in_eta",
                                 [&] { return stability_in_eta(setup.problem, etas, ensemble, regression, options); });
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& r = table.rows[k];
        rows.push_back({static_cast<double>(k), r.qvar_distance, r.y0_gap, r.y0_gap_standard_error, r.bp_gap});
    }
    run.write_table("stability.csv",
                    std::vector<std::string>{"level", "qvar_distance", "y0_gap", "y0_gap_standard_error", "bp_gap"},
                    rows);
    run.report("y0_limit", table.y0_limit);
    run.report("gaps_non_increasing", table.gaps_non_increasing);

    if (lip) {
        const Terminal& xi = setup.problem.terminal;
        std::vector<std::vector<double>> lrows;
        run.timed("lipschitz_in_xi", [&] {
            for (double delta : lip->deltas) {
                Terminal prime = xi;
                if (lip->perturbation == "sign") {
                    prime.fn = [xi, delta](std::span<const double> x) {
                        return xi(x) + delta * (x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0));
                    };
                } else {
                    prime.fn = [xi, delta](std::span<const double> x) { return xi(x) + delta; };
                }
                prime.bound = xi.bound + std::abs(delta);
                const auto rep = lipschitz_in_xi(setup.problem, xi, prime, lip->bound, ensemble, regression,
                                                 options.solver);
                lrows.push_back({delta, rep.numerator, rep.denominator, rep.ratio, rep.ratio_standard_error,
                                 rep.inconsistent ? 1.0 : 0.0});
            }
        });
        run.write_table("lipschitz.csv",
                        std::vector<std::string>{"delta", "numerator", "denominator", "ratio", "ratio_standard_error",
                                                 "inconsistent"},
                        lrows);
    }
}

void cmd_study_convergence(Section& root, Run& run) {
    const PdeProblem pde = read_pde_problem(root.child("problem"), run.context());
    const Ladder ladder = read_ladder(root.child("ladder"));
    std::vector<Probe> probes;
    for (auto& p : root.children("probes")) {
        probes.push_back({p.number("t"), p.number("x")});
        p.finish();
    }
    if (probes.empty()) root.fail("probes", "needs at least one probe");
    const FdSettings fd = read_fd(root.optional_child("fd"), pde.horizon);
    const RegressionSpec regression = read_regression(root.optional_child("regression"));
    const MonteCarloSettings mc = read_mc(root.child("mc"), run.require_seed(), run.workers());
    root.finish();

    const auto levels = run.timed("approximation_sequence",
                                  [&] { return approximation_sequence(pde.eta, ladder.q, ladder.levels, ladder.kind); });
    const auto study = run.timed("rough_convergence_study", [&] {
        return rough_convergence_study(pde, levels, ladder.q, probes, fd, mc, regression);
    });
    std::vector<std::vector<double>> rows;
    for (const auto& r : study.rows)
        rows.push_back({static_cast<double>(r.level), r.qvar_distance, r.cauchy_gap, r.mc_gap});
    run.write_table("convergence.csv", kConvergenceHeader, rows);
    std::vector<std::vector<double>> prow;
    for (std::size_t i = 0; i < probes.size(); ++i)
        prow.push_back({probes[i].t, probes[i].x, study.mc_values[i], study.mc_standard_errors[i]});
    run.write_table("probes.csv", std::vector<std::string>{"t", "x", "mc_value", "mc_standard_error"}, prow);
    run.report("cauchy_strictly_decreasing", study.cauchy_strictly_decreasing);
}

}  // namespace

void run_command(const std::string& command, Section& root, Run& run) {
    if (command == "pvar") return cmd_pvar(root, run);
    if (command == "young") return cmd_young(root, run);
    if (command == "ode") return cmd_ode(root, run);
    if (command == "gen-eta") return cmd_gen_eta(root, run);
    if (command == "sde") return cmd_sde(root, run);
    if (command == "bsde") return cmd_bsde(root, run);
    if (command == "pde") return cmd_pde(root, run);
    if (command == "study-stability") return cmd_study_stability(root, run);
    if (command == "study-convergence") return cmd_study_convergence(root, run);
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace cli
