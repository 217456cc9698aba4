// Python bindings: paths and variation norms, Young integrals and ODEs, signal
// generation, Brownian ensembles, the BSDE solvers and the PDE solvers.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "youngbsde/bsde.hpp"
#include "youngbsde/errors.hpp"
#include "youngbsde/functions.hpp"
#include "youngbsde/io.hpp"
#include "youngbsde/montecarlo.hpp"
#include "youngbsde/paths.hpp"
#include "youngbsde/rpde.hpp"
#include "youngbsde/signals.hpp"
#include "youngbsde/young.hpp"

namespace py = pybind11;
using namespace ybsde;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

/// values: shape (n,) for scalar paths or (n, d).
DiscretePath make_path(const Array& times, const Array& values) {
    if (values.ndim() != 1 && values.ndim() != 2) throw ValidationError("values must be 1-d or 2-d");
    const std::size_t dim = values.ndim() == 2 ? static_cast<std::size_t>(values.shape(1)) : 1;
    return DiscretePath(TimeGrid(to_vector(times)), to_vector(values), dim);
}

Array path_values(const DiscretePath& p) {
    Array out({p.size(), p.dim()});
    std::copy(p.values().begin(), p.values().end(), out.mutable_data());
    return out;
}

Array vector_array(const std::vector<double>& v) {
    Array out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

ScalarFunction function_by_name(const std::string& base, double a, double b, double c) {
    const auto shape = parse_shape(base);
    if (!shape) throw ValidationError("unknown function '" + base + "'");
    return make_function(*shape, a, b, c);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Young integration, p-variation and Monte-Carlo BSDE solvers with a Young drift";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    // ---- paths
    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init([](const Array& t) { return TimeGrid(to_vector(t)); }), py::arg("times"))
        .def_static("uniform", &TimeGrid::uniform, py::arg("horizon"), py::arg("cells"))
        .def_property_readonly("times", [](const TimeGrid& g) { return vector_array({g.times().begin(), g.times().end()}); })
        .def_property_readonly("horizon", &TimeGrid::horizon)
        .def("__len__", &TimeGrid::size);

    py::class_<DiscretePath>(m, "DiscretePath")
        .def(py::init(&make_path), py::arg("times"), py::arg("values"))
        .def_property_readonly("times", [](const DiscretePath& p) {
            return vector_array({p.grid().times().begin(), p.grid().times().end()});
        })
        .def_property_readonly("values", &path_values)
        .def_property_readonly("dim", &DiscretePath::dim)
        .def("__len__", &DiscretePath::size)
        .def("evaluate", &DiscretePath::evaluate, py::arg("t"))
        .def("scaled", &DiscretePath::scaled, py::arg("c"))
        .def("channel", &DiscretePath::channel, py::arg("coord"));

    m.def("pvar_norm", [](const DiscretePath& p, double exponent) { return pvar_norm(p, exponent); },
          py::arg("path"), py::arg("p"));
    m.def("pvar_norm_window",
          [](const DiscretePath& p, double exponent, std::size_t first, std::size_t last) {
              return pvar_norm(p, exponent, Window{first, last});
          },
          py::arg("path"), py::arg("p"), py::arg("first"), py::arg("last"));
    m.def("brute_force_pvar",
          [](const DiscretePath& p, double exponent) { return brute_force_pvar(p, exponent, p.full_window()); },
          py::arg("path"), py::arg("p"));
    m.def("sup_norm", [](const DiscretePath& p) { return sup_norm(p); }, py::arg("path"));
    m.def("var_distance", &var_distance, py::arg("a"), py::arg("b"), py::arg("q"));
    m.def("read_path_csv", [](const std::string& file) { return read_path_csv(std::filesystem::path(file)); });
    m.def("write_path_csv",
          [](const std::string& file, const DiscretePath& p) { write_path_csv(std::filesystem::path(file), p); });

    // ---- functions and Young calculus
    py::class_<ScalarFunction>(m, "ScalarFunction")
        .def("__call__", &ScalarFunction::operator())
        .def("derivative", [](const ScalarFunction& f, double y) { return f.derivative(y); })
        .def_readonly("sup_bound", &ScalarFunction::sup_bound)
        .def_readonly("d1_bound", &ScalarFunction::d1_bound)
        .def_readonly("d2_bound", &ScalarFunction::d2_bound)
        .def_readonly("name", &ScalarFunction::name);
    m.def("make_function", &function_by_name, py::arg("base"), py::arg("a") = 1.0, py::arg("b") = 1.0,
          py::arg("c") = 0.0, "a * base(b * y) + c for base in constant, identity, tanh, sin, cos, square, sign");

    m.def("young_integral",
          [](const DiscretePath& x, const DiscretePath& y, const std::string& mode, std::size_t refinement) {
              IntegrationMode im;
              if (mode == "exact_pl") im = IntegrationMode::exact_pl;
              else if (mode == "left_point") im = IntegrationMode::left_point;
              else throw ValidationError("mode must be exact_pl or left_point");
              return young_integral(x, y, im, refinement).integral_path;
          },
          py::arg("x"), py::arg("y"), py::arg("mode") = "exact_pl", py::arg("refinement") = 1);
    m.def("young_constant", &young_constant, py::arg("p"), py::arg("q"));

    py::class_<InequalityReport>(m, "InequalityReport")
        .def_readonly("lhs", &InequalityReport::lhs)
        .def_readonly("rhs", &InequalityReport::rhs)
        .def_readonly("satisfied", &InequalityReport::satisfied);
    m.def("young_bound_report", &young_bound_report, py::arg("x"), py::arg("y"), py::arg("p"), py::arg("q"));
    m.def("product_lemma_check", &product_lemma_check, py::arg("a"), py::arg("b"), py::arg("p"));
    m.def("composition_lemma_check", &composition_lemma_check, py::arg("g"), py::arg("a"), py::arg("a_prime"),
          py::arg("p"));

    m.def("ode_solve",
          [](double y0, std::vector<ScalarFunction> fields, const DiscretePath& driver, bool backward,
             std::size_t substeps) {
              const OdeSpec spec{y0, std::move(fields), driver,
                                 backward ? OdeDirection::backward : OdeDirection::forward, {}};
              const auto r = ode_solve(spec, substeps);
              return py::make_tuple(r.path, r.richardson_discrepancy);
          },
          py::arg("y0"), py::arg("fields"), py::arg("driver"), py::arg("backward") = false,
          py::arg("substeps") = 100, "returns (solution path, Richardson discrepancy)");

    // ---- signals
    m.def("sinusoid",
          [](std::vector<double> amplitudes, std::vector<double> frequencies, std::vector<double> phases,
             double horizon, std::size_t cells) {
              const std::size_t d = amplitudes.size();
              if (phases.empty()) phases.assign(d, 0.0);
              const EtaSpec spec{SinusoidSpec{std::move(amplitudes), std::move(frequencies), std::move(phases)}, d,
                                 horizon};
              return generate_eta(spec, TimeGrid::uniform(horizon, cells)).path;
          },
          py::arg("amplitudes"), py::arg("frequencies"), py::arg("phases") = std::vector<double>{},
          py::arg("horizon") = 1.0, py::arg("cells") = 200);
    m.def("random_pl",
          [](std::size_t nodes, double scale, std::uint64_t seed, double horizon, std::size_t cells,
             std::size_t dimension) {
              const EtaSpec spec{RandomPlSpec{nodes, scale, seed}, dimension, horizon};
              return generate_eta(spec, TimeGrid::uniform(horizon, cells)).path;
          },
          py::arg("nodes"), py::arg("scale"), py::arg("seed"), py::arg("horizon") = 1.0, py::arg("cells") = 200,
          py::arg("dimension") = 1);
    m.def("fbm",
          [](double hurst, std::uint64_t seed, double horizon, std::size_t cells, double scale,
             std::size_t dimension) {
              const EtaSpec spec{FbmSpec{hurst, seed, scale}, dimension, horizon};
              return generate_eta(spec, TimeGrid::uniform(horizon, cells)).path;
          },
          py::arg("hurst"), py::arg("seed"), py::arg("horizon") = 1.0, py::arg("cells") = 200,
          py::arg("scale") = 1.0, py::arg("dimension") = 1);
    m.def("mollifier_half_width", &mollifier_half_width, py::arg("nodes"), py::arg("level"));
    m.def("moving_average", &moving_average, py::arg("path"), py::arg("half_width"));
    m.def("approximation_sequence",
          [](const DiscretePath& eta, double q, std::size_t levels, const std::string& kind) {
              ApproximationKind k;
              if (kind == "moving_average") k = ApproximationKind::moving_average;
              else if (kind == "coarse_interpolation") k = ApproximationKind::coarse_interpolation;
              else throw ValidationError("kind must be moving_average or coarse_interpolation");
              return approximation_sequence(eta, q, levels, k);
          },
          py::arg("eta"), py::arg("q"), py::arg("levels"), py::arg("kind") = "moving_average");

    // ---- Monte Carlo
    m.def("sample_brownian",
          [](double horizon, std::size_t cells, std::size_t paths, std::size_t dim, std::uint64_t seed,
             unsigned workers) {
              const auto ens = sample_brownian(TimeGrid::uniform(horizon, cells), paths, dim, seed, workers);
              Array out({paths, ens.nodes(), dim});
              std::copy(ens.data().begin(), ens.data().end(), out.mutable_data());
              return out;
          },
          py::arg("horizon"), py::arg("cells"), py::arg("paths"), py::arg("dim") = 1, py::arg("seed") = 0,
          py::arg("workers") = 1, "array of shape (paths, cells + 1, dim)");

    // ---- BSDE
    py::class_<Driver>(m, "Driver")
        .def_static("zero", &Driver::zero)
        .def_static("affine", &Driver::affine, py::arg("c"), py::arg("a_y"), py::arg("a_z") = 0.0,
                    py::arg("brownian_dim") = 1)
        .def_static("with_term", &Driver::with_term, py::arg("c"), py::arg("a_y"), py::arg("a_z"),
                    py::arg("brownian_dim"), py::arg("k"), py::arg("phi"))
        .def_readonly("lipschitz", &Driver::lipschitz);

    py::class_<Terminal>(m, "Terminal")
        .def_static("constant", &Terminal::constant, py::arg("c"))
        .def_static("of_first", &Terminal::of_first, py::arg("h"), py::arg("bound"))
        .def_readonly("bound", &Terminal::bound);

    py::class_<SdeSpec>(m, "SdeSpec");
    m.def("affine_sde", &affine_sde, py::arg("b0"), py::arg("b1"), py::arg("s0"), py::arg("s1"), py::arg("x0"),
          py::arg("start_time") = 0.0, "dX = (b0 + b1 X) dt + (s0 + s1 X) dW");

    py::class_<BsdeProblem>(m, "BsdeProblem")
        .def(py::init([](double horizon, Driver driver, std::vector<ScalarFunction> fields, DiscretePath eta,
                         Terminal terminal, std::optional<SdeSpec> forward) {
                 BsdeProblem p;
                 p.horizon = horizon;
                 p.driver = std::move(driver);
                 p.drift_fields = std::move(fields);
                 p.eta = std::move(eta);
                 p.terminal = std::move(terminal);
                 p.forward = std::move(forward);
                 return p;
             }),
             py::arg("horizon"), py::arg("driver"), py::arg("fields"), py::arg("eta"), py::arg("terminal"),
             py::arg("forward") = std::nullopt);

    py::class_<RegressionSpec>(m, "RegressionSpec")
        .def(py::init([](std::size_t degree, double ridge) { return RegressionSpec{degree, ridge, 10}; }),
             py::arg("degree") = 3, py::arg("ridge") = 1e-8)
        .def_readwrite("degree", &RegressionSpec::degree)
        .def_readwrite("ridge", &RegressionSpec::ridge);

    py::class_<BsdeSolution>(m, "BsdeSolution")
        .def("y0", &BsdeSolution::y0)
        .def("y0_standard_error", &BsdeSolution::y0_standard_error)
        .def_readonly("scheme", &BsdeSolution::scheme)
        .def_readonly("warnings", &BsdeSolution::warnings)
        .def_property_readonly("times", [](const BsdeSolution& s) {
            return vector_array({s.grid.times().begin(), s.grid.times().end()});
        })
        .def_property_readonly("y", [](const BsdeSolution& s) {
            Array out({s.paths, s.nodes()});
            std::copy(s.y.begin(), s.y.end(), out.mutable_data());
            return out;
        })
        .def_property_readonly("z", [](const BsdeSolution& s) {
            Array out({s.paths, s.nodes(), s.brownian_dim});
            std::copy(s.z.begin(), s.z.end(), out.mutable_data());
            return out;
        });

    auto ensemble = [](const BsdeProblem& p, std::size_t steps, std::size_t paths, std::size_t dim,
                       std::uint64_t seed, unsigned workers) {
        return std::make_shared<const BrownianEnsemble>(
            sample_brownian(TimeGrid::uniform(p.horizon, steps), paths, dim, seed, workers));
    };
    m.def("solve_backward",
          [ensemble](const BsdeProblem& p, std::size_t steps, std::size_t paths, std::uint64_t seed,
                     const RegressionSpec& reg, std::size_t brownian_dim, std::size_t inner_iters,
                     unsigned workers) {
              return solve_backward(p, ensemble(p, steps, paths, brownian_dim, seed, workers), reg,
                                    SolverOptions{inner_iters, workers});
          },
          py::arg("problem"), py::arg("steps"), py::arg("paths"), py::arg("seed"),
          py::arg("regression") = RegressionSpec{}, py::arg("brownian_dim") = 1, py::arg("inner_iters") = 3,
          py::arg("workers") = 1);
    m.def("solve_picard",
          [ensemble](const BsdeProblem& p, std::size_t steps, std::size_t paths, std::uint64_t seed,
                     std::size_t sweeps, const RegressionSpec& reg, std::size_t brownian_dim, unsigned workers) {
              auto r = solve_picard(p, ensemble(p, steps, paths, brownian_dim, seed, workers), reg, sweeps,
                                    SolverOptions{3, workers});
              return py::make_tuple(r.solution, r.sweep_differences);
          },
          py::arg("problem"), py::arg("steps"), py::arg("paths"), py::arg("seed"), py::arg("sweeps") = 5,
          py::arg("regression") = RegressionSpec{}, py::arg("brownian_dim") = 1, py::arg("workers") = 1,
          "returns (solution, sweep differences)");
    m.def("bp_norm_estimate", &bp_norm_estimate, py::arg("solution"), py::arg("p"),
          py::arg("regression") = RegressionSpec{});
    m.def("bmo_norm_estimate", &bmo_norm_estimate, py::arg("solution"), py::arg("regression") = RegressionSpec{});

    // ---- PDE
    py::class_<PdeProblem>(m, "PdeProblem")
        .def(py::init([](double horizon, SdeSpec sde, Driver driver, std::vector<ScalarFunction> fields,
                         DiscretePath eta, Terminal terminal, double terminal_lipschitz) {
                 PdeProblem p;
                 p.horizon = horizon;
                 p.sde = std::move(sde);
                 p.driver = std::move(driver);
                 p.drift_fields = std::move(fields);
                 p.eta = std::move(eta);
                 p.terminal = std::move(terminal);
                 p.terminal_lipschitz = terminal_lipschitz;
                 return p;
             }),
             py::arg("horizon"), py::arg("sde"), py::arg("driver"), py::arg("fields"), py::arg("eta"),
             py::arg("terminal"), py::arg("terminal_lipschitz") = 0.0);

    py::class_<PdeSolution>(m, "PdeSolution")
        .def_readonly("times", &PdeSolution::times)
        .def_readonly("xs", &PdeSolution::xs)
        .def_readonly("scheme", &PdeSolution::scheme)
        .def_readonly("warnings", &PdeSolution::warnings)
        .def("at", &PdeSolution::at, py::arg("t"), py::arg("x"))
        .def_property_readonly("values", [](const PdeSolution& u) {
            Array out({u.times.size(), u.xs.size()});
            std::copy(u.values.begin(), u.values.end(), out.mutable_data());
            return out;
        });

    m.def("fd_reference_solve",
          [](const PdeProblem& p, std::size_t t_cells, std::size_t x_cells, double x_lo, double x_hi,
             double probe_lo, double probe_hi) {
              FdSettings fd;
              fd.t_cells = t_cells;
              fd.x_cells = x_cells;
              fd.x_lo = x_lo;
              fd.x_hi = x_hi;
              fd.probe_lo = probe_lo;
              fd.probe_hi = probe_hi;
              return fd_reference_solve(p, fd);
          },
          py::arg("problem"), py::arg("t_cells") = 400, py::arg("x_cells") = 400, py::arg("x_lo") = -6.0,
          py::arg("x_hi") = 6.0, py::arg("probe_lo") = 0.0, py::arg("probe_hi") = 0.0);
    m.def("feynman_kac_solve",
          [](const PdeProblem& p, std::vector<double> times, std::vector<double> xs, std::size_t paths,
             std::size_t steps, std::uint64_t seed, const RegressionSpec& reg, unsigned workers) {
              MonteCarloSettings mc;
              mc.paths = paths;
              mc.steps = steps;
              mc.seed = seed;
              mc.solver.workers = workers;
              return feynman_kac_solve(p, times, xs, mc, reg);
          },
          py::arg("problem"), py::arg("times"), py::arg("xs"), py::arg("paths"), py::arg("steps"), py::arg("seed"),
          py::arg("regression") = RegressionSpec{}, py::arg("workers") = 1);
}
