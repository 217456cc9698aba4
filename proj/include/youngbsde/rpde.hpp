#pragma once

// The semilinear PDE
//
//   d_t u + 1/2 sigma^2 u_xx + b u_x + f(t, u, sigma u_x) + g(u) d(eta)/dt = 0,   u(T, .) = h
//
// solved through its BSDE representation u(s, x) = Y^{s,x}_s (Monte Carlo) and, for
// scalar state and a piecewise-linear eta treated as smooth, by a theta-scheme.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "youngbsde/bsde.hpp"
#include "youngbsde/functions.hpp"
#include "youngbsde/montecarlo.hpp"
#include "youngbsde/paths.hpp"
#include "youngbsde/regression.hpp"

namespace ybsde {

struct PdeProblem {
    double horizon = 1.0;
    /// Forward coefficients; x0 and start_time are overwritten per (s, x).
    SdeSpec sde = affine_sde(0.0, 0.0, 1.0, 0.0, 0.0);
    std::size_t brownian_dim = 1;
    Driver driver = Driver::zero();
    std::vector<ScalarFunction> drift_fields{constant_function(0.0)};
    DiscretePath eta = DiscretePath::constant(TimeGrid::uniform(1.0, 1), std::vector<double>{0.0});
    /// Terminal function h with its sup bound; values are clamped at the bound.
    Terminal terminal = Terminal::constant(0.0);
    double terminal_lipschitz = 0.0;
};

struct PdeSolution {
    std::vector<double> times;
    std::vector<double> xs;
    std::vector<double> values;           ///< times x xs, row-major
    std::vector<double> standard_errors;  ///< same shape; zero for deterministic solvers
    std::string scheme;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    double at_index(std::size_t ti, std::size_t xi) const { return values[ti * xs.size() + xi]; }
    /// Value at a (t, x) that must coincide with solution nodes.
    double at(double t, double x) const;
    double standard_error_at(double t, double x) const;
};

struct MonteCarloSettings {
    std::size_t paths = 10000;
    std::size_t steps = 200;  ///< uniform simulation cells on [0, T]; output times are merged in
    std::uint64_t seed = 0;
    SolverOptions solver{};
};

/// u(s, x) = mean of Y^{s,x}_s over a Brownian ensemble shared by every (s, x).
/// Rows at t = T are h(x) exactly.
PdeSolution feynman_kac_solve(const PdeProblem& pde, std::span<const double> times, std::span<const double> xs,
                              const MonteCarloSettings& mc, const RegressionSpec& regression);

struct Probe {
    double t = 0.0;
    double x = 0.0;
};

/// u and its standard error at scattered probes, one BSDE solve per probe.
std::vector<std::pair<double, double>> feynman_kac_probes(const PdeProblem& pde, std::span<const Probe> probes,
                                                          const MonteCarloSettings& mc,
                                                          const RegressionSpec& regression);

struct FdSettings {
    std::size_t t_cells = 400;
    std::size_t x_cells = 400;
    /// Box [x_lo, x_hi]; use fd_box for the default half-width around the probe region.
    double x_lo = -6.0;
    double x_hi = 6.0;
    double theta = 1.0;
    std::size_t inner_iters = 3;
    /// Region whose values are reported; used for the boundary-influence flag.
    double probe_lo = 0.0;
    double probe_hi = 0.0;
};

/// [probe_lo - 6 sigma_max sqrt(T), probe_hi + 6 sigma_max sqrt(T)]
std::pair<double, double> fd_box(double probe_lo, double probe_hi, double sigma_max, double horizon);

/// Backward theta-scheme with central differences on a uniform grid. The linear
/// part is weighted by theta; f and g(u) d(eta) are evaluated at the current
/// iterate of the new time level, `inner_iters` times per step. Lateral nodes
/// follow u_b <- u_b + f(t, u_b, 0) dt + g(u_b) d(eta), which is u = h when f = g = 0.
PdeSolution fd_reference_solve(const PdeProblem& pde, const FdSettings& settings);

/// Heat-kernel mass 2 Phi^c(D / (sigma_max sqrt(T))) that can reach the probe region
/// from a boundary at distance D.
double boundary_influence(double distance, double sigma_max, double horizon);
inline constexpr double kBoundaryInfluenceLimit = 1e-6;

struct ConvergenceRow {
    std::size_t level = 0;
    double qvar_distance = 0.0;
    double cauchy_gap = 0.0;  ///< max over probes |u^n - u^{n+1}|; NaN on the last level
    double mc_gap = 0.0;      ///< max over probes |u^n - u_MC|
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::vector<double> mc_values;  ///< u at the probes from the rough-eta Monte-Carlo solve
    std::vector<double> mc_standard_errors;
    bool cauchy_strictly_decreasing = false;
};

/// fd solution per smoothed level, Monte Carlo with the rough eta (pde.eta) as the limit.
ConvergenceStudy rough_convergence_study(const PdeProblem& pde, std::span<const DiscretePath> eta_levels, double q,
                                         std::span<const Probe> probes, const FdSettings& fd,
                                         const MonteCarloSettings& mc, const RegressionSpec& regression);

inline const std::vector<std::string> kConvergenceHeader{"level", "qvar_distance", "cauchy_gap", "mc_gap"};

struct SpatialPair {
    double t = 0.0;
    double x = 0.0;
    double x_prime = 0.0;
};

struct TemporalPair {
    double t = 0.0;
    double t_later = 0.0;
    double x = 0.0;
};

struct ModulusProbes {
    std::vector<SpatialPair> spatial;
    std::vector<TemporalPair> temporal;
};

struct ModulusConstants {
    double spatial = 0.0;   ///< K in |u(s,x) - u(s,x')| <= K |x - x'|
    double temporal = 0.0;  ///< K' in |u(s+d,x) - u(s,x)| <= K' (d^{1/2} + d + ||eta||_{q;[s,s+d]})
};

/// Smallest constants consistent with the probes.
ModulusConstants fit_modulus(const PdeSolution& u, const DiscretePath& eta, double q, const ModulusProbes& probes);

struct ModulusReport {
    ModulusConstants observed;  ///< fitted on this solution
    bool spatial_ok = false;
    bool temporal_ok = false;
};

/// Checks the probes of `u` against constants fitted elsewhere (e.g. on another level).
ModulusReport modulus_check(const PdeSolution& u, const DiscretePath& eta, double q, const ModulusProbes& probes,
                            const ModulusConstants& constants);

struct BarrierBounds {
    DiscretePath lower;
    DiscretePath upper;
};

/// Backward Young ODEs started at -||h|| and +||h|| with dt-term f(t, y, 0); every
/// solution of the PDE lies between them.
BarrierBounds barrier_bounds(const PdeProblem& pde, std::size_t cells, std::size_t substeps = 4);

/// Max amount by which u leaves [lower, upper] over all its nodes (<= 0 means inside).
double barrier_excess(const PdeSolution& u, const BarrierBounds& bounds);

}  // namespace ybsde
