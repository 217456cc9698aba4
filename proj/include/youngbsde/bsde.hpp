#pragma once

// Monte-Carlo solution of
//
//   Y_t = xi + int_t^T f(r, Y_r, Z_r) dr + int_t^T g(Y_r) d(eta_r) - int_t^T Z_r dW_r
//
// where the d(eta) integral is a pathwise Young integral against a deterministic
// path of finite q-variation, q < 2, plus the finite-sample diagnostics that go
// with it (B_p / BMO norm proxies, comparison, stability and Lipschitz studies).

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "youngbsde/functions.hpp"
#include "youngbsde/montecarlo.hpp"
#include "youngbsde/paths.hpp"
#include "youngbsde/regression.hpp"

namespace ybsde {

/// Generator f(t, y, z) with its Lipschitz constant C_f and sup_t |f(t, 0, 0)|.
struct Driver {
    std::function<double(double t, double y, std::span<const double> z)> fn;
    double lipschitz = 0.0;
    double zero_bound = 0.0;

    double operator()(double t, double y, std::span<const double> z) const { return fn(t, y, z); }

    static Driver zero();
    /// f = c + a_y y + a_z (z_1 + ... + z_d)
    static Driver affine(double c, double a_y, double a_z = 0.0, std::size_t brownian_dim = 1);
    /// f = c + a_y y + a_z (z_1 + ... + z_d) + k phi(y)
    static Driver with_term(double c, double a_y, double a_z, std::size_t brownian_dim, double k,
                            const ScalarFunction& phi);
};

/// Bounded terminal functional xi = clamp(h(X_T), -bound, bound).
struct Terminal {
    std::function<double(std::span<const double> x)> fn;
    double bound = 0.0;

    double operator()(std::span<const double> x) const;

    static Terminal constant(double c);
    /// h(x_1) for a scalar function of the first state coordinate.
    static Terminal of_first(const ScalarFunction& h, double bound);
};

struct BsdeProblem {
    double horizon = 1.0;
    Driver driver = Driver::zero();
    std::vector<ScalarFunction> drift_fields{constant_function(0.0)};  ///< g_1..g_e; needs d1_bound on each
    DiscretePath eta = DiscretePath::constant(TimeGrid::uniform(1.0, 1), std::vector<double>{0.0});
    Terminal terminal = Terminal::constant(0.0);
    /// Forward dynamics; empty means the state is the Brownian path itself.
    std::optional<SdeSpec> forward;
};

struct SolverOptions {
    std::size_t inner_iters = 3;  ///< fixed-point iterations per cell (backward scheme)
    unsigned workers = 1;
};

struct StepDiagnostics {
    double condition_number = 1.0;
    double residual_rms = 0.0;  ///< of the E_t[Y_{t+1}] regression
    bool ridge_fallback = false;
};

struct BsdeSolution {
    TimeGrid grid = TimeGrid::uniform(1.0, 1);
    std::size_t paths = 0;
    std::size_t brownian_dim = 1;
    std::size_t start_node = 0;
    std::vector<double> y;  ///< paths x nodes
    std::vector<double> z;  ///< paths x nodes x d; zero at the last node
    std::vector<StepDiagnostics> diagnostics;  ///< one per cell from start_node on
    std::vector<std::string> warnings;
    std::string scheme;

    /// Per-path start payload xi + sum f dt + sum g(Y) d(eta); its sample mean
    /// estimates Y at the start node.
    std::vector<double> payload;

    std::shared_ptr<const ForwardEnsemble> states;
    std::shared_ptr<const BrownianEnsemble> brownian;

    std::size_t nodes() const noexcept { return grid.size(); }
    double Y(std::size_t path, std::size_t node) const { return y[path * nodes() + node]; }
    double Z(std::size_t path, std::size_t node, std::size_t coord = 0) const {
        return z[(path * nodes() + node) * brownian_dim + coord];
    }
    std::span<const double> y_path(std::size_t path) const { return {y.data() + path * nodes(), nodes()}; }

    /// Mean of Y over paths at the start node.
    double y0() const;
    /// Sample standard deviation of the payload divided by sqrt(M).
    double y0_standard_error() const;
};

/// Backward induction: per cell, Z_i = E_i[(Y_{i+1} - E_i Y_{i+1}) dW_i] / dt_i and
/// Y_i solves Y = E_i[Y_{i+1}] + f(t_i, Y, Z_i) dt_i + g(Y) d(eta_i) by `inner_iters`
/// fixed-point iterations started at E_i[Y_{i+1}]. Cells with
/// C_f dt + sum sup|Dg_j| |d(eta_j)| >= 1 are refused.
BsdeSolution solve_backward(const BsdeProblem& problem, std::shared_ptr<const BrownianEnsemble> ensemble,
                            const RegressionSpec& regression, const SolverOptions& options = {});

struct PicardResult {
    BsdeSolution solution;
    /// sup over slices of the RMS over paths of Y^{(k+1)} - Y^{(k)}, one per sweep.
    std::vector<double> sweep_differences;
    /// sweep_differences[k+1] / sweep_differences[k]
    std::vector<double> contraction_ratios;
};

/// Iterates the global map (Y, Z) -> (Y~, Z~) starting from (0, 0):
/// Y~_i = E_i[xi + sum_{j>=i} f(t_j, Y_j, Z_j) dt_j + sum_{j>=i} g(Y_j) d(eta_j)] and
/// Z~_i = E_i[(Y~_{i+1} - Y~_i) dW_i] / dt_i.
PicardResult solve_picard(const BsdeProblem& problem, std::shared_ptr<const BrownianEnsemble> ensemble,
                          const RegressionSpec& regression, std::size_t sweeps, const SolverOptions& options = {});

/// Finite-sample proxy for the B_p norm: max over grid times of
/// sqrt(max over samples of the fitted E_t[||Y||^2_{p-var;[t,T]}], floored at 0)
/// plus max over samples of |Y_T|. Biased; not a consistent estimator of the esssup.
double bp_norm_estimate(const BsdeSolution& solution, double p, const RegressionSpec& conditioning);

/// Per grid time from the start node on: max over samples of the fitted E_t[sum_{r>=t} |Z_r|^2 dt_r].
std::vector<double> bmo_profile(const BsdeSolution& solution, const RegressionSpec& conditioning);
/// max of bmo_profile.
double bmo_norm_estimate(const BsdeSolution& solution, const RegressionSpec& conditioning);

struct ComparisonReport {
    double violation_fraction = 0.0;  ///< share of (path, time) pairs with Y1 > Y2 + epsilon
    double max_violation = 0.0;       ///< max of Y1 - Y2 over all pairs
    double epsilon = 0.0;
    double pooled_standard_error = 0.0;
    double y0_first = 0.0;
    double y0_second = 0.0;
};

/// epsilon = absolute + standard_errors * sqrt(se1^2 + se2^2)
struct ComparisonTolerance {
    double absolute = 0.0;
    double standard_errors = 0.0;
};

/// Solves both problems on the shared ensemble. The caller asserts xi1 <= xi2,
/// f1 <= f2, and identical g and eta.
ComparisonReport comparison_check(const BsdeProblem& first, const BsdeProblem& second,
                                  std::shared_ptr<const BrownianEnsemble> ensemble, const RegressionSpec& regression,
                                  ComparisonTolerance tolerance, const SolverOptions& options = {});

struct StabilityRow {
    double qvar_distance = 0.0;  ///< var_distance(eta^n, eta, q)
    double y0_gap = 0.0;         ///< |Y^n_0 - Y_0|
    double y0_gap_standard_error = 0.0;
    double bp_gap = 0.0;  ///< bp_norm_estimate(Y^n - Y)
};

struct StabilityTable {
    std::vector<StabilityRow> rows;
    double y0_limit = 0.0;
    /// y0_gap[n+1] <= y0_gap[n] + 2 * se[n+1] for every n.
    bool gaps_non_increasing = false;
};

struct StabilityOptions {
    double q = 1.5;          ///< variation exponent of eta used for the distance column
    double bp_exponent = 2.5;  ///< p > 2 with 1/p + 1/q > 1
    SolverOptions solver{};
};

/// Solves with problem.eta (the limit) and with every eta^n on common randomness.
StabilityTable stability_in_eta(const BsdeProblem& problem, std::span<const DiscretePath> etas,
                                std::shared_ptr<const BrownianEnsemble> ensemble, const RegressionSpec& regression,
                                const StabilityOptions& options = {});

struct LipschitzReport {
    double numerator = 0.0;    ///< |Y_0 - Y'_0|
    double denominator = 0.0;  ///< E[|xi - xi'|^2]^{1/2}
    double ratio = 0.0;        ///< 0 when both are 0
    double ratio_standard_error = 0.0;
    bool inconsistent = false;  ///< zero denominator with non-zero numerator
};

/// Solutions for terminal values xi and xi' with everything else shared.
/// Both declared terminal bounds must not exceed `bound`.
LipschitzReport lipschitz_in_xi(const BsdeProblem& problem, const Terminal& xi, const Terminal& xi_prime,
                                double bound, std::shared_ptr<const BrownianEnsemble> ensemble,
                                const RegressionSpec& regression, const SolverOptions& options = {});

struct BdgReport {
    double lhs = 0.0;  ///< mean over paths of ||int Z dW||^2_{p-var}
    double rhs = 0.0;  ///< mean over paths of sum |Z|^2 dt
    double fitted_constant = 0.0;  ///< lhs / rhs, 0 when rhs is 0
};

/// Statistical sanity check of the p-variation BDG inequality; reported only.
BdgReport bdg_diagnostic(const BsdeSolution& solution, double p);

/// Solution with Y replaced by a - b (same states); Z likewise.
BsdeSolution solution_difference(const BsdeSolution& a, const BsdeSolution& b);

}  // namespace ybsde
