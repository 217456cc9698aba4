#pragma once

// Young integration against paths of finite q-variation, Young ODEs, and the
// variation inequalities the BSDE analysis leans on.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "youngbsde/functions.hpp"
#include "youngbsde/paths.hpp"

namespace ybsde {

enum class IntegrationMode {
    exact_pl,    ///< trapezoid per cell: exact when both paths are piecewise linear
    left_point,  ///< Riemann sums X_u (Y_v - Y_u) on a refined grid
};

struct VariationExponents {
    double p;  ///< exponent for the integrand X
    double q;  ///< exponent for the integrator Y
};

struct YoungIntegralResult {
    /// t -> int_0^t X dY on the union grid of X and Y; starts at 0.
    DiscretePath integral_path;
    /// Filled when exponents are supplied.
    std::optional<double> qvar_of_integral;
    std::optional<double> bound_rhs;
};

/// X is scalar (dim 1) or a row-major k x e matrix path (dim k*e) against an
/// e-dimensional Y; the result has dimension e for scalar X and k otherwise.
YoungIntegralResult young_integral(const DiscretePath& x, const DiscretePath& y,
                                   IntegrationMode mode = IntegrationMode::exact_pl, std::size_t refinement = 1,
                                   std::optional<VariationExponents> exponents = std::nullopt);

/// (1 - 2^{1 - theta})^{-1} with theta = 1/p + 1/q; requires theta > 1.
double young_constant(double p, double q);

struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
};

/// lhs = q-variation of the indefinite integral,
/// rhs = C(p,q) (|X_0| + ||X||_p) ||Y||_q.
InequalityReport young_bound_report(const DiscretePath& x, const DiscretePath& y, double p, double q);

/// ||ab||_p  <=  ||a||_p sup|b| + sup|a| ||b||_p  for scalar paths.
InequalityReport product_lemma_check(const DiscretePath& a, const DiscretePath& b, double p);

/// ||g(a) - g(a')||_p  <=  c [ ||a - a'||_p + (||a||_p + ||a'||_p) sup|a - a'| ],
/// c = max(sup|Dg|, sup|D^2 g|). Both derivative bounds must be present on g.
InequalityReport composition_lemma_check(const ScalarFunction& g, const DiscretePath& a, const DiscretePath& a_prime,
                                         double p);

enum class OdeDirection { forward, backward };

struct OdeSpec {
    /// Initial value (forward) or terminal value (backward).
    double y0 = 0.0;
    /// One field per channel of the driver.
    std::vector<ScalarFunction> fields;
    DiscretePath driver;
    OdeDirection direction = OdeDirection::forward;
    /// Optional dt term h(t, y), integrated alongside the d(eta) term.
    std::function<double(double, double)> time_drift;
};

struct OdeResult {
    DiscretePath path;                  ///< solution at the driver's nodes
    double richardson_discrepancy = 0;  ///< max node gap between `substeps` and 2*`substeps` runs
};

/// Explicit Euler y <- y + sum_i g_i(y) d(eta^i) (+ h dt) with every driver cell split
/// into `substeps` pieces. The backward direction solves
/// y_t = y_T + int_t^T g(y) d(eta) (+ int_t^T h dt) by stepping from T down to 0.
OdeResult ode_solve(const OdeSpec& spec, std::size_t substeps);

/// Euler solution only, without the Richardson companion run.
DiscretePath ode_euler(const OdeSpec& spec, std::size_t substeps);

}  // namespace ybsde
