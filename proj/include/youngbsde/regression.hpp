#pragma once

// Least-squares conditional expectations on a polynomial basis of the forward
// state (the regression step of least-squares Monte Carlo).

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace ybsde {

struct RegressionSpec {
    std::size_t degree = 3;       ///< total degree of the monomial basis
    double ridge = 1e-8;          ///< added to the diagonal of the normalised Gram matrix
    std::size_t samples_per_basis = 10;  ///< basis size must not exceed M / samples_per_basis
};

struct RegressionDiagnostics {
    double condition_number = 1.0;  ///< of the normalised Gram matrix, before ridge
    bool ridge_fallback = false;    ///< ridge raised because the Gram matrix was near singular
    std::size_t dropped_columns = 0;  ///< monomials with no spread across samples
};

/// Number of monomials of total degree <= degree in `dim` variables.
std::size_t basis_size(std::size_t dim, std::size_t degree);

/// Regression operator for one time slice. Monomials of the standardised state are
/// centred and scaled to unit RMS; the intercept is the sample mean and is never
/// penalised, so constants are reproduced to rounding error.
class SliceRegression {
public:
    /// `states` holds M rows of `dim` coordinates.
    SliceRegression(std::span<const double> states, std::size_t dim, const RegressionSpec& spec);

    std::size_t samples() const noexcept { return samples_; }
    const RegressionDiagnostics& diagnostics() const noexcept { return diag_; }

    /// Fitted conditional expectation of `target` at every sample.
    std::vector<double> project(std::span<const double> target) const;
    void project(std::span<const double> target, std::span<double> fitted) const;

private:
    std::size_t samples_;
    Eigen::MatrixXd features_;  // M x K, centred and scaled, constant column excluded
    Eigen::LDLT<Eigen::MatrixXd> solver_;
    RegressionDiagnostics diag_;
};

/// sqrt(mean((target - fitted)^2))
double residual_rms(std::span<const double> target, std::span<const double> fitted);

}  // namespace ybsde
