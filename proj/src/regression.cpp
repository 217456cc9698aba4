#include "youngbsde/regression.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "youngbsde/errors.hpp"

namespace ybsde {

namespace {

// Exponent tuples of all non-constant monomials with total degree <= degree.
void enumerate(std::size_t dim, std::size_t degree, std::vector<std::size_t>& current, std::size_t used,
               std::vector<std::vector<std::size_t>>& out) {
    if (current.size() == dim) {
        if (used > 0) out.push_back(current);
        return;
    }
    for (std::size_t k = 0; used + k <= degree; ++k) {
        current.push_back(k);
        enumerate(dim, degree, current, used + k, out);
        current.pop_back();
    }
}

constexpr double kFallbackCondition = 1e12;
constexpr double kFallbackRidge = 1e-6;

}  // namespace

std::size_t basis_size(std::size_t dim, std::size_t degree) {
    // C(dim + degree, degree)
    double r = 1.0;
    for (std::size_t k = 1; k <= degree; ++k) r = r * static_cast<double>(dim + k) / static_cast<double>(k);
    return static_cast<std::size_t>(std::llround(r));
}

SliceRegression::SliceRegression(std::span<const double> states, std::size_t dim, const RegressionSpec& spec)
    : samples_(dim == 0 ? 0 : states.size() / dim) {
    if (dim == 0 || states.size() % dim != 0) throw ValidationError("regression states have an inconsistent shape");
    if (!(spec.ridge >= 0.0)) throw ValidationError("ridge parameter must be >= 0");
    const std::size_t k_total = basis_size(dim, spec.degree);
    if (spec.samples_per_basis > 0 && k_total * spec.samples_per_basis > samples_) {
        throw ValidationError("basis of " + std::to_string(k_total) + " functions is too large for " +
                              std::to_string(samples_) + " samples (limit M / " +
                              std::to_string(spec.samples_per_basis) + ")");
    }
    const auto m = static_cast<Eigen::Index>(samples_);
    const double inv_m = 1.0 / static_cast<double>(samples_);

    // Standardise the state coordinates.
    Eigen::MatrixXd z(m, static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < samples_; ++i) mean += states[i * dim + c];
        mean *= inv_m;
        double var = 0.0;
        for (std::size_t i = 0; i < samples_; ++i) {
            const double d = states[i * dim + c] - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var * inv_m);
        const double scale = (sd > 0.0) ? 1.0 / sd : 0.0;
        for (std::size_t i = 0; i < samples_; ++i) {
            z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = (states[i * dim + c] - mean) * scale;
        }
    }

    std::vector<std::vector<std::size_t>> powers;
    std::vector<std::size_t> cur;
    enumerate(dim, spec.degree, cur, 0, powers);

    std::vector<Eigen::VectorXd> cols;
    for (const auto& pw : powers) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(m);
        for (std::size_t c = 0; c < dim; ++c) {
            for (std::size_t k = 0; k < pw[c]; ++k) col.array() *= z.col(static_cast<Eigen::Index>(c)).array();
        }
        col.array() -= col.mean();
        const double rms = std::sqrt(col.squaredNorm() * inv_m);
        if (!(rms > 1e-10)) {
            ++diag_.dropped_columns;
            continue;
        }
        cols.push_back(col / rms);
    }

    features_.resize(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) features_.col(static_cast<Eigen::Index>(j)) = cols[j];
    if (cols.empty()) return;

    Eigen::MatrixXd gram = (features_.transpose() * features_) * inv_m;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    diag_.condition_number = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    double ridge = spec.ridge;
    if (diag_.condition_number > kFallbackCondition) {
        diag_.ridge_fallback = true;
        ridge = std::max(ridge, kFallbackRidge);
    }
    gram.diagonal().array() += ridge;
    solver_.compute(gram);
}

void SliceRegression::project(std::span<const double> target, std::span<double> fitted) const {
    if (target.size() != samples_ || fitted.size() != samples_) {
        throw ValidationError("regression target has " + std::to_string(target.size()) + " samples, expected " +
                              std::to_string(samples_));
    }
    const auto m = static_cast<Eigen::Index>(samples_);
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), m);
    const double mean = y.mean();
    Eigen::Map<Eigen::VectorXd> out(fitted.data(), m);
    if (features_.cols() == 0) {
        out.setConstant(mean);
        return;
    }
    const Eigen::VectorXd rhs = (features_.transpose() * (y.array() - mean).matrix()) / static_cast<double>(samples_);
    const Eigen::VectorXd beta = solver_.solve(rhs);
    out.noalias() = features_ * beta;
    out.array() += mean;
}

std::vector<double> SliceRegression::project(std::span<const double> target) const {
    std::vector<double> out(samples_);
    project(target, out);
    return out;
}

double residual_rms(std::span<const double> target, std::span<const double> fitted) {
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - fitted[i];
        s += d * d;
    }
    return target.empty() ? 0.0 : std::sqrt(s / static_cast<double>(target.size()));
}

}  // namespace ybsde
