#include "youngbsde/young.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "youngbsde/errors.hpp"

namespace ybsde {

namespace {

std::size_t result_dim(const DiscretePath& x, const DiscretePath& y) {
    if (x.dim() == 1) return y.dim();
    if (x.dim() % y.dim() != 0) {
        throw ValidationError("integrand of dimension " + std::to_string(x.dim()) +
                              " does not compose with an integrator of dimension " + std::to_string(y.dim()));
    }
    return x.dim() / y.dim();
}

// out += A * dy, where A is scalar or a row-major k x e matrix.
void accumulate(std::span<const double> a, std::span<const double> dy, double weight, std::span<double> out) {
    if (a.size() == 1) {
        for (std::size_t c = 0; c < dy.size(); ++c) out[c] += weight * a[0] * dy[c];
        return;
    }
    const std::size_t e = dy.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < e; ++c) s += a[r * e + c] * dy[c];
        out[r] += weight * s;
    }
}

double euclid(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

DiscretePath scalar_map(const DiscretePath& a, const std::function<double(double)>& fn) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = fn(a.at(i));
    return DiscretePath(a.grid(), std::move(v));
}

void require_scalar(const DiscretePath& a, const char* what) {
    if (a.dim() != 1) throw ValidationError(std::string(what) + " expects scalar paths");
}

}  // namespace

YoungIntegralResult young_integral(const DiscretePath& x, const DiscretePath& y, IntegrationMode mode,
                                   std::size_t refinement, std::optional<VariationExponents> exponents) {
    const std::size_t out_dim = result_dim(x, y);
    if (refinement == 0) throw ValidationError("refinement must be >= 1");
    const TimeGrid grid = TimeGrid::merge(x.grid(), y.grid());

    std::vector<double> values(grid.size() * out_dim, 0.0);
    std::vector<double> acc(out_dim, 0.0);
    std::vector<double> mid(x.dim());
    std::vector<double> dy(y.dim());

    if (mode == IntegrationMode::exact_pl) {
        const DiscretePath xs = x.resample(grid);
        const DiscretePath ys = y.resample(grid);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            for (std::size_t c = 0; c < x.dim(); ++c) mid[c] = 0.5 * (xs.at(i, c) + xs.at(i + 1, c));
            for (std::size_t c = 0; c < y.dim(); ++c) dy[c] = ys.at(i + 1, c) - ys.at(i, c);
            accumulate(mid, dy, 1.0, acc);
            std::copy(acc.begin(), acc.end(), values.begin() + static_cast<std::ptrdiff_t>((i + 1) * out_dim));
        }
    } else {
        const TimeGrid fine = grid.refined(refinement);
        const DiscretePath xs = x.resample(fine);
        const DiscretePath ys = y.resample(fine);
        for (std::size_t k = 0; k + 1 < fine.size(); ++k) {
            for (std::size_t c = 0; c < y.dim(); ++c) dy[c] = ys.at(k + 1, c) - ys.at(k, c);
            accumulate(xs.node(k), dy, 1.0, acc);
            if ((k + 1) % refinement == 0) {
                const std::size_t node = (k + 1) / refinement;
                std::copy(acc.begin(), acc.end(), values.begin() + static_cast<std::ptrdiff_t>(node * out_dim));
            }
        }
    }

    YoungIntegralResult result{DiscretePath(grid, std::move(values), out_dim), std::nullopt, std::nullopt};
    if (exponents) {
        const double c = young_constant(exponents->p, exponents->q);
        result.qvar_of_integral = pvar_norm(result.integral_path, exponents->q);
        result.bound_rhs = c * (euclid(x.node(0)) + pvar_norm(x, exponents->p)) * pvar_norm(y, exponents->q);
    }
    return result;
}

double young_constant(double p, double q) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw ValidationError("variation exponents must be >= 1");
    const double theta = 1.0 / p + 1.0 / q;
    if (!(theta > 1.0)) {
        throw ValidationError("Young integration needs 1/p + 1/q > 1, got " + std::to_string(theta));
    }
    return 1.0 / (1.0 - std::pow(2.0, 1.0 - theta));
}

InequalityReport young_bound_report(const DiscretePath& x, const DiscretePath& y, double p, double q) {
    young_constant(p, q);
    const auto r = young_integral(x, y, IntegrationMode::exact_pl, 1, VariationExponents{p, q});
    return {*r.qvar_of_integral, *r.bound_rhs, *r.qvar_of_integral <= *r.bound_rhs};
}

InequalityReport product_lemma_check(const DiscretePath& a, const DiscretePath& b, double p) {
    require_scalar(a, "product_lemma_check");
    require_scalar(b, "product_lemma_check");
    const TimeGrid grid = TimeGrid::merge(a.grid(), b.grid());
    const DiscretePath ra = a.resample(grid);
    const DiscretePath rb = b.resample(grid);
    std::vector<double> prod(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) prod[i] = ra.at(i) * rb.at(i);
    const double lhs = pvar_norm(DiscretePath(grid, std::move(prod)), p);
    const double rhs = pvar_norm(ra, p) * sup_norm(rb) + sup_norm(ra) * pvar_norm(rb, p);
    return {lhs, rhs, lhs <= rhs};
}

InequalityReport composition_lemma_check(const ScalarFunction& g, const DiscretePath& a, const DiscretePath& a_prime,
                                         double p) {
    require_scalar(a, "composition_lemma_check");
    require_scalar(a_prime, "composition_lemma_check");
    if (!g.d1_bound || !g.d2_bound) {
        throw ValidationError("composition_lemma_check needs both derivative bounds of g");
    }
    const TimeGrid grid = TimeGrid::merge(a.grid(), a_prime.grid());
    const DiscretePath ra = a.resample(grid);
    const DiscretePath rb = a_prime.resample(grid);
    const DiscretePath ga = scalar_map(ra, g.value);
    const DiscretePath gb = scalar_map(rb, g.value);
    const DiscretePath diff = path_difference(ra, rb);

    const double c = std::max(*g.d1_bound, *g.d2_bound);
    const double lhs = pvar_norm(path_difference(ga, gb), p);
    const double rhs = c * (pvar_norm(diff, p) + (pvar_norm(ra, p) + pvar_norm(rb, p)) * sup_norm(diff));
    return {lhs, rhs, lhs <= rhs};
}

DiscretePath ode_euler(const OdeSpec& spec, std::size_t substeps) {
    if (substeps == 0) throw ValidationError("substeps must be >= 1");
    const DiscretePath& eta = spec.driver;
    if (spec.fields.size() != eta.dim()) {
        throw ValidationError("ODE has " + std::to_string(spec.fields.size()) + " fields for a driver of dimension " +
                              std::to_string(eta.dim()));
    }
    const TimeGrid& grid = eta.grid();
    const std::size_t n = grid.size();
    const std::size_t e = eta.dim();
    const double inv = 1.0 / static_cast<double>(substeps);

    std::vector<double> out(n);
    std::vector<double> d_eta(e);
    double y = spec.y0;

    auto step = [&](double t, double dt_signed) {
        double incr = 0.0;
        for (std::size_t c = 0; c < e; ++c) incr += spec.fields[c](y) * d_eta[c];
        if (spec.time_drift) incr += spec.time_drift(t, y) * dt_signed;
        y += incr;
    };

    if (spec.direction == OdeDirection::forward) {
        out[0] = y;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t c = 0; c < e; ++c) d_eta[c] = (eta.at(i + 1, c) - eta.at(i, c)) * inv;
            const double h = grid.step(i) * inv;
            for (std::size_t k = 0; k < substeps; ++k) step(grid[i] + static_cast<double>(k) * h, h);
            if (!std::isfinite(y)) {
                throw NumericalError("Young ODE state became non-finite in cell " + std::to_string(i), i);
            }
            out[i + 1] = y;
        }
    } else {
        // Terminal-value form: moving from t+h down to t adds g(y) (eta_{t+h} - eta_t) + h(t+h, y) h.
        out[n - 1] = y;
        for (std::size_t i = n - 1; i-- > 0;) {
            for (std::size_t c = 0; c < e; ++c) d_eta[c] = (eta.at(i + 1, c) - eta.at(i, c)) * inv;
            const double h = grid.step(i) * inv;
            for (std::size_t k = substeps; k-- > 0;) step(grid[i] + static_cast<double>(k + 1) * h, h);
            if (!std::isfinite(y)) {
                throw NumericalError("Young ODE state became non-finite in cell " + std::to_string(i), i);
            }
            out[i] = y;
        }
    }
    return DiscretePath(grid, std::move(out));
}

OdeResult ode_solve(const OdeSpec& spec, std::size_t substeps) {
    DiscretePath coarse = ode_euler(spec, substeps);
    const DiscretePath fine = ode_euler(spec, 2 * substeps);
    double gap = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) gap = std::max(gap, std::fabs(coarse.at(i) - fine.at(i)));
    return {std::move(coarse), gap};
}

}  // namespace ybsde
