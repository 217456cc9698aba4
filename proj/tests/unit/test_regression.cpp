#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "youngbsde/errors.hpp"
#include "youngbsde/regression.hpp"

using namespace ybsde;

TEST_SUITE("regression") {

TEST_CASE("basis sizes") {
    CHECK(basis_size(1, 0) == 1);
    CHECK(basis_size(1, 3) == 4);
    CHECK(basis_size(2, 2) == 6);
    CHECK(basis_size(3, 3) == 20);
}

TEST_CASE("constants and polynomials in the span are reproduced") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<double> x(2000);
    for (auto& v : x) v = n01(rng);
    const SliceRegression reg(x, 1, RegressionSpec{});
    std::vector<double> c(x.size(), 2.5), cubic(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) cubic[i] = 1.0 - x[i] + 0.5 * x[i] * x[i] * x[i];
    for (double v : reg.project(c)) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
    const auto fit = reg.project(cubic);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fit[i] == doctest::Approx(cubic[i]).epsilon(1e-6));
    CHECK(residual_rms(cubic, fit) < 1e-6);
}

TEST_CASE("projection preserves the sample mean") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    std::vector<double> x(1000), y(1000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = n01(rng);
        y[i] = std::exp(x[i]) + n01(rng);
    }
    const auto fit = SliceRegression(x, 1, RegressionSpec{}).project(y);
    double my = 0, mf = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        my += y[i];
        mf += fit[i];
    }
    CHECK(mf == doctest::Approx(my).epsilon(1e-12));
}

TEST_CASE("degenerate states fall back to the mean") {
    std::vector<double> x(100, 0.0), y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
    const SliceRegression reg(x, 1, RegressionSpec{});
    CHECK(reg.diagnostics().dropped_columns == 3);
    for (double v : reg.project(y)) CHECK(v == doctest::Approx(49.5));
}

TEST_CASE("basis guard against too few samples") {
    std::vector<double> x(30, 1.0);
    CHECK_THROWS_AS(SliceRegression(x, 1, RegressionSpec{}), ValidationError);
    RegressionSpec low;
    low.degree = 2;
    CHECK_NOTHROW(SliceRegression(x, 1, low));
}

TEST_CASE("nearly collinear features trigger the ridge fallback") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> x(400 * 2);
    for (std::size_t i = 0; i < 400; ++i) {
        x[2 * i] = n01(rng);
        x[2 * i + 1] = x[2 * i] + 1e-9 * n01(rng);
    }
    RegressionSpec spec;
    spec.degree = 2;
    const SliceRegression reg(x, 2, spec);
    CHECK(reg.diagnostics().condition_number > 1e12);
    CHECK(reg.diagnostics().ridge_fallback);
}

}
