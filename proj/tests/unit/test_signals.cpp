#include <cmath>
#include <cstring>
#include <memory>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "youngbsde/errors.hpp"
#include "youngbsde/signals.hpp"

using namespace ybsde;

TEST_SUITE("signals") {

TEST_CASE("sinusoid total variation over one period") {
    const double amp = 0.7;
    const auto eta = generate_eta(EtaSpec{SinusoidSpec{{amp}, {1.0}, {0.4}}, 1, 1.0}, TimeGrid::uniform(1.0, 10000)).path;
    CHECK(std::fabs(pvar_norm(eta, 1.0) - 4 * amp) <= 1e-6);
}

TEST_CASE("generation is deterministic") {
    const auto grid = TimeGrid::uniform(1.0, 300);
    for (const EtaSpec& spec : {EtaSpec{RandomPlSpec{17, 0.5, 9}, 2, 1.0}, EtaSpec{FbmSpec{0.7, 3, 1.0}, 2, 1.0}}) {
        const auto a = generate_eta(spec, grid).path;
        const auto b = generate_eta(spec, grid).path;
        REQUIRE(a.values().size() == b.values().size());
        CHECK(std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(double)) == 0);
        CHECK(a.at(0, 0) == 0.0);
    }
}

TEST_CASE("spec validation") {
    const auto grid = TimeGrid::uniform(1.0, 10);
    CHECK_THROWS_AS(generate_eta(EtaSpec{FbmSpec{0.5, 1, 1.0}, 1, 1.0}, grid), ValidationError);
    CHECK_THROWS_AS(generate_eta(EtaSpec{FbmSpec{1.0, 1, 1.0}, 1, 1.0}, grid), ValidationError);
    CHECK_THROWS_AS(generate_eta(EtaSpec{FbmSpec{0.75, 1, 1.0}, 1, 1.0}, TimeGrid::uniform(1.0, kMaxFbmNodes)),
                    ValidationError);
    CHECK_THROWS_AS(generate_eta(EtaSpec{SinusoidSpec{{1.0}, {1.0}, {0.0}}, 1, 2.0}, grid), ValidationError);
    CHECK_THROWS_AS(generate_eta(EtaSpec{MollifiedSpec{nullptr, 1}, 1, 1.0}, grid), ValidationError);
}

TEST_CASE("mollifier half width") {
    CHECK(mollifier_half_width(1001, 0) == 500);
    CHECK(mollifier_half_width(1001, 1) == 125);
    CHECK(mollifier_half_width(1001, 2) == 31);
    CHECK(mollifier_half_width(1001, 5) == 0);
    const auto p = testing::uniform_path({0.0, 3.0, 0.0, 3.0, 0.0});
    const auto m = moving_average(p, 1);
    CHECK(m.at(0) == 0.0);
    CHECK(m.at(4) == 0.0);
    CHECK(m.at(1) == doctest::Approx(1.0));
    CHECK(m.at(2) == doctest::Approx(2.0));
}

TEST_CASE("mollified ladder of a random piecewise-linear base") {
    const auto grid = TimeGrid::uniform(1.0, 512);
    // Knots coarser than the level-0 window; with many more knots the first two
    // levels both flatten the path and their distances can tie within noise.
    auto base = std::make_shared<const EtaSpec>(EtaSpec{RandomPlSpec{11, 0.3, 5}, 1, 1.0});
    const auto eta = generate_eta(*base, grid).path;
    double prev = 1e300;
    double final_distance = 0.0;
    for (std::size_t k = 0; k <= 6; ++k) {
        const auto level = generate_eta(EtaSpec{MollifiedSpec{base, k}, 1, 1.0}, grid).path;
        const double d = var_distance(level, eta, 1.6);
        CHECK(d <= prev * (1 + 1e-12));
        prev = d;
        final_distance = d;
    }
    CHECK(final_distance == 0.0);
}

TEST_CASE("approximation sequences") {
    const auto grid = TimeGrid::uniform(1.0, 1000);
    SUBCASE("smooth eta") {
        const auto eta = generate_eta(EtaSpec{SinusoidSpec{{0.5}, {1.0}, {0.0}}, 1, 1.0}, grid).path;
        const auto levels = approximation_sequence(eta, 1.0, 4);
        const auto d = ladder_distances(levels, eta, 1.5);
        CHECK(d.back() < 1e-3);
    }
    SUBCASE("constant eta") {
        const auto eta = DiscretePath::constant(grid, std::vector<double>{0.3});
        const auto levels = approximation_sequence(eta, 1.2, 3);
        for (double d : ladder_distances(levels, eta, 1.5)) CHECK(d <= 1e-12);
    }
    SUBCASE("fbm ladder decreases strictly") {
        const auto eta = generate_eta(EtaSpec{FbmSpec{0.75, 2, 1.0}, 1, 1.0}, grid).path;
        const auto levels = approximation_sequence(eta, 1.4, 4);
        const auto d = ladder_distances(levels, eta, 1.5);
        for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] < d[k - 1]);
        double prev = 1e300;
        for (const auto& l : levels) {
            const double s = sup_norm(path_difference(l, eta));
            CHECK(s <= prev);
            prev = s;
        }
    }
    SUBCASE("coarse interpolation") {
        const auto eta = generate_eta(EtaSpec{FbmSpec{0.75, 2, 1.0}, 1, 1.0}, grid).path;
        const auto levels = approximation_sequence(eta, 1.4, 3, ApproximationKind::coarse_interpolation);
        const auto d = ladder_distances(levels, eta, 1.5);
        for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] < d[k - 1]);
    }
    CHECK_THROWS_AS(approximation_sequence(DiscretePath::constant(grid, std::vector<double>{0.0}), 2.0, 3),
                    ValidationError);
}

TEST_CASE("q-variation profiles") {
    const std::vector<double> exps{1.0, 1.34, 2.0};
    const auto line = testing::sampled([](double t) { return -2.0 * t; }, 64);
    for (const auto& row : qvar_profile(line, exps)) CHECK(row.pvar == doctest::Approx(2.0));
    const auto mono = testing::sampled([](double t) { return t * t * t; }, 64);
    for (const auto& row : qvar_profile(mono, exps)) CHECK(row.pvar == doctest::Approx(1.0));
    const auto eta = generate_eta(EtaSpec{FbmSpec{0.75, 8, 1.0}, 1, 1.0}, TimeGrid::uniform(1.0, 512)).path;
    const auto rows = qvar_profile(eta, exps);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].pvar <= rows[0].pvar);
    CHECK(rows[2].pvar <= rows[1].pvar);
    CHECK(rows[0].dyadic_sums.size() == 10);
}

TEST_CASE("fbm sample covariance matches the kernel") {
    const double hurst = 0.75;
    const auto grid = TimeGrid::uniform(1.0, 32);
    const std::size_t n = 2000;
    const std::pair<std::size_t, std::size_t> probes[] = {{32, 32}, {16, 32}, {8, 24}, {4, 4}, {1, 30}};
    std::vector<std::vector<double>> prods(std::size(probes));
    for (std::size_t s = 0; s < n; ++s) {
        const auto p = generate_eta(EtaSpec{FbmSpec{hurst, s, 1.0}, 1, 1.0}, grid).path;
        for (std::size_t k = 0; k < std::size(probes); ++k) prods[k].push_back(p.at(probes[k].first) * p.at(probes[k].second));
    }
    for (std::size_t k = 0; k < std::size(probes); ++k) {
        double mean = 0.0, sq = 0.0;
        for (double v : prods[k]) mean += v;
        mean /= n;
        for (double v : prods[k]) sq += (v - mean) * (v - mean);
        const double se = std::sqrt(sq / (n - 1) / n);
        const double exact = fbm_covariance(grid[probes[k].first], grid[probes[k].second], hurst);
        CHECK(std::fabs(mean - exact) <= 3.0 * se);
    }
}

}
