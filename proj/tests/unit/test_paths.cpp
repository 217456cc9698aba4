#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "youngbsde/errors.hpp"
#include "youngbsde/paths.hpp"

using namespace ybsde;
using testing::uniform_path;

TEST_SUITE("paths") {

TEST_CASE("time grid validation and merging") {
    CHECK_THROWS_AS(TimeGrid({0.0}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), ValidationError);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5}), ValidationError);
    const auto g = TimeGrid::uniform(2.0, 4);
    CHECK(g.size() == 5);
    CHECK(g.mesh() == doctest::Approx(0.5));
    CHECK(g.cell_of(1.2) == 2);
    CHECK(g.cell_of(2.0) == 3);
    CHECK(g.find_node(1.5) == 3);
    CHECK(g.find_node(1.4) == g.size());
    const auto m = TimeGrid::merge(g, TimeGrid({0.0, 0.7, 2.0}));
    CHECK(m.size() == 6);
    CHECK(m[2] == doctest::Approx(0.7));
    CHECK(g.refined(3).size() == 13);
}

TEST_CASE("path evaluation interpolates linearly") {
    const auto p = uniform_path({0.0, 2.0, -2.0});
    CHECK(p.evaluate(0.25)[0] == doctest::Approx(1.0));
    CHECK(p.evaluate(0.75)[0] == doctest::Approx(0.0));
    CHECK(p.evaluate(5.0)[0] == doctest::Approx(-2.0));
    CHECK_THROWS_AS(DiscretePath(TimeGrid::uniform(1.0, 2), {1.0, 2.0}), ValidationError);
    const auto r = p.resample(TimeGrid::uniform(1.0, 4));
    CHECK(r.at(1) == doctest::Approx(1.0));
}

TEST_CASE("pvar_norm examples") {
    CHECK(pvar_norm(uniform_path({0.0, 0.5, 1.0}), 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pvar_norm(uniform_path({0.0, 1.0, 0.0, 1.0}), 1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(pvar_norm(uniform_path({0.0, 1.0, 0.0}), 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("pvar_norm rejects bad input") {
    const auto p = uniform_path({0.0, 1.0, 0.0});
    CHECK_THROWS_AS(pvar_norm(p, 0.5), ValidationError);
    CHECK_THROWS_AS(pvar_norm(p, 2.0, Window{2, 1}), ValidationError);
    CHECK_THROWS_AS(pvar_norm(p, 2.0, Window{0, 3}), ValidationError);
    CHECK(pvar_norm(p, 2.0, Window{1, 1}) == 0.0);
}

TEST_CASE("sup_norm examples") {
    CHECK(sup_norm(uniform_path({0.0, -2.0, 1.0})) == 2.0);
    CHECK(sup_norm(uniform_path({-3.5, -3.5})) == 3.5);
    const DiscretePath planar(TimeGrid::uniform(1.0, 1), {3.0, 0.0, 0.0, 4.0}, 2);
    CHECK(sup_norm(planar) == doctest::Approx(4.0));
    CHECK(pvar_norm(planar, 1.0) == doctest::Approx(5.0));
}

TEST_CASE("var_distance examples") {
    const auto a = testing::sampled([](double t) { return t; }, 100);
    const auto b = testing::sampled([](double t) { return t * t; }, 100);
    CHECK(var_distance(a, a, 1.5) == 0.0);
    CHECK(var_distance(uniform_path({0.0, 1.0}), uniform_path({0.0, 0.0}), 1.0) == doctest::Approx(1.0));

    // t - t^2 rises to 1/4 at t = 1/2 and falls back, so the 2-variation is sqrt(2/16).
    const double dp = var_distance(a, b, 2.0);
    CHECK(dp == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
    const auto diff = path_difference(a, b);
    const std::vector<std::size_t> sub{0, 10, 25, 50, 60, 75, 90, 100};
    std::vector<double> t, v;
    for (auto i : sub) {
        t.push_back(diff.grid()[i]);
        v.push_back(diff.at(i));
    }
    const DiscretePath coarse{TimeGrid(t), v};
    CHECK(std::fabs(brute_force_pvar(coarse, 2.0, coarse.full_window()) - dp) <= 1e-9);

    const DiscretePath planar(TimeGrid::uniform(1.0, 1), {0.0, 0.0, 1.0, 1.0}, 2);
    CHECK_THROWS_AS(var_distance(planar, a, 1.0), ValidationError);
}

TEST_CASE("brute force oracle examples") {
    CHECK(brute_force_pvar(uniform_path({0.0, 0.3, 0.4, 1.2}), 1.5, Window{0, 3}) == doctest::Approx(1.2));
    CHECK(brute_force_pvar(uniform_path({0.0, 1.0, 0.0}), 2.0, Window{0, 2}) == doctest::Approx(std::sqrt(2.0)));
    std::mt19937_64 rng(4);
    const auto p = testing::random_walk(rng, 10);
    CHECK(testing::rel_gap(brute_force_pvar(p, 3.0, p.full_window()), pvar_norm(p, 3.0)) <= 1e-12);
    CHECK_THROWS_AS(brute_force_pvar(testing::random_walk(rng, 15), 2.0, Window{0, 14}), ValidationError);
}

TEST_CASE("DP matches enumeration on every window") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 60; ++k) {
        const auto p = testing::random_walk(rng, 2 + k % 11);
        for (double e : {1.0, 1.3, 2.0, 3.7}) {
            for (std::size_t a = 0; a < p.size(); ++a) {
                for (std::size_t b = a; b < p.size(); ++b) {
                    const Window w{a, b};
                    CHECK(testing::rel_gap(pvar_norm(p, e, w), brute_force_pvar(p, e, w)) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("variation norm properties on random paths") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(1.0, 4.0);
    for (int k = 0; k < 200; ++k) {
        const auto x = testing::random_walk(rng, 3 + k % 30);
        const Window w = x.full_window();
        double q = u(rng), p = u(rng);
        if (q > p) std::swap(p, q);
        // Monotone in the exponent.
        CHECK(pvar_norm(x, p) <= pvar_norm(x, q) * (1 + 1e-12));
        // Endpoint bound.
        CHECK(sup_norm(x) <= std::fabs(x.at(w.last)) + pvar_norm(x, p) + 1e-12);
        // Superadditivity at an interior node.
        const std::size_t mid = x.size() / 2;
        const double left = std::pow(pvar_norm(x, p, Window{0, mid}), p);
        const double right = std::pow(pvar_norm(x, p, Window{mid, w.last}), p);
        CHECK(left + right <= std::pow(pvar_norm(x, p), p) * (1 + 1e-12));
        // Homogeneity.
        CHECK(testing::rel_gap(pvar_norm(x.scaled(-2.5), p), 2.5 * pvar_norm(x, p)) <= 1e-12);
    }
}

TEST_CASE("suffix powers agree with windowed norms") {
    std::mt19937_64 rng(13);
    const auto x = testing::random_walk(rng, 40);
    const std::vector<double> v(x.values().begin(), x.values().end());
    const auto s = suffix_pvar_powers(v, 2.5);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(std::pow(s[i], 1.0 / 2.5) ==
              doctest::Approx(pvar_norm(x, 2.5, Window{i, v.size() - 1})).epsilon(1e-12));
    }
}

TEST_CASE("oversized windows are refused") {
    std::vector<double> v(kMaxVariationWindow + 1, 0.0);
    const auto p = uniform_path(v);
    CHECK_THROWS_AS(pvar_norm(p, 2.0), ValidationError);
}

}
