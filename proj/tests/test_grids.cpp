#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spalab/grids.hpp"

using namespace spalab;

namespace {

// stationary distribution by power iteration, independent of any solver code
std::vector<double> stationary(const MarkovChain& mc) {
    int n = mc.n();
    std::vector<double> pi(n, 1.0 / n), next(n);
    for (int it = 0; it < 200000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) next[j] += pi[i] * mc.p(i, j);
        double diff = 0.0;
        for (int j = 0; j < n; ++j) diff = std::max(diff, std::abs(next[j] - pi[j]));
        pi.swap(next);
        if (diff < 1e-15) break;
    }
    return pi;
}

} // namespace

TEST_CASE("grid spacing follows the curvature rule") {
    Grid g = build_grid(5, 0.0, 16.0, 2.0);
    REQUIRE(g.n() == 5);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g[2] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(g[3] == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(g[4] == 16.0);

    Grid lin = build_grid(3, -1.0, 1.0, 1.0);
    CHECK(lin[1] == doctest::Approx(0.0).epsilon(1e-15));

    for (int i = 1; i < g.n(); ++i) CHECK(g[i] > g[i - 1]);

    CHECK_THROWS_AS(build_grid(1, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(3, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(3, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("snap down has floor semantics") {
    Grid g = build_grid(4, 0.0, 9.0, 1.0); // {0, 3, 6, 9}
    CHECK(snap_down(g, 0.0) == 0);
    CHECK(snap_down(g, 2.999) == 0);
    CHECK(snap_down(g, 3.0) == 1);
    CHECK(snap_down(g, 8.999) == 2);
    CHECK(snap_down(g, 9.0) == 3);
    CHECK(snap_down(g, 50.0) == 3);
    CHECK_THROWS_AS(snap_down(g, -0.001), std::domain_error);
}

TEST_CASE("snap nearest ties go down and ends clamp") {
    Grid g = build_grid(4, 0.0, 9.0, 1.0);
    CHECK(snap_nearest(g, 1.4) == 0);
    CHECK(snap_nearest(g, 1.6) == 1);
    CHECK(snap_nearest(g, 1.5) == 0);
    CHECK(snap_nearest(g, -5.0) == 0);
    CHECK(snap_nearest(g, 99.0) == 3);
}

TEST_CASE("interpolation weights recover grid values") {
    Grid g = build_grid(6, 0.0, 100.0, 2.5);
    for (double x : {0.0, 3.7, 25.0, 99.0, 100.0}) {
        InterpWeight iw = interp_weight(g, x);
        double rec = iw.w * g[iw.i] + (1.0 - iw.w) * g[iw.i + 1];
        CHECK(rec == doctest::Approx(std::clamp(x, g.min(), g.max())).epsilon(1e-12));
        CHECK(iw.w >= 0.0);
        CHECK(iw.w <= 1.0);
    }
    CHECK(interp_weight(g, -1.0).w == 1.0);
    CHECK(interp_weight(g, 1e9).w == 0.0);
}

TEST_CASE("rouwenhorst two-state iid chain") {
    MarkovChain mc = discretize_ar1(0.0, 1.0, 1.0, 2);
    REQUIRE(mc.n() == 2);
    CHECK(mc.p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mc.p(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mc.p(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mc.nodes[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(mc.nodes[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rouwenhorst matches the AR(1) stationary moments") {
    for (double rho : {0.0, 0.5, 0.9, 0.977}) {
        for (int n : {2, 5, 9}) {
            double sigma = 0.1;
            MarkovChain mc = discretize_ar1(rho, sigma, 0.2, n);
            for (int i = 0; i < n; ++i) {
                double rowSum = 0.0;
                for (int j = 0; j < n; ++j) {
                    rowSum += mc.p(i, j);
                    CHECK(mc.p(i, j) >= 0.0);
                }
                CHECK(rowSum == doctest::Approx(1.0).epsilon(1e-12));
            }
            std::vector<double> pi = stationary(mc);
            double mean = 0.0, var = 0.0;
            for (int i = 0; i < n; ++i) mean += pi[i] * mc.nodes[i];
            for (int i = 0; i < n; ++i) var += pi[i] * (mc.nodes[i] - mean) * (mc.nodes[i] - mean);
            CHECK(std::abs(mean) < 1e-12);
            CHECK(var == doctest::Approx(sigma * sigma / (1.0 - rho * rho)).epsilon(1e-9));

            // conditional persistence: E[x'|x] = rho * x on every row
            for (int i = 0; i < n; ++i) {
                double ce = 0.0;
                for (int j = 0; j < n; ++j) ce += mc.p(i, j) * mc.nodes[j];
                CHECK(ce == doctest::Approx(rho * mc.nodes[i]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("initial distribution follows the first-period spread") {
    MarkovChain mc = discretize_ar1(0.9, 0.1, 0.05, 7);
    double tot = 0.0, var = 0.0;
    for (int i = 0; i < mc.n(); ++i) tot += mc.initial[i];
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < mc.n(); ++i) var += mc.initial[i] * mc.nodes[i] * mc.nodes[i];
    // a tight initial law concentrates mass near zero relative to the
    // stationary spread
    std::vector<double> pi = stationary(mc);
    double statVar = 0.0;
    for (int i = 0; i < mc.n(); ++i) statVar += pi[i] * mc.nodes[i] * mc.nodes[i];
    CHECK(var < statVar);

    MarkovChain point = discretize_ar1(0.9, 0.1, 0.0, 7);
    CHECK(point.initial[3] == 1.0);

    CHECK_THROWS_AS(discretize_ar1(1.0, 0.1, 0.1, 5), std::invalid_argument);
    CHECK_THROWS_AS(discretize_ar1(0.5, -0.1, 0.1, 5), std::invalid_argument);
    CHECK_THROWS_AS(discretize_ar1(0.5, 0.1, 0.1, 0), std::invalid_argument);

    MarkovChain single = discretize_ar1(0.5, 0.1, 0.1, 1);
    CHECK(single.nodes[0] == 0.0);
    CHECK(single.trans[0] == 1.0);
}
