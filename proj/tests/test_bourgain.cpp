#include <catch2/catch_amalgamated.hpp>

#include "benney/bourgain.hpp"

#include <cmath>
#include <random>

using namespace benney;

TEST_CASE("norm of the zero and one-cell symbols", "[bourgain]") {
    SymbolGrid g(16, 16.0 * 16.0 + 64.0, 0.25);

    SECTION("zero symbol") {
        g.add_row(3, -9.0, 8); // zeros
        CHECK(norm(g, {1.0, 0.5, NormFlavor::X_sb}) == 0.0);
    }

    SECTION("indicator on the parabola: (1+N)^r scaling, constant in N") {
        const double r = 0.8;
        for (double b : {-0.5, 0.0, 0.5}) {
            double c8 = 0.0, c64 = 0.0;
            for (int N : {8, 64}) {
                SymbolGrid gg(2 * N, 4.0 * N * N + 64.0, 0.25);
                gg.rows.push_back(chi_row_parabola(gg, N));
                const double v = norm(gg, {r, b, NormFlavor::X_sb});
                // hand-checkable quadrature: sum over the 9 cells of width 1/4
                double cell = 0.0;
                for (int j = 0; j <= 8; ++j)
                    cell += std::pow(1.0 + std::abs(-1.0 + 0.25 * j), 2.0 * b) * 0.25;
                CHECK(v == Catch::Approx(std::pow(1.0 + N, r) * std::sqrt(cell)).epsilon(1e-12));
                (N == 8 ? c8 : c64) = v / std::pow(1.0 + N, r);
            }
            CHECK(c8 == Catch::Approx(c64).epsilon(1e-12)); // b-dependent but N-independent
        }
    }

    SECTION("homogeneity") {
        auto row = chi_row_parabola(g, 5);
        SymbolGrid g1(16, g.tau_max, 0.25), g3(16, g.tau_max, 0.25);
        g1.rows.push_back(row);
        for (auto& v : row.vals) v *= 3.0;
        g3.rows.push_back(row);
        const NormRequest req{0.7, 0.5, NormFlavor::X_sb};
        CHECK(norm(g3, req) == Catch::Approx(3.0 * norm(g1, req)).epsilon(1e-13));
    }
}

TEST_CASE("norm monotonicity in r and b", "[bourgain]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        SymbolGrid g(8, 8.0 * 8.0 + 64.0, 0.25);
        for (int n = -5; n <= 5; n += 2) {
            auto& row = g.add_row(n, -static_cast<double>(n) * n - 1.5, 13);
            for (auto& v : row.vals) v = mag(rng); // nonnegative symbol
        }
        const double n00 = norm(g, {0.3, 0.1, NormFlavor::X_sb});
        CHECK(norm(g, {0.8, 0.1, NormFlavor::X_sb}) >= n00);
        CHECK(norm(g, {0.3, 0.6, NormFlavor::X_sb}) >= n00);
    }
}

TEST_CASE("modified norms add the l2n-L1tau term", "[bourgain]") {
    SymbolGrid g(8, 128.0, 0.25);
    g.rows.push_back(chi_row_parabola(g, 4));
    const double base = norm(g, {0.5, 0.5, NormFlavor::X_sb});
    const double mod = norm(g, {0.5, 0.5, NormFlavor::X_mod});
    // l1 term of the indicator: (1+4)^r * (9 cells * 1/4)
    CHECK(mod == Catch::Approx(base + std::pow(5.0, 0.5) * 2.25).epsilon(1e-12));
    const double ymod = norm(g, {0.5, 0.5, NormFlavor::Y_mod});
    CHECK(ymod > norm(g, {0.5, 0.5, NormFlavor::Hb_Hs}));
}

TEST_CASE("truncation warning near the tau boundary", "[bourgain]") {
    SymbolGrid g(4, 8.0, 0.5);
    auto& row = g.add_row(0, 6.0, 5); // reaches tau = 8 = tau_max
    for (auto& v : row.vals) v = 1.0;
    NormDiagnostics diag;
    norm(g, {0.0, 0.5, NormFlavor::Hb_Hs}, &diag);
    CHECK(diag.truncation_warning);

    SymbolGrid g2(4, 8.0, 0.5);
    auto& row2 = g2.add_row(0, -1.0, 5);
    for (auto& v : row2.vals) v = 1.0;
    norm(g2, {0.0, 0.5, NormFlavor::Hb_Hs}, &diag);
    CHECK_FALSE(diag.truncation_warning);
}

namespace {
std::vector<int> pow2_list(int lo, int hi) {
    std::vector<int> out;
    for (int p = lo; p <= hi; ++p) out.push_back(1 << p);
    return out;
}
} // namespace

TEST_CASE("uv necessity sweep reproduces the stated exponents", "[bourgain]") {
    const double r = 0.75, s = 0.5;
    const auto res = necessity_sweep_uv(pow2_list(4, 10), r, s, 0.5, 0.5);

    CHECK(std::abs(res.pair1.slope_product - r) < 0.1);
    CHECK(std::abs(res.pair1.slope_u - r) < 0.1);
    CHECK(std::abs(res.pair1.slope_v - s) < 0.1);

    CHECK(std::abs(res.pair2.slope_product - (r - 1.0)) < 0.1);
    CHECK(std::abs(res.pair2.slope_u - 0.0) < 0.1);
    CHECK(std::abs(res.pair2.slope_v - s) < 0.1);
}

TEST_CASE("uv sweep at the boundary r = s = 0", "[bourgain]") {
    const auto res = necessity_sweep_uv(pow2_list(4, 10), 0.0, 0.0, 0.5, 0.5);
    // ratio ||uv|| / (||u|| ||v||) ~ N^0 at the s >= 0 boundary
    const double ratio_slope = res.pair1.slope_product - res.pair1.slope_u - res.pair1.slope_v;
    CHECK(std::abs(ratio_slope) < 0.05);
}

TEST_CASE("derivative necessity sweep reproduces the stated exponents", "[bourgain]") {
    const double r = 0.75, s = 0.5; // s = 2r - 1: the equality edge
    const auto res = necessity_sweep_derivative(pow2_list(4, 10), r, s, 0.5, 0.5);

    CHECK(std::abs(res.pair1.slope_product - (s + 1.0)) < 0.1);
    CHECK(std::abs(res.pair1.slope_u - r) < 0.1);
    CHECK(std::abs(res.pair1.slope_v - r) < 0.1);
    // at s = 2r-1 the product exponent equals 2r
    CHECK(std::abs(res.pair1.slope_product - 2.0 * r) < 0.1);

    CHECK(std::abs(res.pair2.slope_product - s) < 0.1);
    CHECK(std::abs(res.pair2.slope_u - 0.0) < 0.1);
    CHECK(std::abs(res.pair2.slope_v - r) < 0.1);
}

TEST_CASE("well-posedness region predicate", "[bourgain]") {
    CHECK(wellposed_region(1.0, 0.0) == RegionClass::in_W);
    CHECK(wellposed_region(0.5, 0.0) == RegionClass::in_W);
    CHECK(wellposed_region(-0.1, 3.0) == RegionClass::illposed_zone);
    CHECK(wellposed_region(2.0, 0.5) == RegionClass::outside_W); // below s = r-1
    CHECK(wellposed_region(0.4, 0.2) == RegionClass::outside_W); // above s = 2r-1

    // every in_W point lies between the lines s=2r-1, s=r, s=r-1 and s=0
    for (double r = 0.0; r <= 2.5; r += 0.05) {
        for (double s = -0.5; s <= 2.5; s += 0.05) {
            if (wellposed_region(r, s) == RegionClass::in_W) {
                CHECK(s >= 0.0);
                CHECK(s >= r - 1.0 - 1e-12);
                CHECK(s <= r + 1e-12);
                CHECK(s <= 2.0 * r - 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("ill-posedness closed form", "[bourgain]") {
    SECTION("identical amplitudes: all distances vanish") {
        const auto rep = illposedness_experiment({-0.5, 0.25, 1.0, 0.8, 0.8, 64, 1.0});
        CHECK(rep.u0_dist_sq == Catch::Approx(0.0).margin(1e-15));
        CHECK(rep.v0_dist_sq == Catch::Approx(0.0).margin(1e-15));
        CHECK(rep.u_dist_sq_at_tstar == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("paper regime: initial distance collapses, final stays bounded below") {
        const double r = -0.5, nu = 0.25, delta = 1.0, beta = 1.0;
        for (int N : {64, 256}) {
            for (double a1 : {1.0, 0.7}) {
                const double a2 = alpha2_for_separation(r, nu, delta, a1, N, beta);
                const auto rep = illposedness_experiment({r, nu, delta, a1, a2, N, beta});
                CHECK(rep.u0_dist_sq == Catch::Approx((a1 - a2) * (a1 - a2)).epsilon(1e-12));
                CHECK(rep.v0_dist_sq ==
                      Catch::Approx(std::pow(a1 * a1 - a2 * a2, 2)).epsilon(1e-12));
                CHECK(std::abs(rep.condition_residual) < 1e-9 * delta);
                CHECK(rep.lower_bound_ratio > 0.5);
            }
        }
        // the initial separation shrinks with N while the ratio does not
        const double a2_64 = alpha2_for_separation(r, nu, delta, 1.0, 64, beta);
        const double a2_256 = alpha2_for_separation(r, nu, delta, 1.0, 256, beta);
        CHECK(std::abs(1.0 - a2_256) < std::abs(1.0 - a2_64));
    }

    SECTION("t* shrinks when N doubles") {
        const double r = -0.5, nu = 0.25, delta = 1.0, beta = 1.0;
        const auto repN = illposedness_experiment({r, nu, delta, 1.0, 0.9, 32, beta});
        const auto rep2N = illposedness_experiment({r, nu, delta, 1.0, 0.9, 64, beta});
        CHECK(rep2N.t_star < repN.t_star);
    }

    SECTION("preconditions are named individually") {
        CHECK_THROWS_WITH(illposedness_experiment({0.1, 0.25, 1.0, 1.0, 0.9, 8, 1.0}),
                          Catch::Matchers::ContainsSubstring("r < 0"));
        CHECK_THROWS_WITH(illposedness_experiment({-0.5, -0.1, 1.0, 1.0, 0.9, 8, 1.0}),
                          Catch::Matchers::ContainsSubstring("nu > 0"));
        CHECK_THROWS_WITH(illposedness_experiment({-0.2, 0.3, 1.0, 1.0, 0.9, 8, 1.0}),
                          Catch::Matchers::ContainsSubstring("nu + r < 0"));
        CHECK_THROWS_WITH(illposedness_experiment({-0.5, 0.25, 1.0, 1.0, 0.9, 8, 0.0}),
                          Catch::Matchers::ContainsSubstring("beta != 0"));
    }
}

TEST_CASE("ill-posedness solver cross-check", "[bourgain]") {
    const double r = -0.5, nu = 0.25, delta = 1.0, beta = 1.0;
    const int N = 16;
    const double a2 = alpha2_for_separation(r, nu, delta, 1.0, N, beta);
    const auto res = illposedness_crosscheck({r, nu, delta, 1.0, a2, N, beta}, 64, 1e-3);
    CHECK(res.abs_error < 1e-6);
    CHECK(res.closed_form > 0.5); // bounded below as the theorem demands
}
