#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quasitile/tiling.hpp"
#include "test_support.hpp"

using namespace quasitile;
using namespace testsupport;

namespace {
// Definition-based oracle in extended precision: smallest n with (1-e)^n <= e.
long long oracle_n_of_eps(long double e) {
    long long n = 1;
    long double p = 1.0L - e;
    long double acc = p;
    while (acc > e) {
        acc *= p;
        ++n;
        if (n > 200000) throw std::runtime_error("oracle runaway");
    }
    return n;
}
} // namespace

TEST_CASE("N(eps): spot values against the oracle") {
    CHECK(n_of_eps(0.5) == 1);
    CHECK(n_of_eps(0.1) == 22);
    CHECK(n_of_eps(0.01) == 459);
    for (double e : {0.5, 0.25, 0.1, 0.09, 0.05, 0.02, 0.01, 0.005, 0.003})
        CHECK(n_of_eps(e) == oracle_n_of_eps(static_cast<long double>(e)));
    CHECK_THROWS_AS(n_of_eps(0.0), DomainError);
    CHECK_THROWS_AS(n_of_eps(1.0), DomainError);
}

TEST_CASE("eta: boundary values and the geometric-sum identity") {
    CHECK(eta(0.09, n_of_eps(0.09)) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK_THROWS_AS(eta(0.09, 0), IndexOutOfRange);
    CHECK_THROWS_AS(eta(0.09, n_of_eps(0.09) + 1), IndexOutOfRange);

    for (double eps : {0.005, 0.01, 0.05, 0.09, 0.1}) {
        int n = n_of_eps(eps);
        long double sum = 0.0L;
        for (int i = 1; i <= n; ++i) sum += static_cast<long double>(eta(eps, i));
        long double closed = 1.0L - std::pow(1.0L - static_cast<long double>(eps), n);
        CHECK(std::abs(static_cast<double>(sum - closed)) <= 1e-12);
        CHECK(static_cast<double>(sum) >= 1.0 - eps - 1e-12);
        CHECK(static_cast<double>(sum) <= 1.0 + 1e-12);
    }
    // eps/N <= eta_i <= eps on a log grid below 1/10
    for (double eps = 0.001; eps < 0.1; eps *= 1.45) {
        int n = n_of_eps(eps);
        for (int i = 1; i <= n; ++i) {
            double v = eta(eps, i);
            CHECK(v <= eps + 1e-15);
            CHECK(v >= eps / n - 1e-15);
        }
    }
}

TEST_CASE("weighted eta bound dominates the weighted sum") {
    CHECK(weighted_eta_bound(std::vector<double>(n_of_eps(0.04), 1.0), 0.04) ==
          doctest::Approx(1.2));
    CHECK(weighted_eta_bound(std::vector<double>(n_of_eps(0.04), 0.0), 0.04) == 0.0);
    CHECK_THROWS_AS(weighted_eta_bound({1.0}, 0.01), InsufficientSequence);

    SeqRng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        double eps = 0.011 + 0.085 * rng.uniform01();
        int n = n_of_eps(eps);
        std::vector<double> alpha(n);
        for (double& a : alpha) a = -3.0 + 6.0 * rng.uniform01();
        double s = 0.0;
        for (int i = 1; i <= n; ++i) s += alpha[i - 1] * eta(eps, i);
        CHECK(std::abs(s) <= weighted_eta_bound(alpha, eps) + 1e-12);
    }
    // beta' weights: bound matches beta(eps) and dominates sum beta'_i eta_i
    for (double eps : {0.04, 0.09}) {
        int n = n_of_eps(eps);
        std::vector<double> bp(n);
        for (int i = 1; i <= n; ++i) bp[i - 1] = 0.5 / i;
        double s = 0.0;
        for (int i = 1; i <= n; ++i) s += bp[i - 1] * eta(eps, i);
        double wb = weighted_eta_bound(bp, eps);
        CHECK(wb == doctest::Approx(beta_of_eps(eps, bp)).epsilon(1e-12));
        CHECK(s <= wb + 1e-12);
    }
}

TEST_CASE("manual exact interval tiling: all structural checks pass, cover 1") {
    FiniteSubset window = interval_z(0, 100);
    FiniteSubset tile = interval_z(0, 10);
    std::vector<GroupElement> centers;
    for (int t = 0; t < 100; t += 10) centers.push_back(z1(t));
    QuasiTiling qt = construct_quasi_tiling(window, {tile}, 0.1, TilingMode::Manual, {centers});
    const TilingDiagnostics& d = qt.diagnostics;
    CHECK(d.contained);
    CHECK(d.cross_disjoint);
    CHECK(d.eps_disjoint);
    CHECK(d.cover_fraction == 1.0);
    CHECK(d.cover_ok);
    // a one-shape exact tiling covers far more than eta_1(0.1): honest fail
    CHECK_FALSE(d.density_ok);
    CHECK_FALSE(d.pass);
}

TEST_CASE("manual tiling with an oversized tile is infeasible") {
    FiniteSubset window = interval_z(0, 5);
    FiniteSubset tile = interval_z(0, 10);
    CHECK_THROWS_AS(
        construct_quasi_tiling(window, {tile}, 0.1, TilingMode::Manual, {{z1(0)}}),
        TilingInfeasible);
}

TEST_CASE("duplicated centers break eps-disjointness") {
    FiniteSubset window = interval_z(0, 100);
    FiniteSubset tile = interval_z(0, 10);
    QuasiTiling qt = construct_quasi_tiling(window, {tile}, 0.5, TilingMode::Manual,
                                            {{z1(0), z1(0), z1(20)}});
    CHECK_FALSE(qt.diagnostics.eps_disjoint);
}

TEST_CASE("a 70 percent manual cover fails the cover flag at eps = 0.1") {
    FiniteSubset window = interval_z(0, 100);
    FiniteSubset tile = interval_z(0, 10);
    std::vector<GroupElement> centers{z1(0), z1(10), z1(20), z1(30), z1(40), z1(50), z1(60)};
    QuasiTiling qt = construct_quasi_tiling(window, {tile}, 0.1, TilingMode::Manual, {centers});
    CHECK(qt.diagnostics.cover_fraction == doctest::Approx(0.7));
    CHECK_FALSE(qt.diagnostics.cover_ok);
}

TEST_CASE("stp greedy at eps = 0.5 on a 100-point interval") {
    // N(0.5) = 1, eta_1 = 0.5: greedy chains overlapping pairs until the
    // density target and lands inside the tolerance band.
    FiniteSubset window = interval_z(0, 100);
    FiniteSubset tile = interval_z(0, 2);
    QuasiTiling qt = construct_quasi_tiling(window, {tile}, 0.5, TilingMode::Stp);
    CHECK(qt.centers[0].size() >= 24);
    CHECK(qt.diagnostics.eps_disjoint);
    CHECK(qt.diagnostics.cover_ok); // 1 - 2 eps = 0
    CHECK(qt.diagnostics.density_ok);
    CHECK(qt.diagnostics.pass);
}

TEST_CASE("greedy is deterministic") {
    FiniteSubset window = interval_z(0, 400);
    std::vector<FiniteSubset> tiles;
    for (int l = 1; l <= n_of_eps(0.09); ++l) tiles.push_back(interval_z(0, l));
    auto run = [&]() {
        try {
            return construct_quasi_tiling(window, tiles, 0.09, TilingMode::Stp);
        } catch (TilingInfeasible& e) {
            return e.partial;
        }
    };
    QuasiTiling a = run(), b = run();
    REQUIRE(a.centers.size() == b.centers.size());
    for (std::size_t i = 0; i < a.centers.size(); ++i) CHECK(a.centers[i] == b.centers[i]);
}

TEST_CASE("greedy output always carries valid eps-disjointness witnesses") {
    SeqRng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::int64_t len = 2000 + static_cast<std::int64_t>(rng.below(2000));
        FiniteSubset window = interval_z(0, len);
        std::vector<FiniteSubset> tiles;
        for (int l = 1; l <= n_of_eps(0.09); ++l) tiles.push_back(interval_z(0, l));
        QuasiTiling qt;
        try {
            qt = construct_quasi_tiling(window, tiles, 0.09, TilingMode::Stp);
        } catch (TilingInfeasible& e) {
            qt = e.partial;
        }
        CHECK(qt.diagnostics.contained);
        CHECK(qt.diagnostics.cross_disjoint);
        CHECK(qt.diagnostics.eps_disjoint);
    }
}

TEST_CASE("stp pass above the empirical feasibility scale, with center densities") {
    // interval tiles of lengths 8n: each accepted translate advances the
    // covered region by at most 190 points, and at |window| = 320000 the
    // density band (2 eps^2/N) |window| ~ 199 exceeds every advance, so the
    // greedy provably lands in each band.
    const double eps = 0.09;
    const int n = n_of_eps(eps);
    std::vector<FiniteSubset> tiles;
    for (int i = 1; i <= n; ++i) tiles.push_back(interval_z(0, 8 * i));
    FiniteSubset window = interval_z(0, 320000);
    QuasiTiling qt = construct_quasi_tiling(window, tiles, eps, TilingMode::Stp);
    CHECK(qt.diagnostics.pass);
    CHECK(qt.diagnostics.cover_fraction >= 1.0 - 2.0 * eps);
    for (int i = 1; i <= n; ++i) {
        auto [gap, bound] = center_density_gap(qt, i);
        CHECK(gap <= bound);
    }
    CHECK(qt.diagnostics.center_density_ok);
}

TEST_CASE("center_density_gap: exact tiling arithmetic and index guard") {
    FiniteSubset window = interval_z(0, 100);
    FiniteSubset tile = interval_z(0, 10);
    std::vector<GroupElement> centers;
    for (int t = 0; t < 100; t += 10) centers.push_back(z1(t));
    QuasiTiling qt = construct_quasi_tiling(window, {tile}, 0.1, TilingMode::Manual, {centers});
    auto [gap, bound] = center_density_gap(qt, 1);
    double eta_1 = eta(0.1, 1);
    CHECK(gap == doctest::Approx(std::abs(0.1 - eta_1 / 10.0)).epsilon(1e-12));
    CHECK(bound == doctest::Approx(4.0 * 0.1 * eta_1 / 10.0).epsilon(1e-12));
    CHECK_THROWS_AS(center_density_gap(qt, 2), IndexOutOfRange);
}

TEST_CASE("bad tile chains are rejected") {
    FiniteSubset window = interval_z(0, 50);
    FiniteSubset a = interval_z(0, 4), b = interval_z(0, 4);
    CHECK_THROWS_AS(construct_quasi_tiling(window, {a, b}, 0.09, TilingMode::Stp), BadTileChain);
    FiniteSubset no_id = interval_z(1, 5);
    CHECK_THROWS_AS(construct_quasi_tiling(window, {no_id}, 0.5, TilingMode::Stp), BadTileChain);
    // stp needs exactly N(eps) tiles
    CHECK_THROWS_AS(construct_quasi_tiling(window, {interval_z(0, 2)}, 0.09, TilingMode::Stp),
                    BadTileChain);
}
