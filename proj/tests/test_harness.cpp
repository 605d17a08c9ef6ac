#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "quasitile/harness.hpp"
#include "quasitile/json_io.hpp"
#include "test_support.hpp"

using namespace quasitile;
using namespace testsupport;

TEST_CASE("exact tiling path: pinned values and boundary containment") {
    ExactTilingResult a = exact_tiling_path(1, 10, 100);
    CHECK(a.centers.size() == 10);
    CHECK(a.residual.empty());
    CHECK(a.residual_in_boundary);

    ExactTilingResult b = exact_tiling_path(1, 10, 105);
    CHECK(b.centers.size() == 10);
    CHECK(b.residual.size() == 5);
    CHECK(b.residual.contains(z1(100)));
    CHECK(b.residual.contains(z1(104)));
    CHECK(b.rho == 9);
    CHECK(b.residual_in_boundary);

    ExactTilingResult c = exact_tiling_path(2, 3, 7);
    CHECK(c.centers.size() == 4);
    CHECK(c.residual.size() == 13);
    CHECK(c.rho == 4);
    CHECK(c.residual_in_boundary);

    CHECK_THROWS_AS(exact_tiling_path(0, 1, 1), DomainError);
    CHECK_THROWS_AS(exact_tiling_path(1, 10, 5), DomainError);
}

TEST_CASE("exact tiling path: density ratio approaches the tile volume") {
    double prev_gap = 1e18;
    for (std::int64_t n : {20, 40, 80, 160}) {
        ExactTilingResult r = exact_tiling_path(2, 3, n);
        double gap = std::abs(r.window_to_center_ratio - 9.0);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1.0);
}

TEST_CASE("fstar analytic: level count under product laws") {
    GroupDescriptor g = GroupDescriptor::zd(2);
    AdmissibleField f = level_count_field(g);
    FstarEstimate est =
        estimate_fstar_analytic(f, RandomModel::product(ColorDistribution::bernoulli(0.5)));
    CHECK(est.f(-0.5) == 0.0);
    CHECK(est.f(0.3) == 0.5);
    CHECK(est.f(1.0) == 1.0);
    CHECK(est.uncertainty_band == 0.0);

    FstarEstimate atom =
        estimate_fstar_analytic(f, RandomModel::product(ColorDistribution::atom(1.5)));
    CHECK(atom.f == StepFunction::step_at(1.5));

    CHECK_THROWS_AS(
        estimate_fstar_analytic(eigenvalue_count_field(g), RandomModel::product(ColorDistribution::bernoulli(0.5))),
        Unsupported);
}

TEST_CASE("fstar large volume: level count agrees with the analytic limit") {
    GroupDescriptor g = GroupDescriptor::zd(1);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    LargeVolumeOptions opt;
    opt.j_big = 4000;
    opt.j_check = 2000;
    opt.seeds = 10;
    FstarEstimate lv = estimate_fstar_large_volume(f, bern, "boxes", opt);
    FstarEstimate an = estimate_fstar_analytic(f, bern);
    CHECK(sup_norm_distance(lv.f, an.f) <= 0.03);
    CHECK(lv.self_consistency <= 0.03);
}

TEST_CASE("fstar does not depend on the Folner sequence: boxes vs balls") {
    GroupDescriptor g = GroupDescriptor::zd(2);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    LargeVolumeOptions opt;
    opt.j_big = 40;  // 1600-point box vs radius-39 ball
    opt.j_check = 24;
    opt.seeds = 8;
    FstarEstimate boxes = estimate_fstar_large_volume(f, bern, "boxes", opt);
    FstarEstimate balls = estimate_fstar_large_volume(f, bern, "balls", opt);
    CHECK(sup_norm_distance(boxes.f, balls.f) <= 0.02);
}

TEST_CASE("banded grid counts agree with the dense staircase") {
    GroupDescriptor g = GroupDescriptor::zd(2);
    AdmissibleField f = eigenvalue_count_field(g, 1.0);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    FiniteSubset window = box_z2(9, 11);
    Coloring om = sample_coloring(bern, window, 5);
    StepFunction dense = f.evaluate(window, om);
    auto [lo, hi] = detail::spectral_range(f, bern);
    std::vector<double> grid = detail::energy_grid(lo, hi, 101);
    GridCounts gc = banded_count_fractions(g, window, 1.0, om, grid);
    const double n = static_cast<double>(window.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double want = dense.left_limit(grid[k]) / n;
        // zero pivots widen the enclosure; the offset grid avoids them here
        CHECK(want >= gc.below[k] - 1e-12);
        CHECK(want <= gc.below[k] + gc.ambiguous[k] + 1e-12);
        if (gc.ambiguous[k] == 0.0) CHECK(gc.below[k] == doctest::Approx(want));
    }
}

TEST_CASE("grid sup distance equals the exact staircase distance") {
    GroupDescriptor g = GroupDescriptor::zd(2);
    AdmissibleField f = eigenvalue_count_field(g, 1.0);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    FiniteSubset window = box_z2(8, 8);
    Coloring om = sample_coloring(bern, window, 9);
    StepFunction dense = f.evaluate(window, om);
    dense.scale(1.0 / 64.0);

    auto [lo, hi] = detail::spectral_range(f, bern);
    std::vector<double> grid = detail::energy_grid(lo, hi, 257);
    // reference: a step function constant between grid points
    std::vector<double> ref_vals(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        ref_vals[k] = std::min(1.0, std::max(0.0, 0.5 + 0.45 * std::tanh(grid[k])));
    std::vector<double> xs(grid.begin(), grid.end());
    std::vector<double> vs(grid.size() + 1);
    vs[0] = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) vs[k + 1] = ref_vals[k];
    StepFunction ref = StepFunction::from_breakpoints(xs, vs);

    GridCounts gc = banded_count_fractions(g, window, 1.0, om, grid);
    double via_grid = sup_distance_on_grid(gc, ref_vals);
    double exact = sup_norm_distance(dense, ref);
    CHECK(via_grid == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("cauchy diagnostic: additive field gives observed zero within bound") {
    GroupDescriptor g = GroupDescriptor::zd(1);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    double eps = 0.09, delta = 0.05;
    auto tiles = [&](double e) {
        std::vector<FiniteSubset> out;
        for (int l = 1; l <= n_of_eps(e); ++l) out.push_back(interval_z(0, l));
        return out;
    };
    CauchyDiagnostic d = cauchy_diagnostic(f, bern, tiles(eps), tiles(delta), eps, delta);
    CHECK(d.observed == 0.0); // unit-mass assemblies coincide: F(K)/|K| is constant
    // the eta-weighted assemblies differ by the geometric-series deficiency
    double want_raw = std::abs(std::pow(1.0 - eps, n_of_eps(eps)) -
                               std::pow(1.0 - delta, n_of_eps(delta)));
    CHECK(d.observed_raw == doctest::Approx(want_raw).epsilon(1e-10));
    CHECK(d.observed <= d.bound);
    CHECK(d.observed_raw <= d.bound);
    CHECK(d.bound == doctest::Approx(9.0 * delta)); // b == 0, r == 0: beta vanishes

    CHECK_THROWS_AS(cauchy_diagnostic(f, bern, tiles(eps), tiles(eps), eps, eps), DomainError);
    CHECK_THROWS_AS(cauchy_diagnostic(f, bern, tiles(0.05), tiles(0.09), 0.05, 0.09), DomainError);
}

TEST_CASE("run_convergence: level count on Z^2 at unit-test scale") {
    ExperimentConfig cfg;
    cfg.group = GroupDescriptor::zd(2);
    cfg.model = RandomModel::product(ColorDistribution::bernoulli(0.5));
    cfg.field_kind = "level_count";
    cfg.window_indices = {10, 20};
    cfg.eps_grid = {0.09};
    cfg.seeds = {1, 2, 3, 4, 5};
    cfg.fstar_method = "analytic";
    ConvergenceReport rep = run_convergence(cfg);
    CHECK(rep.rows.size() == 10);
    for (const auto& r : rep.rows) {
        CHECK(r.cert.pass);
        CHECK(r.cert.observed <= 1.0);
        CHECK(r.cert.fine_bound == doctest::Approx(20.0 * 0.09 + std::sqrt(0.09)));
        CHECK(r.cert.fine_le_coarse);
        CHECK(r.cert.beta_le_sqrt_eps);
        CHECK(r.decomposition_consistent);
        CHECK(r.gc_distance >= 0.0);
    }
    CHECK(rep.gates_ok);
    CHECK(rep.monotone_ok);

    // byte determinism of the emitted artifacts
    ConvergenceReport rep2 = run_convergence(cfg);
    CHECK(convergence_csv(rep) == convergence_csv(rep2));
    CHECK(convergence_summary_json(rep).dump() == convergence_summary_json(rep2).dump());
}

TEST_CASE("run_convergence: eigenvalue field through the banded grid path") {
    ExperimentConfig cfg;
    cfg.group = GroupDescriptor::zd(2);
    cfg.model = RandomModel::product(ColorDistribution::bernoulli(0.5));
    cfg.field_kind = "eigenvalue_count";
    cfg.window_indices = {8, 12};
    cfg.eps_grid = {0.09};
    cfg.seeds = {11, 12, 13};
    cfg.fstar_method = "large_volume";
    cfg.fstar.j_big = 16;
    cfg.fstar.j_check = 12;
    cfg.fstar.seeds = 4;
    cfg.fstar.grid_points = 129;
    cfg.with_decomposition = false;
    cfg.with_gc = false;
    ConvergenceReport rep = run_convergence(cfg);
    CHECK(rep.rows.size() == 6);
    for (const auto& r : rep.rows) {
        CHECK(r.cert.observed <= 1.0 + 1e-12);
        CHECK(r.cert.fine_bound > 10.0); // C_b = 8 makes the bound generous
        CHECK(r.cert.pass);
    }
    CHECK(rep.fstar.uncertainty_band > 0.0);
    CHECK(rep.gates_ok);
}

TEST_CASE("exact tiling path feeds the certificate bound (consistency)") {
    // normalized field average assembled from the exact m-box tiling stays
    // within the quasi-tiling certificate's fine bound
    GroupDescriptor g = GroupDescriptor::zd(2);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    ExactTilingResult et = exact_tiling_path(2, 5, 60);
    FiniteSubset window = folner_term(g, "boxes", 60);
    FiniteSubset tile = folner_term(g, "boxes", 5);
    const double eps = 0.09;
    double fine = 20.0 * eps + std::sqrt(eps); // K_f = 1, C_b = 0, beta = 0
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Coloring om = sample_coloring(bern, window, seed);
        StepFunction assembly =
            empirical_pairing(f, tile, et.centers.elements(), om);
        assembly.scale(1.0 / static_cast<double>(tile.size()));
        StepFunction direct = f.evaluate(window, om);
        direct.scale(1.0 / static_cast<double>(window.size()));
        CHECK(sup_norm_distance(direct, assembly) <= fine);
    }
}

TEST_CASE("reference-assembly fstar approaches the analytic limit as eps shrinks") {
    GroupDescriptor g = GroupDescriptor::zd(1);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    StepFunction analytic = estimate_fstar_analytic(f, bern).f;
    double prev = 1e9;
    for (double eps : {0.09, 0.05, 0.02}) {
        std::vector<FiniteSubset> tiles;
        for (int l = 1; l <= n_of_eps(eps); ++l) tiles.push_back(interval_z(0, l));
        FstarEstimate est = estimate_fstar_reference_assembly(f, bern, tiles, eps);
        double d = sup_norm_distance(est.f, analytic);
        CHECK(d == doctest::Approx(std::pow(1.0 - eps, n_of_eps(eps))).epsilon(1e-9));
        CHECK(d <= prev + 1e-12);
        CHECK(d <= est.uncertainty_band);
        prev = d;
    }
}

TEST_CASE("reference assembly is order-stable in its tile summation") {
    GroupDescriptor g = GroupDescriptor::zd(1);
    AdmissibleField f = level_count_field(g);
    RandomModel bern = RandomModel::product(ColorDistribution::bernoulli(0.5));
    const double eps = 0.09;
    std::vector<FiniteSubset> tiles;
    for (int l = 1; l <= n_of_eps(eps); ++l) tiles.push_back(interval_z(0, l));
    ReferenceAssembly a = reference_assembly(f, bern, tiles, eps, 0);
    // re-sum the same eta-weighted terms in reverse order
    std::vector<std::pair<double, StepFunction>> terms;
    for (int i = n_of_eps(eps); i >= 1; --i) {
        FiniteSubset k = tiles[i - 1];
        StepFunction ref = *f.exact_reference(k, bern);
        terms.emplace_back(eta(eps, i) / static_cast<double>(k.size()), std::move(ref));
    }
    StepFunction reversed = linear_combination(terms);
    CHECK(sup_norm_distance(a.raw, reversed) <= 1e-12);
}

TEST_CASE("run_convergence: config validation") {
    ExperimentConfig cfg;
    cfg.group = GroupDescriptor::zd(1);
    cfg.model = RandomModel::product(ColorDistribution::bernoulli(0.5));
    cfg.window_indices = {10, 10};
    cfg.eps_grid = {0.09};
    cfg.seeds = {1};
    CHECK_THROWS_AS(run_convergence(cfg), DomainError);
    cfg.window_indices = {10, 20};
    cfg.eps_grid = {0.2};
    CHECK_THROWS_AS(run_convergence(cfg), DomainError);
    cfg.eps_grid = {0.09};
    cfg.seeds = {1, 1};
    CHECK_THROWS_AS(run_convergence(cfg), DomainError);
}

TEST_CASE("config json round trip drives the same experiment") {
    nlohmann::json j = {
        {"group", {{"kind", "ZPowD"}, {"d", 2}}},
        {"model", {{"law", {{"kind", "bernoulli"}, {"p", 0.5}}}}},
        {"field", {{"kind", "level_count"}}},
        {"window_indices", {10, 20}},
        {"eps_grid", {0.09}},
        {"seed_base", 100},
        {"seed_count", 3},
    };
    ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{100, 101, 102});
    ConvergenceReport rep = run_convergence(cfg);
    CHECK(rep.rows.size() == 6);
    CHECK(rep.gates_ok);
}
