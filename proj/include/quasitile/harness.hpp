#pragma once

// Experiment orchestration: limit-function estimation, per-run error
// certificates against the fine and coarse bounds, Cauchy diagnostics between
// reference assemblies, convergence sweeps, and the exact tiling path for
// Z^d boxes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasitile/averaging.hpp"
#include "quasitile/eig.hpp"
#include "quasitile/errors.hpp"
#include "quasitile/fields.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/model.hpp"
#include "quasitile/resampling.hpp"
#include "quasitile/step_function.hpp"
#include "quasitile/tiling.hpp"

namespace quasitile {

// ---------------------------------------------------------------------------
// Exact tiling path for Z^d: centers T_{m,n} = {t in (mZ)^d : box_m t in box_n}.

struct ExactTilingResult {
    FiniteSubset centers;
    FiniteSubset residual; // box_n minus the tiled part
    std::size_t rho = 0;   // diam(box_m)
    bool residual_in_boundary = false;
    double window_to_center_ratio = 0.0; // |box_n| / |T_{m,n}|
};

inline ExactTilingResult exact_tiling_path(int d, std::int64_t m, std::int64_t n) {
    if (d < 1 || m < 1 || n < 1) throw DomainError("exact_tiling_path needs positive d, m, n");
    if (m > n) throw DomainError("tile must not exceed the window");
    GroupDescriptor g = GroupDescriptor::zd(d);
    FiniteSubset box_m = folner_term(g, "boxes", m);
    FiniteSubset box_n = folner_term(g, "boxes", n);

    std::int64_t per_axis = n / m; // t coordinates 0, m, ..., (per_axis-1) m
    std::vector<GroupElement> centers;
    std::vector<std::int64_t> idx(d, 0);
    while (true) {
        std::vector<std::int64_t> v(d);
        for (int a = 0; a < d; ++a) v[a] = idx[a] * m;
        centers.push_back(GroupElement{v, {}});
        int a = d - 1;
        while (a >= 0 && idx[a] == per_axis - 1) idx[a--] = 0;
        if (a < 0) break;
        ++idx[a];
    }

    ExactTilingResult out;
    out.centers = FiniteSubset::from_elements(g, std::move(centers));
    FiniteSubset tiled = set_product(box_m, out.centers);
    out.residual = set_difference(box_n, tiled);
    out.rho = diameter(box_m);
    FiniteSubset bdry = r_boundary(box_n, static_cast<int>(out.rho));
    out.residual_in_boundary = is_subset(out.residual, bdry);
    out.window_to_center_ratio =
        static_cast<double>(box_n.size()) / static_cast<double>(out.centers.size());
    return out;
}

// ---------------------------------------------------------------------------
// Banded spectral counting for large Z^d windows (eigenvalue field).

namespace detail {
inline BandedSym banded_from_window(const GroupDescriptor& g, const FiniteSubset& window,
                                    double coupling, const Coloring& om) {
    const std::size_t n = window.size();
    auto gens = generators(g);
    std::size_t bw = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& s : gens) {
            std::size_t j = window.index_of(multiply(g, s, window.elements()[i]));
            if (j != FiniteSubset::npos && j > i) bw = std::max(bw, j - i);
        }
    BandedSym b = BandedSym::zeros(n, bw);
    for (std::size_t i = 0; i < n; ++i) {
        b.at(0, i) = coupling * om.values[i];
        for (const auto& s : gens) {
            std::size_t j = window.index_of(multiply(g, s, window.elements()[i]));
            if (j != FiniteSubset::npos && j > i) b.at(j - i, i) = 1.0;
        }
    }
    return b;
}
} // namespace detail

// counts[k] = #{eigenvalues < energies[k]} / n; zero-pivot hits widen the
// reported enclosure.
struct GridCounts {
    std::vector<double> below; // fractions
    std::vector<double> ambiguous; // zero-pivot fractions at each energy
};

inline GridCounts banded_count_fractions(const GroupDescriptor& g, const FiniteSubset& window,
                                         double coupling, const Coloring& om,
                                         const std::vector<double>& energies) {
    BandedSym b = detail::banded_from_window(g, window, coupling, om);
    GridCounts out;
    out.below.reserve(energies.size());
    out.ambiguous.reserve(energies.size());
    const double n = static_cast<double>(window.size());
    for (double e : energies) {
        Inertia in = ldlt_inertia_banded(b, e);
        out.below.push_back(static_cast<double>(in.negative) / n);
        out.ambiguous.push_back(static_cast<double>(in.zero) / n);
    }
    return out;
}

// sup_E |F - G| for the run staircase F known through grid counts and a
// reference G that is constant between grid points.
inline double sup_distance_on_grid(const GridCounts& run, const std::vector<double>& ref_values) {
    double m = 0.0;
    const std::size_t k = ref_values.size();
    for (std::size_t i = 0; i < k; ++i) {
        double g = ref_values[i];
        double lo = run.below[i];
        double hi = (i + 1 < k) ? run.below[i + 1] : 1.0;
        double amb = run.ambiguous[i] + ((i + 1 < k) ? run.ambiguous[i + 1] : 0.0);
        m = std::max(m, std::abs(lo - g) + amb);
        m = std::max(m, std::abs(hi - g) + amb);
    }
    m = std::max(m, run.below[0]); // below the grid the reference is 0
    return m;
}

// ---------------------------------------------------------------------------
// Limit function estimation.

struct FstarEstimate {
    StepFunction f;
    std::string method;
    double uncertainty_band = 0.0;
    double self_consistency = 0.0;
    double grid_resolution = 0.0;
    std::vector<double> grid; // nonempty for tabulated estimates
};

struct LargeVolumeOptions {
    std::int64_t j_big = 100;
    std::int64_t j_check = 70;
    std::size_t seeds = 20;
    std::size_t grid_points = 257;
    std::uint64_t seed = 424242;
};

namespace detail {
inline std::pair<double, double> spectral_range(const AdmissibleField& f, const RandomModel& m) {
    double deg = static_cast<double>(generators(f.group).size());
    double lo, hi;
    if (m.law.kind == ColorDistribution::Kind::FinitePmf) {
        lo = m.law.support.front();
        hi = m.law.support.back();
    } else {
        lo = 0.0;
        hi = 1.0;
    }
    double c = f.coupling;
    double cmin = std::min(c * lo, c * hi), cmax = std::max(c * lo, c * hi);
    return {-deg + cmin - 0.5, deg + cmax + 0.5};
}

inline std::vector<double> energy_grid(double lo, double hi, std::size_t points) {
    // small irrational-ish offset keeps grid points off the integer lattice,
    // where Bernoulli-colored operators place exact eigenvalues
    const double off = 2.3841857910156251e-7;
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo + off + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

// Tabulated mean spectral fraction over seeds at one window size.
inline std::vector<double> mean_grid_counts(const AdmissibleField& f, const RandomModel& m,
                                            const std::string& gen, std::int64_t j,
                                            std::size_t nseeds, std::uint64_t seed,
                                            const std::vector<double>& grid) {
    FiniteSubset window = folner_term(f.group, gen, j);
    std::vector<double> acc(grid.size(), 0.0);
    for (std::size_t s = 0; s < nseeds; ++s) {
        KeyedStream ks(seed);
        ks.absorb(0xF5u).absorb(static_cast<std::uint64_t>(s));
        Coloring om = sample_coloring(m, window, ks.bits());
        GridCounts gc = banded_count_fractions(f.group, window, f.coupling, om, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) acc[i] += gc.below[i];
    }
    for (double& v : acc) v /= static_cast<double>(nseeds);
    return acc;
}
} // namespace detail

// Analytic limit for the level-count field: the single-site distribution
// function (normalized count expectation per site).
inline FstarEstimate estimate_fstar_analytic(const AdmissibleField& f, const RandomModel& m) {
    if (f.kind != "level_count") throw Unsupported("analytic f* known for the level-count field only");
    MarginalCdf cdf = marginal_cdf_for(m, f.group);
    if (!cdf.has_step) throw Unsupported("analytic f* needs a finite color law");
    FstarEstimate out;
    out.f = cdf.step;
    out.method = "analytic";
    return out;
}

// Large-volume estimate: mean of f(L_big, .)/|L_big| over seeds, with an
// uncertainty band 2 * (distance to the j_check estimate) + grid resolution.
inline FstarEstimate estimate_fstar_large_volume(const AdmissibleField& f, const RandomModel& m,
                                                 const std::string& window_generator,
                                                 const LargeVolumeOptions& opt) {
    FstarEstimate out;
    out.method = "large_volume";
    if (f.kind == "level_count") {
        std::vector<StepFunction> terms;
        FiniteSubset window = folner_term(f.group, window_generator, opt.j_big);
        for (std::size_t s = 0; s < opt.seeds; ++s) {
            KeyedStream ks(opt.seed);
            ks.absorb(0xF5u).absorb(static_cast<std::uint64_t>(s));
            terms.push_back(f.evaluate(window, sample_coloring(m, window, ks.bits())));
        }
        out.f = sum_tree(std::move(terms));
        out.f.scale(1.0 / (static_cast<double>(opt.seeds) * static_cast<double>(window.size())));
        // self-consistency against the checking volume
        std::vector<StepFunction> check_terms;
        FiniteSubset check = folner_term(f.group, window_generator, opt.j_check);
        for (std::size_t s = 0; s < opt.seeds; ++s) {
            KeyedStream ks(opt.seed);
            ks.absorb(0xF6u).absorb(static_cast<std::uint64_t>(s));
            check_terms.push_back(f.evaluate(check, sample_coloring(m, check, ks.bits())));
        }
        StepFunction cf = sum_tree(std::move(check_terms));
        cf.scale(1.0 / (static_cast<double>(opt.seeds) * static_cast<double>(check.size())));
        out.self_consistency = sup_norm_distance(out.f, cf);
        out.uncertainty_band = 2.0 * out.self_consistency;
        return out;
    }
    // tabulated spectral fractions on an energy grid
    auto [lo, hi] = detail::spectral_range(f, m);
    out.grid = detail::energy_grid(lo, hi, opt.grid_points);
    std::vector<double> big =
        detail::mean_grid_counts(f, m, window_generator, opt.j_big, opt.seeds, opt.seed, out.grid);
    std::vector<double> chk = detail::mean_grid_counts(f, m, window_generator, opt.j_check,
                                                       opt.seeds, opt.seed ^ 0xC4Eu, out.grid);
    double sc = 0.0, res = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        sc = std::max(sc, std::abs(big[i] - chk[i]));
        if (i + 1 < out.grid.size()) res = std::max(res, big[i + 1] - big[i]);
    }
    out.self_consistency = sc;
    out.grid_resolution = res;
    out.uncertainty_band = 2.0 * sc + res;
    std::vector<double> xs(out.grid.begin(), out.grid.end());
    std::vector<double> vs(out.grid.size() + 1);
    vs[0] = 0.0;
    for (std::size_t i = 0; i < out.grid.size(); ++i) vs[i + 1] = big[i];
    out.f = StepFunction::from_breakpoints(std::move(xs), std::move(vs));
    return out;
}

// ---------------------------------------------------------------------------
// Reference assemblies and the Cauchy diagnostic.

struct ReferenceAssembly {
    StepFunction raw;        // sum_i eta_i <f_i^r, P_i^r> / |K_i|
    StepFunction normalized; // eta weights rescaled to total mass 1
    double eta_sum = 0.0;
    double beta_eps = 0.0;   // from the tile chain
    std::size_t tiles = 0;
};

struct AssemblyOptions {
    bool allow_mc = false;
    McOptions mc;
    std::size_t enumeration_cap = (1u << 20);
};

inline ReferenceAssembly reference_assembly(const AdmissibleField& f, const RandomModel& m,
                                            const std::vector<FiniteSubset>& tiles, double eps,
                                            int r, const AssemblyOptions& opt = {}) {
    const std::size_t n = static_cast<std::size_t>(n_of_eps(eps));
    if (tiles.size() < n) throw InsufficientSequence("assembly needs N(eps) tiles");
    ReferenceAssembly out;
    out.tiles = n;
    std::vector<std::pair<double, StepFunction>> terms;
    std::vector<double> betas;
    for (std::size_t i = 0; i < n; ++i) {
        const FiniteSubset& k = tiles[i];
        FiniteSubset kr = r_interior(k, r);
        double eta_i = eta(eps, static_cast<int>(i) + 1);
        out.eta_sum += eta_i;
        betas.push_back(beta_prime(k, f.boundary.value, r));
        StepFunction ref;
        if (kr.empty()) {
            ref = StepFunction();
        } else if (auto exact = f.exact_reference(kr, m)) {
            ref = *exact;
        } else {
            try {
                ref = reference_pairing_exact(f, kr, m, opt.enumeration_cap).mean;
            } catch (const ResourceLimit&) {
                if (!opt.allow_mc) throw;
                McOptions mc = opt.mc;
                mc.seed = mix64(mc.seed ^ (0xA55E4B1Eull + i));
                ref = reference_pairing_mc(f, kr, m, mc).mean;
            } catch (const Unsupported&) {
                if (!opt.allow_mc) throw;
                McOptions mc = opt.mc;
                mc.seed = mix64(mc.seed ^ (0xA55E4B1Eull + i));
                ref = reference_pairing_mc(f, kr, m, mc).mean;
            }
        }
        terms.emplace_back(eta_i / static_cast<double>(k.size()), std::move(ref));
    }
    out.raw = linear_combination(terms);
    out.normalized = out.raw;
    out.normalized.scale(1.0 / out.eta_sum);
    out.beta_eps = weighted_eta_bound(betas, eps);
    return out;
}

// Limit estimate through the eta-weighted reference assembly at a fixed eps.
inline FstarEstimate estimate_fstar_reference_assembly(const AdmissibleField& f,
                                                       const RandomModel& m,
                                                       const std::vector<FiniteSubset>& tiles,
                                                       double eps,
                                                       const AssemblyOptions& opt = {}) {
    ReferenceAssembly a = reference_assembly(f, m, tiles, eps, m.correlation_length(), opt);
    FstarEstimate out;
    out.f = a.raw;
    out.method = "reference_assembly";
    // the assembly approximates the limit to within its own bound scale
    out.uncertainty_band = (9.0 * f.k_f + 11.0 * f.boundary.c_b) * eps +
                           5.0 * (4.0 + f.k_f + f.boundary.c_b) * a.beta_eps;
    return out;
}

struct CauchyDiagnostic {
    double observed = 0.0;     // between the unit-mass assemblies
    double observed_raw = 0.0; // between the eta-weighted assemblies as written
    double bound = 0.0;        // (9 K_f + 11 C_b) delta + 5 (4 + K_f + C_b) beta(delta)
    double eps = 0.0, delta = 0.0;
};

inline CauchyDiagnostic cauchy_diagnostic(const AdmissibleField& f, const RandomModel& m,
                                          const std::vector<FiniteSubset>& tiles_eps,
                                          const std::vector<FiniteSubset>& tiles_delta, double eps,
                                          double delta, const AssemblyOptions& opt = {}) {
    if (!(delta < eps) || !(eps > 0.0 && eps < 0.1) || !(delta > 0.0))
        throw DomainError("cauchy_diagnostic needs 0 < delta < eps < 1/10");
    int r = m.correlation_length();
    ReferenceAssembly ae = reference_assembly(f, m, tiles_eps, eps, r, opt);
    ReferenceAssembly ad = reference_assembly(f, m, tiles_delta, delta, r, opt);
    CauchyDiagnostic out;
    out.eps = eps;
    out.delta = delta;
    out.observed = sup_norm_distance(ae.normalized, ad.normalized);
    out.observed_raw = sup_norm_distance(ae.raw, ad.raw);
    out.bound = (9.0 * f.k_f + 11.0 * f.boundary.c_b) * delta +
                5.0 * (4.0 + f.k_f + f.boundary.c_b) * ad.beta_eps;
    return out;
}

// ---------------------------------------------------------------------------
// Convergence experiment.

struct Certificate {
    double observed = 0.0;
    double fine_bound = 0.0;   // (20K_f+30C_b) eps + (17K_f+17C_b+46) beta(eps) + kappa
    double coarse_bound = 0.0; // (37K_f+47C_b+47) sqrt(eps) + kappa
    double kappa = 0.0;
    double beta_eps = 0.0;
    double fstar_band = 0.0;
    bool pass = false;             // observed <= fine_bound + fstar_band
    bool fine_le_coarse = false;
    bool beta_le_sqrt_eps = false;
};

struct ExperimentConfig {
    GroupDescriptor group;
    RandomModel model;
    std::string field_kind = "level_count";
    double coupling = 1.0;

    std::string window_generator = "boxes";
    std::vector<std::int64_t> window_indices;

    std::string tile_selection = "consecutive"; // or "two_n_rule"
    std::string tile_generator;                 // default per group

    std::vector<double> eps_grid;
    double kappa = -1.0; // negative: use sqrt(eps)

    std::vector<std::uint64_t> seeds;

    std::string fstar_method = "analytic"; // or "large_volume"
    LargeVolumeOptions fstar;

    bool with_decomposition = true;
    bool with_gc = true;
    AssemblyOptions assembly;

    double gate_min_pass_frequency = 0.99;
    bool gate_monotone_in_j = true;

    void validate() const {
        if (window_indices.empty() || eps_grid.empty() || seeds.empty())
            throw DomainError("config needs windows, eps grid and seeds");
        for (double e : eps_grid)
            if (!(e > 0.0 && e < 0.1)) throw DomainError("eps grid must lie in (0, 1/10)");
        for (std::size_t i = 1; i < window_indices.size(); ++i)
            if (window_indices[i] <= window_indices[i - 1])
                throw DomainError("window indices must increase");
        for (std::size_t i = 0; i < seeds.size(); ++i)
            for (std::size_t j = i + 1; j < seeds.size(); ++j)
                if (seeds[i] == seeds[j]) throw DomainError("seeds must be distinct");
    }
};

struct RunRow {
    std::int64_t j = 0;
    std::size_t window_size = 0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    Certificate cert;
    bool below_j0 = false;    // tiling construction missed a target
    double gc_distance = -1.0; // max over tiles; negative when skipped
    double decomposition_total_observed = -1.0;
    double decomposition_total_bound = -1.0;
    bool decomposition_consistent = true; // total <= a + sum b_i + sum c_i
    std::optional<ErrorDecomposition> decomposition;
};

struct FrequencyCell {
    double eps = 0.0;
    std::int64_t j = 0;
    std::size_t passes = 0;
    std::size_t runs = 0;
    double frequency() const {
        return runs == 0 ? 0.0 : static_cast<double>(passes) / static_cast<double>(runs);
    }
};

struct ConvergenceReport {
    std::vector<RunRow> rows;
    std::vector<FrequencyCell> frequencies;
    FstarEstimate fstar;
    bool gates_ok = true;
    bool monotone_ok = true;
    std::string field_kind;
};

namespace detail {
inline std::vector<FiniteSubset> materialize_tiles(const ExperimentConfig& cfg,
                                                   const AdmissibleField& field, double eps,
                                                   int r) {
    const std::size_t n = static_cast<std::size_t>(n_of_eps(eps));
    std::string gen = cfg.tile_generator.empty() ? default_folner_generator(cfg.group)
                                                 : cfg.tile_generator;
    FolnerSpec spec;
    if (cfg.tile_selection == "two_n_rule")
        spec = build_nested_folner(cfg.group, n, field.boundary.value, r, gen);
    else
        spec = consecutive_folner(cfg.group, n, gen);
    std::vector<FiniteSubset> tiles;
    tiles.reserve(n);
    for (std::size_t i = 0; i < n; ++i) tiles.push_back(spec.term(i));
    return tiles;
}
} // namespace detail

inline ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    AdmissibleField field = make_field(cfg.field_kind, cfg.group, cfg.coupling);
    const int r = cfg.model.correlation_length();
    const double kf = field.k_f, cb = field.boundary.c_b;

    ConvergenceReport rep;
    rep.field_kind = cfg.field_kind;
    rep.fstar = cfg.fstar_method == "analytic"
                    ? estimate_fstar_analytic(field, cfg.model)
                    : estimate_fstar_large_volume(field, cfg.model, cfg.window_generator, cfg.fstar);
    const bool grid_mode = !rep.fstar.grid.empty();

    // direct normalized observation is eps-independent: cache per (j, seed)
    std::map<std::pair<std::int64_t, std::uint64_t>, double> observed_cache;

    for (double eps : cfg.eps_grid) {
        std::vector<FiniteSubset> tiles = detail::materialize_tiles(cfg, field, eps, r);
        std::vector<double> betas;
        for (const auto& k : tiles) betas.push_back(beta_prime(k, field.boundary.value, r));
        double beta_eps = weighted_eta_bound(betas, eps);
        double kappa = cfg.kappa > 0.0 ? cfg.kappa : std::sqrt(eps);
        double fine = (20.0 * kf + 30.0 * cb) * eps + (17.0 * kf + 17.0 * cb + 46.0) * beta_eps + kappa;
        double coarse = (37.0 * kf + 47.0 * cb + 47.0) * std::sqrt(eps) + kappa;

        for (std::int64_t j : cfg.window_indices) {
            FiniteSubset window = folner_term(cfg.group, cfg.window_generator, j);
            QuasiTiling qt;
            bool below_j0 = false;
            try {
                qt = construct_quasi_tiling(window, tiles, eps, TilingMode::Stp);
            } catch (TilingInfeasible& e) {
                qt = e.partial;
                below_j0 = true;
            }

            // per-tile references for the GC column (cached per eps/j block)
            std::vector<std::optional<StepFunction>> refs(tiles.size());
            if (cfg.with_gc) {
                for (std::size_t i = 0; i < tiles.size(); ++i) {
                    FiniteSubset kr = r_interior(tiles[i], r);
                    if (kr.empty() || qt.centers[i].empty()) continue;
                    if (auto exact = field.exact_reference(kr, cfg.model)) refs[i] = *exact;
                }
            }

            FrequencyCell cell;
            cell.eps = eps;
            cell.j = j;
            for (std::uint64_t seed : cfg.seeds) {
                RunRow row;
                row.j = j;
                row.window_size = window.size();
                row.eps = eps;
                row.seed = seed;
                row.below_j0 = below_j0;
                Coloring om = sample_coloring(cfg.model, window, seed);

                auto key = std::make_pair(j, seed);
                auto hit = observed_cache.find(key);
                double observed;
                if (hit != observed_cache.end()) {
                    observed = hit->second;
                } else if (grid_mode) {
                    GridCounts gc = banded_count_fractions(cfg.group, window, field.coupling, om,
                                                           rep.fstar.grid);
                    std::vector<double> ref_vals(rep.fstar.grid.size());
                    for (std::size_t i = 0; i < rep.fstar.grid.size(); ++i)
                        ref_vals[i] = rep.fstar.f(rep.fstar.grid[i]);
                    observed = sup_distance_on_grid(gc, ref_vals);
                    observed_cache.emplace(key, observed);
                } else {
                    StepFunction direct = field.evaluate(window, om);
                    direct.scale(1.0 / static_cast<double>(window.size()));
                    observed = sup_norm_distance(direct, rep.fstar.f);
                    observed_cache.emplace(key, observed);
                }

                row.cert.observed = observed;
                row.cert.kappa = kappa;
                row.cert.beta_eps = beta_eps;
                row.cert.fine_bound = fine;
                row.cert.coarse_bound = coarse;
                row.cert.fstar_band = rep.fstar.uncertainty_band;
                row.cert.pass = observed <= fine + rep.fstar.uncertainty_band;
                row.cert.fine_le_coarse = fine <= coarse + 1e-12;
                row.cert.beta_le_sqrt_eps = beta_eps <= std::sqrt(eps) + 1e-12;

                if (cfg.with_decomposition && !grid_mode) {
                    auto [approx, dec] = tiling_approximation(field, window, qt, om, r);
                    (void)approx;
                    row.decomposition_total_observed = dec.total_observed;
                    row.decomposition_total_bound = dec.total_bound;
                    row.decomposition_consistent =
                        dec.total_observed <= dec.component_sum() + 1e-9;
                    row.decomposition = std::move(dec);
                }
                if (cfg.with_gc && !grid_mode) {
                    double worst = -1.0;
                    for (std::size_t i = 0; i < tiles.size(); ++i) {
                        if (!refs[i] || qt.centers[i].empty()) continue;
                        FiniteSubset kr = r_interior(tiles[i], r);
                        StepFunction emp = empirical_pairing(field, kr, qt.centers[i], om);
                        emp.scale(1.0 / static_cast<double>(tiles[i].size()));
                        StepFunction ref = *refs[i];
                        ref.scale(1.0 / static_cast<double>(tiles[i].size()));
                        worst = std::max(worst, gc_sup_distance(emp, ref));
                    }
                    row.gc_distance = worst;
                }

                if (row.cert.pass) ++cell.passes;
                ++cell.runs;
                rep.rows.push_back(row);
            }
            rep.frequencies.push_back(cell);
        }
    }

    // gates: per-eps frequency floor plus monotone trend in j
    for (double eps : cfg.eps_grid) {
        double prev = -1.0;
        for (std::int64_t j : cfg.window_indices) {
            for (const auto& cell : rep.frequencies)
                if (cell.eps == eps && cell.j == j) {
                    if (cell.frequency() + 1e-12 < cfg.gate_min_pass_frequency) rep.gates_ok = false;
                    if (cfg.gate_monotone_in_j && cell.frequency() + 1e-12 < prev)
                        rep.monotone_ok = false;
                    prev = cell.frequency();
                }
        }
    }
    if (!rep.monotone_ok) rep.gates_ok = false;
    return rep;
}

} // namespace quasitile
