#pragma once

// Resampling for product measures on finite windows: the overlap-free cores
// U^{i,t} on which the base configuration is kept, fresh independent draws on
// the rest of each K_i^r t, the substitution bound, and a statistical
// independence audit with a deliberate shared-stream negative control.

#include <cstdint>
#include <string>
#include <vector>

#include "quasitile/errors.hpp"
#include "quasitile/fields.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/model.hpp"
#include "quasitile/rng.hpp"
#include "quasitile/stats.hpp"
#include "quasitile/step_function.hpp"
#include "quasitile/tiling.hpp"

namespace quasitile {

struct CoreFamily {
    // cores[i][j] corresponds to qt.centers[i][j]
    std::vector<std::vector<FiniteSubset>> cores;
    bool distance_ok = true;   // pairwise d(U,U') > r within each tile index
    bool exhaustion_ok = true; // |K_i^r t \ U| <= eps |K_i^r| for every translate
    double max_core_defect_fraction = 0.0;
};

// U^{i,t} = (K_i^r t) \ ( K_i (T_i \ {t}) )
inline CoreFamily overlap_free_cores(const QuasiTiling& qt, int r) {
    if (!(qt.diagnostics.contained && qt.diagnostics.cross_disjoint && qt.diagnostics.eps_disjoint))
        throw TilingUnverified("tiling failed structural verification");
    CoreFamily fam;
    fam.cores.resize(qt.tiles.size());
    const GroupDescriptor& gd = qt.window.group();

    for (std::size_t i = 0; i < qt.tiles.size(); ++i) {
        const FiniteSubset& k = qt.tiles[i];
        FiniteSubset kr = r_interior(k, r);
        const auto& centers = qt.centers[i];
        // coverage multiplicity within tile i
        std::unordered_map<GroupElement, int, ElementHash> multiplicity;
        std::vector<FiniteSubset> translates;
        translates.reserve(centers.size());
        for (const auto& t : centers) {
            FiniteSubset kt = translate_set(k, t);
            for (const auto& p : kt.elements()) ++multiplicity[p];
            translates.push_back(std::move(kt));
        }
        for (std::size_t j = 0; j < centers.size(); ++j) {
            FiniteSubset krt = translate_set(kr, centers[j]);
            std::vector<GroupElement> keep;
            for (const auto& p : krt.elements())
                if (multiplicity[p] == 1) keep.push_back(p); // covered by this translate only
            FiniteSubset u = FiniteSubset::from_elements(gd, std::move(keep));
            double defect = static_cast<double>(krt.size() - u.size());
            double frac = kr.empty() ? 0.0 : defect / static_cast<double>(kr.size());
            fam.max_core_defect_fraction = std::max(fam.max_core_defect_fraction, frac);
            if (defect > qt.eps * static_cast<double>(kr.size())) fam.exhaustion_ok = false;
            fam.cores[i].push_back(std::move(u));
        }
        // pairwise distance > r
        for (std::size_t a = 0; a < fam.cores[i].size(); ++a)
            for (std::size_t b = a + 1; b < fam.cores[i].size(); ++b) {
                if (fam.cores[i][a].empty() || fam.cores[i][b].empty()) continue;
                if (r > 0 && sets_within_distance(fam.cores[i][a], fam.cores[i][b],
                                                  static_cast<std::size_t>(r)))
                    fam.distance_ok = false;
                if (r == 0 && intersection_size(fam.cores[i][a], fam.cores[i][b]) > 0)
                    fam.distance_ok = false;
            }
    }
    return fam;
}

enum class StreamKeying {
    PerTranslate,      // fresh draws keyed by (seed, i, t, site)
    SharedAcrossCenters // negative control: keyed by (seed, i, in-tile offset)
};

struct ResampleFamily {
    Coloring base;
    // parallel to qt.centers: configurations on K_i^r t and their kept cores
    std::vector<std::vector<Coloring>> configs;
    CoreFamily cores;
    std::uint64_t seed = 0;
    StreamKeying keying = StreamKeying::PerTranslate;
};

inline ResampleFamily resample(const Coloring& om, const QuasiTiling& qt, const RandomModel& m,
                               int r, std::uint64_t seed,
                               StreamKeying keying = StreamKeying::PerTranslate) {
    if (m.dependence != RandomModel::Dependence::Product)
        throw UnsupportedModel("resampling is defined for product models only");
    ResampleFamily fam;
    fam.base = om;
    fam.seed = seed;
    fam.keying = keying;
    fam.cores = overlap_free_cores(qt, r);
    fam.configs.resize(qt.tiles.size());
    const GroupDescriptor& gd = qt.window.group();

    for (std::size_t i = 0; i < qt.tiles.size(); ++i) {
        FiniteSubset kr = r_interior(qt.tiles[i], r);
        for (std::size_t j = 0; j < qt.centers[i].size(); ++j) {
            const GroupElement& t = qt.centers[i][j];
            const GroupElement t_inv = inverse(gd, t);
            FiniteSubset krt = translate_set(kr, t);
            const FiniteSubset& u = fam.cores.cores[i][j];
            Coloring x;
            x.window = krt;
            x.values.reserve(krt.size());
            for (const auto& p : krt.elements()) {
                if (u.contains(p)) {
                    x.values.push_back(om.at(p));
                } else {
                    KeyedStream ks(seed);
                    ks.absorb(0x52u).absorb(static_cast<std::uint64_t>(i));
                    if (keying == StreamKeying::PerTranslate) {
                        t.absorb_into(ks);
                        p.absorb_into(ks);
                    } else {
                        multiply(gd, p, t_inv).absorb_into(ks); // in-tile offset only
                    }
                    x.values.push_back(m.law.draw(ks.uniform01()));
                }
            }
            fam.configs[i].push_back(std::move(x));
        }
    }
    return fam;
}

// 2 b(K) + 2 (2 C_b + K_f) |K \ U|; dominates ||f(w,K) - f(w~,K)|| whenever
// the configurations agree on U.
inline double substitution_bound(const AdmissibleField& f, const FiniteSubset& k,
                                 const FiniteSubset& u) {
    if (!is_subset(u, k)) throw NotASubset("U must be a subset of K");
    double missing = static_cast<double>(k.size() - u.size());
    return 2.0 * f.boundary.value(k) + 2.0 * (2.0 * f.boundary.c_b + f.k_f) * missing;
}

struct AuditReport {
    double max_abs_correlation = 0.0;
    bool dependence_flagged = false; // > 0.05
    bool degenerate = false;         // all series constant (atomic law)
    double max_ks_distance = 0.0;
    std::size_t pairs_checked = 0;
    std::size_t trials = 0;
    bool cores_exact_every_run = true;
};

// Across master seeds: resample, evaluate each translate's field value at a
// few energy levels, and correlate series across translates of the same tile.
// Also KS-checks the pooled resampled coordinates against the color law.
inline AuditReport independence_audit(const QuasiTiling& qt, const RandomModel& m,
                                      const AdmissibleField& f, int r, int trials,
                                      std::uint64_t seed,
                                      StreamKeying keying = StreamKeying::PerTranslate) {
    if (trials < 100) throw DomainError("independence_audit needs trials >= 100");
    AuditReport rep;
    rep.trials = static_cast<std::size_t>(trials);

    // probe energies: law quantiles
    std::vector<double> levels;
    for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        if (m.law.kind == ColorDistribution::Kind::FinitePmf) {
            double acc = 0.0;
            double lv = m.law.support.back();
            for (std::size_t i = 0; i < m.law.support.size(); ++i) {
                acc += m.law.weights[i];
                if (q <= acc) { lv = m.law.support[i]; break; }
            }
            levels.push_back(lv);
        } else {
            levels.push_back(q);
        }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    // series[i][j][level] over trials
    std::vector<std::vector<std::vector<std::vector<double>>>> series(qt.tiles.size());
    for (std::size_t i = 0; i < qt.tiles.size(); ++i)
        series[i].assign(qt.centers[i].size(),
                         std::vector<std::vector<double>>(levels.size()));
    std::vector<double> pooled_resampled;

    for (int trial = 0; trial < trials; ++trial) {
        KeyedStream ks(seed);
        ks.absorb(0xA0u).absorb(static_cast<std::uint64_t>(trial));
        std::uint64_t master = ks.bits();
        Coloring om = sample_coloring(m, qt.window, master);
        ResampleFamily fam = resample(om, qt, m, r, mix64(master ^ 0x5EEDu), keying);
        for (std::size_t i = 0; i < qt.tiles.size(); ++i) {
            FiniteSubset kr = r_interior(qt.tiles[i], r);
            if (kr.empty()) continue;
            for (std::size_t j = 0; j < qt.centers[i].size(); ++j) {
                const Coloring& x = fam.configs[i][j];
                // exact agreement on the kept core
                const FiniteSubset& u = fam.cores.cores[i][j];
                for (const auto& p : u.elements())
                    if (x.at(p) != om.at(p)) rep.cores_exact_every_run = false;
                for (std::size_t w = 0; w < x.window.size(); ++w)
                    if (!u.contains(x.window.elements()[w]))
                        pooled_resampled.push_back(x.values[w]);
                StepFunction val = f.evaluate(x.window, x);
                for (std::size_t lv = 0; lv < levels.size(); ++lv)
                    series[i][j][lv].push_back(val(levels[lv]));
            }
        }
    }

    bool any_variance = false;
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t a = 0; a < series[i].size(); ++a)
            for (std::size_t b = a + 1; b < series[i].size(); ++b)
                for (std::size_t lv = 0; lv < levels.size(); ++lv) {
                    const auto& xa = series[i][a][lv];
                    const auto& xb = series[i][b][lv];
                    if (xa.size() < 2) continue;
                    double va = 0.0, vb = 0.0, ma = 0.0, mb = 0.0;
                    for (double v : xa) ma += v;
                    for (double v : xb) mb += v;
                    ma /= xa.size();
                    mb /= xb.size();
                    for (double v : xa) va += (v - ma) * (v - ma);
                    for (double v : xb) vb += (v - mb) * (v - mb);
                    if (va == 0.0 || vb == 0.0) continue; // degenerate pair
                    any_variance = true;
                    double rho = pearson_correlation(xa, xb);
                    rep.max_abs_correlation = std::max(rep.max_abs_correlation, std::abs(rho));
                    ++rep.pairs_checked;
                }
    }
    rep.degenerate = !any_variance;
    rep.dependence_flagged = rep.max_abs_correlation > 0.05;
    if (!pooled_resampled.empty()) {
        const ColorDistribution law = m.law;
        rep.max_ks_distance =
            ks_distance(pooled_resampled, [&law](double e) { return law.cdf(e); });
    }
    return rep;
}

} // namespace quasitile
