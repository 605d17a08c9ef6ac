#pragma once

// Empirical pairings <f_K, L^omega(K,T)>, reference pairings <f_K, P_K>,
// the tiling approximation with its a / b_i / c_i error split, and the
// Glivenko-Cantelli sup distance between empirical and reference staircases.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quasitile/errors.hpp"
#include "quasitile/fields.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/model.hpp"
#include "quasitile/step_function.hpp"
#include "quasitile/tiling.hpp"

namespace quasitile {

// (1/|T|) sum_{t in T} f(K t, omega)
inline StepFunction empirical_pairing(const AdmissibleField& f, const FiniteSubset& k,
                                      const std::vector<GroupElement>& centers,
                                      const Coloring& om) {
    if (k.empty() || centers.empty()) throw EmptySet("empirical_pairing needs nonempty K and T");
    std::vector<StepFunction> terms;
    terms.reserve(centers.size());
    for (const auto& t : centers) terms.push_back(f.evaluate(translate_set(k, t), om));
    StepFunction s = sum_tree(std::move(terms));
    s.scale(1.0 / static_cast<double>(centers.size()));
    return s;
}

struct PairingReference {
    StepFunction mean;
    StepFunction stderr_fn; // zero for exact references
    double stderr_sup = 0.0;
    bool exact = false;
};

struct McOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::size_t batches = 20;
};

// Exact <f_K, P_K>: closed form when the field provides one, otherwise full
// enumeration of the window measure.
inline PairingReference reference_pairing_exact(const AdmissibleField& f, const FiniteSubset& k,
                                                const RandomModel& m,
                                                std::size_t config_cap = (1u << 20)) {
    PairingReference out;
    out.exact = true;
    if (auto closed = f.exact_reference(k, m)) {
        out.mean = *closed;
        return out;
    }
    auto configs = enumerate_window_measure(m, k, config_cap);
    std::vector<StepFunction> terms;
    terms.reserve(configs.size());
    for (auto& [coloring, weight] : configs) {
        StepFunction s = f.evaluate(k, coloring);
        s.scale(weight);
        terms.push_back(std::move(s));
    }
    out.mean = sum_tree(std::move(terms));
    return out;
}

// Monte Carlo reference with batch-means standard errors.
inline PairingReference reference_pairing_mc(const AdmissibleField& f, const FiniteSubset& k,
                                             const RandomModel& m, const McOptions& opt) {
    if (opt.samples < opt.batches || opt.batches < 2)
        throw DomainError("mc reference needs samples >= batches >= 2");
    const std::size_t per = opt.samples / opt.batches;
    std::vector<StepFunction> batch_means;
    batch_means.reserve(opt.batches);
    std::uint64_t ctr = 0;
    for (std::size_t b = 0; b < opt.batches; ++b) {
        std::vector<StepFunction> terms;
        terms.reserve(per);
        for (std::size_t s = 0; s < per; ++s) {
            KeyedStream ks(opt.seed);
            ks.absorb(0x4Du).absorb(static_cast<std::uint64_t>(ctr++));
            Coloring om = sample_coloring(m, k, ks.bits());
            terms.push_back(f.evaluate(k, om));
        }
        StepFunction mean = sum_tree(std::move(terms));
        mean.scale(1.0 / static_cast<double>(per));
        batch_means.push_back(std::move(mean));
    }
    PairingReference out;
    out.mean = sum_tree(batch_means); // copies stay in batch_means
    out.mean.scale(1.0 / static_cast<double>(opt.batches));
    StepFunction var;
    for (const auto& bm : batch_means) {
        StepFunction d = bm - out.mean;
        var = var + StepFunction::combine(d, d, [](double a, double b) { return a * b; });
    }
    double denom = static_cast<double>(opt.batches) * static_cast<double>(opt.batches - 1);
    out.stderr_fn = StepFunction::combine(var, StepFunction::constant(0.0),
                                          [denom](double a, double) { return std::sqrt(a / denom); });
    out.stderr_sup = sup_norm(out.stderr_fn);
    return out;
}

// sup over E of |empirical - reference| for staircases normalized alike.
inline double gc_sup_distance(const StepFunction& empirical, const StepFunction& reference) {
    return sup_norm_distance(empirical, reference);
}

struct ErrorDecomposition {
    double eps = 0.0;
    int r = 0;
    double a_observed = 0.0;
    double a_bound = 0.0;
    std::vector<double> b_observed, b_bound;
    std::vector<double> c_observed, c_bound;
    double total_observed = 0.0; // ||f(L,w)/|L| - assembly||
    double total_bound = 0.0;    // (9K_f+15C_b) eps + 12(2+K_f+C_b) beta(eps)
    double beta_eps = 0.0;
    bool beta_monotone = true;
    std::vector<std::size_t> centers_used;

    double component_sum() const {
        double s = a_observed;
        for (double v : b_observed) s += v;
        for (double v : c_observed) s += v;
        return s;
    }
};

// Assembly sum_i eta_i <f_i^r, L_{i}^{r,omega}> / |K_i| over the tiling's
// centers, with the observed and theoretical error components.  Tiles with no
// placed translate contribute nothing (their miss is charged to the a-term).
inline std::pair<StepFunction, ErrorDecomposition> tiling_approximation(
    const AdmissibleField& f, const FiniteSubset& lam, const QuasiTiling& qt, const Coloring& om,
    int r) {
    if (!(qt.diagnostics.contained && qt.diagnostics.cross_disjoint && qt.diagnostics.eps_disjoint))
        throw TilingUnverified("tiling failed structural verification");
    if (!(lam == qt.window)) throw TilingUnverified("tiling was built for a different window");
    if (!is_subset(lam, om.window)) throw OutOfWindow("window exceeds the coloring");

    const std::size_t n = qt.tiles.size();
    const double win = static_cast<double>(lam.size());
    const double kf = f.k_f, cb = f.boundary.c_b;

    ErrorDecomposition dec;
    dec.eps = qt.eps;
    dec.r = r;
    dec.b_observed.assign(n, 0.0);
    dec.b_bound.assign(n, 0.0);
    dec.c_observed.assign(n, 0.0);
    dec.c_bound.assign(n, 0.0);
    dec.centers_used.assign(n, 0);

    StepFunction direct = f.evaluate(lam, om);
    direct.scale(1.0 / win);

    std::vector<StepFunction> all_translates; // for the a-term
    std::vector<StepFunction> assembly_terms;
    double sum_eta_b_over_k = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const FiniteSubset& k = qt.tiles[i];
        const FiniteSubset kr = r_interior(k, r);
        const double ki = static_cast<double>(k.size());
        const double eta_i = eta_or_zero(qt.eps, static_cast<int>(i) + 1);
        const double bk = f.boundary.value(k);
        const double bkr = f.boundary.value(kr);
        const double bdry_r = static_cast<double>(r_boundary(k, r).size());
        sum_eta_b_over_k += eta_i * bk / ki;
        dec.b_bound[i] = 4.0 * kf * qt.eps * eta_i;
        dec.c_bound[i] = eta_i * (bkr + (kf + cb) * bdry_r) / ki;
        dec.centers_used[i] = qt.centers[i].size();
        if (qt.centers[i].empty()) continue;

        std::vector<StepFunction> full_terms, interior_terms;
        full_terms.reserve(qt.centers[i].size());
        interior_terms.reserve(qt.centers[i].size());
        for (const auto& t : qt.centers[i]) {
            full_terms.push_back(f.evaluate(translate_set(k, t), om));
            interior_terms.push_back(kr.empty() ? StepFunction()
                                                : f.evaluate(translate_set(kr, t), om));
        }
        for (const auto& s : full_terms) all_translates.push_back(s);

        const double nt = static_cast<double>(qt.centers[i].size());
        StepFunction pairing_full = sum_tree(full_terms);
        StepFunction translate_sum = pairing_full; // sum_t f(K_i t, omega)
        pairing_full.scale(1.0 / nt);
        StepFunction pairing_interior = sum_tree(interior_terms);
        pairing_interior.scale(1.0 / nt);

        StepFunction assembly_i = pairing_interior;
        assembly_i.scale(eta_i / ki);
        assembly_terms.push_back(assembly_i);

        StepFunction lhs = translate_sum;
        lhs.scale(1.0 / win);
        StepFunction rhs = pairing_full;
        rhs.scale(eta_i / ki);
        dec.b_observed[i] = sup_norm_distance(lhs, rhs);
        dec.c_observed[i] = (eta_i / ki) * sup_norm_distance(pairing_full, pairing_interior);
    }

    StepFunction approx = sum_tree(std::move(assembly_terms));
    StepFunction whole = f.evaluate(lam, om);
    StepFunction translate_total = sum_tree(std::move(all_translates));
    dec.a_observed = sup_norm_distance(whole, translate_total) / win;
    dec.a_bound = (5.0 * kf + 15.0 * cb) * qt.eps + 12.0 * sum_eta_b_over_k;
    dec.total_observed = sup_norm_distance(direct, approx);

    // beta(eps) from the tile chain; weighted_eta_bound degrades gracefully
    // when the beta' sequence is not monotone.  Above the 1/10 range the
    // sqrt-eps split does not apply and the eta-weighted sum stands in.
    std::vector<double> betas;
    betas.reserve(n);
    for (const auto& k : qt.tiles) betas.push_back(beta_prime(k, f.boundary.value, r));
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (betas[i] > betas[i - 1] + 1e-15) dec.beta_monotone = false;
    if (qt.eps < 0.1 && n >= static_cast<std::size_t>(n_of_eps(qt.eps))) {
        dec.beta_eps = weighted_eta_bound(betas, qt.eps);
    } else {
        // manual short chains / large eps: the eta-weighted sum stands in
        dec.beta_eps = 0.0;
        std::size_t lim = std::min<std::size_t>(n, static_cast<std::size_t>(n_of_eps(qt.eps)));
        for (std::size_t i = 0; i < lim; ++i)
            dec.beta_eps += eta_or_zero(qt.eps, static_cast<int>(i) + 1) * betas[i];
    }
    dec.total_bound = (9.0 * kf + 15.0 * cb) * qt.eps + 12.0 * (2.0 + kf + cb) * dec.beta_eps;
    return {approx, dec};
}

} // namespace quasitile
