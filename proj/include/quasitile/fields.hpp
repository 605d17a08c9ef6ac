#pragma once

// Admissible fields: set-indexed maps into step functions that are
// equivariant, local, almost additive with a boundary term, antitone in the
// coloring, and bounded per site.  Two concrete instances: the exactly
// additive level-count field and the eigenvalue-count field of
// H = A + coupling * diag(omega) on the Cayley graph.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quasitile/eig.hpp"
#include "quasitile/errors.hpp"
#include "quasitile/geometry.hpp"
#include "quasitile/model.hpp"
#include "quasitile/rng.hpp"
#include "quasitile/step_function.hpp"

namespace quasitile {

struct BoundaryTerm {
    std::string kind = "zero";
    double c_b = 0.0; // b(L) <= c_b |L|
    BoundaryFn value = zero_boundary_fn();

    static BoundaryTerm zero() { return BoundaryTerm{}; }

    // b(L) = 2 |S| |inner 1-boundary of L|; rank of the edge-cut perturbation
    // bounds the eigenvalue-count displacement.
    static BoundaryTerm edge_cut(const GroupDescriptor& g) {
        BoundaryTerm b;
        b.kind = "edge_cut";
        double s = static_cast<double>(generators(g).size());
        b.c_b = 2.0 * s;
        b.value = [g, s](const FiniteSubset& lam) {
            if (lam.empty()) return 0.0;
            FiniteSubset inner = set_intersection(r_boundary(lam, 1), lam);
            return 2.0 * s * static_cast<double>(inner.size());
        };
        return b;
    }
};

class AdmissibleField {
public:
    std::string kind;
    GroupDescriptor group;
    double k_f = 0.0; // sup ||f(L, .)|| / |L|
    BoundaryTerm boundary;
    double coupling = 0.0;            // eigenvalue field only
    std::size_t dense_cap = 4096;     // largest window the dense solver accepts

    StepFunction evaluate(const FiniteSubset& lam, const Coloring& omega) const {
        // locality is structural: only the restriction is ever seen
        return eval_fn_(lam, restrict_coloring(omega, lam));
    }

    // Exact <f_K, P_K> when the field admits a closed form under the model.
    std::optional<StepFunction> exact_reference(const FiniteSubset& k, const RandomModel& m) const {
        if (!exact_ref_fn_) return std::nullopt;
        return exact_ref_fn_(k, m);
    }

    using EvalFn = std::function<StepFunction(const FiniteSubset&, const Coloring&)>;
    using ExactRefFn = std::function<std::optional<StepFunction>(const FiniteSubset&, const RandomModel&)>;

    static AdmissibleField make(std::string kind, GroupDescriptor g, double k_f, BoundaryTerm b,
                                EvalFn eval, ExactRefFn exact_ref = nullptr) {
        AdmissibleField f;
        f.kind = std::move(kind);
        f.group = g;
        f.k_f = k_f;
        f.boundary = std::move(b);
        f.eval_fn_ = std::move(eval);
        f.exact_ref_fn_ = std::move(exact_ref);
        return f;
    }

private:
    EvalFn eval_fn_;
    ExactRefFn exact_ref_fn_;
};

// f(L, omega)(E) = #{g in L : omega_g <= E}; exactly additive, b == 0, K_f = 1.
inline AdmissibleField level_count_field(const GroupDescriptor& g) {
    auto eval = [](const FiniteSubset& lam, const Coloring& om) {
        std::vector<double> vals = om.values;
        std::sort(vals.begin(), vals.end());
        std::vector<double> jumps(vals.size(), 1.0);
        (void)lam;
        return StepFunction::staircase(vals, jumps);
    };
    auto exact_ref = [](const FiniteSubset& k,
                        const RandomModel& m) -> std::optional<StepFunction> {
        // E[count](E) = sum_g P(omega_g <= E) = |K| F(E) for identical marginals
        if (m.dependence != RandomModel::Dependence::Product) return std::nullopt;
        MarginalCdf cdf = marginal_cdf(m);
        if (!cdf.has_step) return std::nullopt;
        StepFunction out = cdf.step;
        out.scale(static_cast<double>(k.size()));
        return out;
    };
    return AdmissibleField::make("level_count", g, 1.0, BoundaryTerm::zero(), eval, exact_ref);
}

namespace detail {
inline std::vector<double> cayley_hamiltonian(const GroupDescriptor& g, const FiniteSubset& lam,
                                              const Coloring& om, double coupling) {
    const std::size_t n = lam.size();
    std::vector<double> h(n * n, 0.0);
    auto gens = generators(g);
    for (std::size_t i = 0; i < n; ++i) {
        h[i * n + i] = coupling * om.values[i];
        for (const auto& s : gens) {
            GroupElement y = multiply(g, s, lam.elements()[i]);
            std::size_t j = lam.index_of(y);
            if (j != FiniteSubset::npos) h[i * n + j] = 1.0;
        }
    }
    return h;
}
} // namespace detail

// f(L, omega)(E) = #{eigenvalues of A_L + coupling diag(omega) <= E}.
inline AdmissibleField eigenvalue_count_field(const GroupDescriptor& g, double coupling = 1.0,
                                              std::size_t dense_cap = 4096) {
    auto eval = [g, coupling, dense_cap](const FiniteSubset& lam, const Coloring& om) {
        const std::size_t n = lam.size();
        if (n == 0) return StepFunction();
        if (n > dense_cap) throw ResourceLimit("window too large for the dense eigensolver");
        std::vector<double> h = detail::cayley_hamiltonian(g, lam, om, coupling);
        std::vector<double> evs = sym_eigenvalues(std::move(h), n);
        std::vector<double> jumps(evs.size(), 1.0);
        return StepFunction::staircase(evs, jumps);
    };
    AdmissibleField f = AdmissibleField::make("eigenvalue_count", g, 1.0,
                                              BoundaryTerm::edge_cut(g), eval);
    f.coupling = coupling;
    f.dense_cap = dense_cap;
    return f;
}

inline AdmissibleField make_field(const std::string& kind, const GroupDescriptor& g,
                                  double coupling = 1.0) {
    if (kind == "level_count") return level_count_field(g);
    if (kind == "eigenvalue_count") return eigenvalue_count_field(g, coupling);
    throw Unsupported("unknown field kind: " + kind);
}

// ---------------------------------------------------------------------------
// Randomized admissibility verification.

struct AdmissibilityReport {
    bool equivariance_ok = true;   // f(Lg, w) == f(L, tau_g w)
    bool locality_ok = true;       // value depends on the restriction only
    bool almost_additive_ok = true;
    bool antitone_ok = true;
    bool bounded_ok = true;
    double max_site_norm = 0.0;
    double max_additivity_slack = 0.0; // max(gap - sum b) over trials
    std::vector<std::string> counterexamples;

    bool all_ok() const {
        return equivariance_ok && locality_ok && almost_additive_ok && antitone_ok && bounded_ok;
    }
};

namespace detail {
// Random connected-ish subset around the identity: a seeded walk.
inline FiniteSubset random_window(const GroupDescriptor& g, SeqRng& rng, std::size_t target) {
    auto gens = generators(g);
    std::vector<GroupElement> pool{identity(g)};
    std::unordered_set<GroupElement, ElementHash> seen{identity(g)};
    while (pool.size() < target) {
        const GroupElement& base = pool[rng.below(pool.size())];
        const GroupElement& s = gens[rng.below(gens.size())];
        GroupElement nxt = multiply(g, s, base);
        if (seen.insert(nxt).second) pool.push_back(nxt);
    }
    return FiniteSubset::from_elements(g, std::move(pool));
}

inline GroupElement random_element(const GroupDescriptor& g, SeqRng& rng, int word_len) {
    auto gens = generators(g);
    GroupElement e = identity(g);
    for (int i = 0; i < word_len; ++i) e = multiply(g, gens[rng.below(gens.size())], e);
    return e;
}

// max over probe points of (f - g), ignoring slivers narrower than xtol;
// counting staircases place breakpoints only to eigenvalue accuracy.
inline double max_excess_guarded(const StepFunction& f, const StepFunction& g, double xtol) {
    std::vector<double> xs;
    xs.reserve(f.breakpoints().size() + g.breakpoints().size());
    xs.insert(xs.end(), f.breakpoints().begin(), f.breakpoints().end());
    xs.insert(xs.end(), g.breakpoints().begin(), g.breakpoints().end());
    std::sort(xs.begin(), xs.end());
    double lo = xs.empty() ? 0.0 : xs.front() - 1.0;
    double m = f(lo) - g(lo);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i + 1 < xs.size() && xs[i + 1] - xs[i] <= xtol) continue;
        double probe = xs[i] + 0.5 * xtol;
        m = std::max(m, f(probe) - g(probe));
    }
    return m;
}

// Staircase equality tolerant to breakpoint jitter below xtol (needed when a
// permuted eigenproblem reproduces the same spectrum to rounding).
inline bool steps_equal_guarded(const StepFunction& f, const StepFunction& g, double xtol,
                                double vtol) {
    std::vector<double> xs;
    xs.reserve(f.breakpoints().size() + g.breakpoints().size());
    xs.insert(xs.end(), f.breakpoints().begin(), f.breakpoints().end());
    xs.insert(xs.end(), g.breakpoints().begin(), g.breakpoints().end());
    std::sort(xs.begin(), xs.end());
    double lo = xs.empty() ? 0.0 : xs.front() - 1.0;
    if (std::abs(f(lo) - g(lo)) > vtol) return false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i + 1 < xs.size() && xs[i + 1] - xs[i] <= xtol) continue; // skip sliver
        double probe = xs[i] + 0.5 * xtol;
        if (std::abs(f(probe) - g(probe)) > vtol) return false;
    }
    return true;
}
} // namespace detail

inline AdmissibilityReport check_admissibility(const AdmissibleField& f, const RandomModel& model,
                                               int trials, std::uint64_t seed) {
    if (trials < 1) throw DomainError("check_admissibility needs trials >= 1");
    AdmissibilityReport rep;
    SeqRng rng(seed);
    const GroupDescriptor& g = f.group;
    const bool bit_exact = f.kind != "eigenvalue_count" || g.kind != GroupKind::Lamplighter;

    for (int trial = 0; trial < trials; ++trial) {
        std::size_t wsize = 2 + rng.below(18);
        FiniteSubset lam = detail::random_window(g, rng, wsize);
        GroupElement t = detail::random_element(g, rng, 1 + static_cast<int>(rng.below(4)));
        FiniteSubset lam_t = translate_set(lam, t);
        FiniteSubset big = set_union(lam, lam_t);
        big = set_union(big, translate_set(big, detail::random_element(g, rng, 2)));
        Coloring om = sample_coloring(model, big, rng.next());

        // (A1): f(L t, omega) == f(L, tau_t omega)
        StepFunction lhs = f.evaluate(lam_t, om);
        Coloring shifted = translate_coloring(restrict_coloring(om, lam_t), t);
        StepFunction rhs = f.evaluate(lam, shifted);
        bool eq = bit_exact ? lhs == rhs : detail::steps_equal_guarded(lhs, rhs, 1e-9, 1e-7);
        if (!eq) {
            rep.equivariance_ok = false;
            rep.counterexamples.push_back("equivariance trial " + std::to_string(trial));
        }

        // (A2): padding the coloring outside L changes nothing
        Coloring padded = sample_coloring(model, big, rng.next());
        for (std::size_t i = 0; i < big.size(); ++i) {
            std::size_t idx = lam.index_of(big.elements()[i]);
            if (idx != FiniteSubset::npos) padded.values[i] = om.at(big.elements()[i]);
        }
        if (!(f.evaluate(lam, om) == f.evaluate(lam, padded))) {
            rep.locality_ok = false;
            rep.counterexamples.push_back("locality trial " + std::to_string(trial));
        }

        // (A3): disjoint family
        {
            std::vector<FiniteSubset> parts;
            FiniteSubset used(g);
            std::size_t pieces = 2 + rng.below(3);
            for (std::size_t p = 0; p < pieces; ++p) {
                FiniteSubset cand = detail::random_window(g, rng, 2 + rng.below(8));
                GroupElement off = detail::random_element(g, rng, 2 + static_cast<int>(rng.below(6)));
                cand = translate_set(cand, off);
                cand = set_difference(cand, used);
                if (cand.empty()) continue;
                used = set_union(used, cand);
                parts.push_back(cand);
            }
            if (parts.size() >= 2) {
                Coloring om2 = sample_coloring(model, used, rng.next());
                StepFunction whole = f.evaluate(used, om2);
                std::vector<StepFunction> termv;
                double bsum = 0.0;
                for (const auto& p : parts) {
                    termv.push_back(f.evaluate(p, om2));
                    bsum += f.boundary.value(p);
                }
                double gap = sup_norm_distance(whole, sum_tree(std::move(termv)));
                rep.max_additivity_slack = std::max(rep.max_additivity_slack, gap - bsum);
                if (gap > bsum + 1e-9) {
                    rep.almost_additive_ok = false;
                    rep.counterexamples.push_back("almost additivity trial " + std::to_string(trial));
                }
            }
        }

        // (A4): raising one coordinate never raises the function (guarded
        // against breakpoint jitter at eigenvalue accuracy)
        {
            Coloring raised = om;
            std::size_t which = rng.below(raised.values.size());
            raised.values[which] += 0.5 + rng.uniform01();
            StepFunction before = f.evaluate(lam, om);
            StepFunction after = f.evaluate(lam, raised);
            if (detail::max_excess_guarded(after, before, 1e-9) > 1e-9) {
                rep.antitone_ok = false;
                rep.counterexamples.push_back("antitone trial " + std::to_string(trial));
            }
        }

        // (A5): per-site norm
        {
            FiniteSubset site = FiniteSubset::from_elements(g, {identity(g)});
            Coloring om1 = sample_coloring(model, site, rng.next());
            rep.max_site_norm = std::max(rep.max_site_norm, sup_norm(f.evaluate(site, om1)));
        }
    }
    rep.bounded_ok = rep.max_site_norm < 1e12;
    return rep;
}

// ---------------------------------------------------------------------------
// Quasi additivity over eps-disjoint families.

struct EpsDisjointFamily {
    std::vector<FiniteSubset> sets;
    std::vector<FiniteSubset> cores; // witness, parallel to sets
    double eps = 0.0;

    void validate() const {
        if (cores.size() != sets.size()) throw WitnessMissing("family lacks core witnesses");
        for (std::size_t i = 0; i < sets.size(); ++i) {
            if (!is_subset(cores[i], sets[i])) throw WitnessMissing("core not inside its set");
            double defect = static_cast<double>(sets[i].size() - cores[i].size());
            if (defect > eps * static_cast<double>(sets[i].size()) + 1e-12)
                throw WitnessMissing("core defect exceeds eps fraction");
            for (std::size_t j = 0; j < i; ++j)
                if (intersection_size(cores[i], cores[j]) != 0)
                    throw WitnessMissing("cores are not pairwise disjoint");
        }
    }
};

// gap = ||f(Q, omega) - sum_i f(Q_i, omega)||, Q = union;
// bound = eps (3 K_f + 9 C_b) |Q| + 3 sum_i b(Q_i)
inline std::pair<double, double> quasi_additivity_gap(const AdmissibleField& f,
                                                      const EpsDisjointFamily& fam,
                                                      const Coloring& om) {
    fam.validate();
    FiniteSubset q(fam.sets.empty() ? f.group : fam.sets[0].group());
    for (const auto& s : fam.sets) q = set_union(q, s);
    StepFunction whole = f.evaluate(q, om);
    std::vector<StepFunction> termv;
    double bsum = 0.0;
    for (const auto& s : fam.sets) {
        termv.push_back(f.evaluate(s, om));
        bsum += f.boundary.value(s);
    }
    double gap = sup_norm_distance(whole, sum_tree(std::move(termv)));
    double bound = fam.eps * (3.0 * f.k_f + 9.0 * f.boundary.c_b) * static_cast<double>(q.size()) +
                   3.0 * bsum;
    return {gap, bound};
}

} // namespace quasitile
