#pragma once

// Quasi-tiling machinery: the shape count N(eps), target densities
// eta_i(eps), deterministic greedy tile placement, and verification of the
// disjointness / covering / density requirements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "quasitile/errors.hpp"
#include "quasitile/geometry.hpp"

namespace quasitile {

// N(eps) = ceil(ln(eps) / ln(1-eps)), evaluated in extended precision with an
// integrality guard: N is the smallest n >= 1 with (1-eps)^n <= eps, so the
// ceiling never misrounds when the quotient happens to be an integer.
inline int n_of_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("n_of_eps requires eps in (0,1)");
    long double le = std::log(static_cast<long double>(eps));
    long double l1 = std::log(1.0L - static_cast<long double>(eps));
    long double q = le / l1;
    long long n = static_cast<long long>(std::ceil(q - 1e-9L));
    if (n < 1) n = 1;
    // adjust by the defining inequality (1-eps)^n <= eps < (1-eps)^(n-1)
    auto ok = [&](long long m) {
        return m * l1 <= le; // logs are negative; m*ln(1-eps) <= ln(eps) iff (1-eps)^m <= eps
    };
    while (!ok(n)) ++n;
    while (n > 1 && ok(n - 1)) --n;
    if (n > std::numeric_limits<int>::max()) throw ResourceLimit("N(eps) too large");
    return static_cast<int>(n);
}

// eta_i(eps) = eps (1-eps)^(N(eps)-i), 1 <= i <= N(eps)
inline double eta(double eps, int i) {
    int n = n_of_eps(eps);
    if (i < 1 || i > n) throw IndexOutOfRange("eta index out of range");
    return eps * std::pow(1.0 - eps, n - i);
}

// eta with indices past N(eps) treated as carrying no target mass; manual
// tilings may present more shapes than the theory uses.
inline double eta_or_zero(double eps, int i) {
    return i <= n_of_eps(eps) ? eta(eps, i) : 0.0;
}

inline std::vector<double> eta_all(double eps) {
    int n = n_of_eps(eps);
    std::vector<double> out(n);
    for (int i = 1; i <= n; ++i) out[i - 1] = eps * std::pow(1.0 - eps, n - i);
    return out;
}

// A sqrt(eps) + A_eps with A = sup |alpha_i| and A_eps the sup over indices
// i >= eps^{-1/2}; dominates |sum alpha_i eta_i(eps)|.
inline double weighted_eta_bound(const std::vector<double>& alphas, double eps) {
    if (!(eps > 0.0 && eps < 0.1)) throw DomainError("weighted_eta_bound requires eps in (0,1/10)");
    std::size_t n = static_cast<std::size_t>(n_of_eps(eps));
    if (alphas.size() < n) throw InsufficientSequence("alpha sequence shorter than N(eps)");
    double a = 0.0, a_eps = 0.0;
    double cut = 1.0 / std::sqrt(eps);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        double v = std::abs(alphas[i]);
        a = std::max(a, v);
        if (static_cast<double>(i + 1) >= cut) a_eps = std::max(a_eps, v);
    }
    return a * std::sqrt(eps) + a_eps;
}

struct TilingDiagnostics {
    double cover_fraction = 0.0;
    std::vector<double> density_deviation;        // | |K_i T_i|/|Lambda| - eta_i |
    std::vector<double> center_density_deviation; // | |T_i|/|Lambda| - eta_i/|K_i| |
    std::vector<double> center_density_bound;     // 4 eps eta_i / |K_i|
    double density_tolerance = 0.0;               // eps^2 / N(eps)

    bool contained = true;       // every K_i t inside Lambda
    bool cross_disjoint = true;  // K_i T_i families pairwise disjoint
    bool eps_disjoint = true;    // witnessed by the stored cores
    bool cover_ok = true;        // cover fraction >= 1 - 2 eps
    bool density_ok = true;      // every deviation <= eps^2/N
    bool center_density_ok = true;
    bool pass = false;           // def31 flags && density_ok

    bool def31_ok() const { return contained && cross_disjoint && eps_disjoint && cover_ok; }
};

struct QuasiTiling {
    double eps = 0.0;
    FiniteSubset window;
    std::vector<FiniteSubset> tiles;                // K_1 strictly included in ... in K_N
    std::vector<std::vector<GroupElement>> centers; // stored verbatim, per tile
    std::vector<std::vector<FiniteSubset>> cores;   // designated-disjoint core per placed translate
    TilingDiagnostics diagnostics;

    std::size_t center_count(std::size_t i) const { return centers[i].size(); }
};

struct TilingInfeasible : Error {
    QuasiTiling partial;
    TilingInfeasible(std::string msg, QuasiTiling qt)
        : Error(std::move(msg)), partial(std::move(qt)) {}
};

enum class TilingMode { Stp, Manual };

inline void check_tile_chain(const std::vector<FiniteSubset>& tiles) {
    if (tiles.empty()) throw BadTileChain("empty tile chain");
    const GroupDescriptor& g = tiles[0].group();
    if (!tiles[0].contains(identity(g))) throw BadTileChain("identity must lie in the first tile");
    for (std::size_t i = 1; i < tiles.size(); ++i) {
        if (tiles[i].group() != g) throw MixedGroups("tiles live in different groups");
        if (!(tiles[i - 1].size() < tiles[i].size()) || !is_subset(tiles[i - 1], tiles[i]))
            throw BadTileChain("tiles must be strictly nested");
    }
}

inline TilingDiagnostics verify_quasi_tiling(const QuasiTiling& qt);

// Deterministic greedy: largest tile first, candidate centers scanned in the
// canonical order of the window.  A candidate is accepted when its translate
// stays inside the window, avoids every larger tile's region completely, and
// overlaps the region already claimed by its own tile in at most eps|K_i|
// points.  Acceptance stops once |K_i T_i| >= (eta_i - eps^2/N)|Lambda|.
inline QuasiTiling construct_quasi_tiling(const FiniteSubset& window,
                                          const std::vector<FiniteSubset>& tiles, double eps,
                                          TilingMode mode,
                                          const std::vector<std::vector<GroupElement>>& manual_centers = {}) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("construct_quasi_tiling requires eps in (0,1)");
    check_tile_chain(tiles);
    if (window.group() != tiles[0].group()) throw MixedGroups("window group differs from tiles");
    if (window.empty()) throw EmptySet("cannot tile an empty window");
    const GroupDescriptor& gd = window.group();
    const std::size_t n_tiles = tiles.size();

    QuasiTiling qt;
    qt.eps = eps;
    qt.window = window;
    qt.tiles = tiles;
    qt.centers.assign(n_tiles, {});
    qt.cores.assign(n_tiles, {});

    if (mode == TilingMode::Manual) {
        if (manual_centers.size() != n_tiles)
            throw DomainError("manual mode needs one center list per tile");
        qt.centers = manual_centers;
        // sequential-core witnesses in the stored order
        for (std::size_t i = 0; i < n_tiles; ++i) {
            FiniteSubset claimed(gd);
            for (const auto& t : qt.centers[i]) {
                FiniteSubset kt = translate_set(tiles[i], t);
                qt.cores[i].push_back(set_difference(kt, claimed));
                claimed = set_union(claimed, kt);
            }
        }
        qt.diagnostics = verify_quasi_tiling(qt);
        if (!qt.diagnostics.contained)
            throw TilingInfeasible("manual translate leaves the window", qt);
        return qt;
    }

    const std::size_t n_expected = static_cast<std::size_t>(n_of_eps(eps));
    if (n_tiles != n_expected) throw BadTileChain("stp mode needs exactly N(eps) tiles");
    const double tol = eps * eps / static_cast<double>(n_expected);

    // claims[g] = index of the tile whose placed translate covers g
    std::unordered_map<GroupElement, std::uint32_t, ElementHash> claims;
    claims.reserve(window.size() * 2);
    bool feasible = true;
    std::string why;

    for (std::size_t ii = n_tiles; ii-- > 0;) {
        const FiniteSubset& k = tiles[ii];
        const double eta_i = eta(eps, static_cast<int>(ii) + 1);
        const double target = (eta_i - tol) * static_cast<double>(window.size());
        const std::size_t max_same = static_cast<std::size_t>(std::floor(eps * static_cast<double>(k.size())));
        std::size_t covered = 0;

        for (const auto& t : window.elements()) {
            if (static_cast<double>(covered) >= target) break;
            bool fits = true;
            std::size_t same_overlap = 0;
            std::vector<const GroupElement*> fresh;
            std::vector<GroupElement> pts;
            pts.reserve(k.size());
            for (const auto& x : k.elements()) pts.push_back(multiply(gd, x, t));
            for (const auto& p : pts) {
                if (!window.contains(p)) { fits = false; break; }
                auto it = claims.find(p);
                if (it != claims.end()) {
                    if (it->second != ii) { fits = false; break; } // later tiles own it
                    if (++same_overlap > max_same) { fits = false; break; }
                } else {
                    fresh.push_back(&p);
                }
            }
            if (!fits) continue;
            // accept
            std::vector<GroupElement> core_pts;
            core_pts.reserve(fresh.size());
            for (const auto* p : fresh) core_pts.push_back(*p);
            for (const auto& p : pts) claims.emplace(p, static_cast<std::uint32_t>(ii));
            covered += fresh.size();
            qt.centers[ii].push_back(t);
            qt.cores[ii].push_back(FiniteSubset::from_elements(gd, std::move(core_pts)));
        }
        if (static_cast<double>(covered) < target) {
            feasible = false;
            if (why.empty())
                why = "tile " + std::to_string(ii + 1) + " missed its density target";
        }
    }

    qt.diagnostics = verify_quasi_tiling(qt);
    if (!feasible || !qt.diagnostics.cover_ok)
        throw TilingInfeasible(why.empty() ? "cover target unreachable" : why, qt);
    return qt;
}

// Re-checks everything from the stored data with exact set arithmetic; no
// tolerance on memberships.
inline TilingDiagnostics verify_quasi_tiling(const QuasiTiling& qt) {
    TilingDiagnostics d;
    const std::size_t n = qt.tiles.size();
    const double win = static_cast<double>(qt.window.size());
    d.density_tolerance = qt.eps * qt.eps / static_cast<double>(n);

    std::vector<FiniteSubset> regions; // K_i T_i
    regions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<FiniteSubset> translates;
        translates.reserve(qt.centers[i].size());
        FiniteSubset region(qt.window.group());
        for (const auto& t : qt.centers[i]) {
            FiniteSubset kt = translate_set(qt.tiles[i], t);
            if (!is_subset(kt, qt.window)) d.contained = false;
            region = set_union(region, kt);
            translates.push_back(std::move(kt));
        }
        regions.push_back(region);

        // eps-disjointness witnessed by the stored cores
        if (qt.cores[i].size() != qt.centers[i].size()) {
            d.eps_disjoint = false;
        } else {
            FiniteSubset core_union(qt.window.group());
            for (std::size_t j = 0; j < translates.size(); ++j) {
                const FiniteSubset& core = qt.cores[i][j];
                if (!is_subset(core, translates[j])) d.eps_disjoint = false;
                if (intersection_size(core, core_union) != 0) d.eps_disjoint = false;
                double defect = static_cast<double>(translates[j].size() - core.size());
                if (defect > qt.eps * static_cast<double>(qt.tiles[i].size())) d.eps_disjoint = false;
                core_union = set_union(core_union, core);
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (intersection_size(regions[i], regions[j]) != 0) d.cross_disjoint = false;

    FiniteSubset all(qt.window.group());
    for (const auto& r : regions) all = set_union(all, r);
    d.cover_fraction = qt.window.empty() ? 0.0
                                         : static_cast<double>(intersection_size(all, qt.window)) / win;
    d.cover_ok = d.cover_fraction >= 1.0 - 2.0 * qt.eps;

    d.density_deviation.resize(n);
    d.center_density_deviation.resize(n);
    d.center_density_bound.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta_i = eta_or_zero(qt.eps, static_cast<int>(i) + 1);
        d.density_deviation[i] = std::abs(static_cast<double>(regions[i].size()) / win - eta_i);
        if (d.density_deviation[i] > d.density_tolerance) d.density_ok = false;
        double ki = static_cast<double>(qt.tiles[i].size());
        d.center_density_deviation[i] =
            std::abs(static_cast<double>(qt.centers[i].size()) / win - eta_i / ki);
        d.center_density_bound[i] = 4.0 * qt.eps * eta_i / ki;
        if (d.center_density_deviation[i] > d.center_density_bound[i]) d.center_density_ok = false;
    }

    d.pass = d.def31_ok() && d.density_ok;
    return d;
}

// gap = | |T_i|/|Lambda| - eta_i/|K_i| |, bound = 4 eps eta_i / |K_i|
inline std::pair<double, double> center_density_gap(const QuasiTiling& qt, int i) {
    if (i < 1 || static_cast<std::size_t>(i) > qt.tiles.size())
        throw IndexOutOfRange("center_density_gap tile index");
    double eta_i = eta_or_zero(qt.eps, i);
    double ki = static_cast<double>(qt.tiles[i - 1].size());
    double gap = std::abs(static_cast<double>(qt.centers[i - 1].size()) /
                              static_cast<double>(qt.window.size()) -
                          eta_i / ki);
    return {gap, 4.0 * qt.eps * eta_i / ki};
}

} // namespace quasitile
