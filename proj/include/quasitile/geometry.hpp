#pragma once

// Finitely generated groups in normal form, their Cayley-graph metric,
// finite-set calculus (translation, products, r-boundaries), and Folner
// sequences with the boundary summaries beta'_n / beta(eps).
//
// Conventions: the Cayley graph joins x and y when x y^{-1} is a generator,
// so graph neighbors of x are s*x (left multiplication) and the metric is
// invariant under right translation x -> x*g.  Sets translate on the right.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_set>
#include <unordered_map>
#include <vector>

#include "quasitile/errors.hpp"
#include "quasitile/rng.hpp"

namespace quasitile {

enum class GroupKind { ZPowD, Heisenberg3, Lamplighter };

inline std::string group_kind_name(GroupKind k) {
    switch (k) {
        case GroupKind::ZPowD: return "ZPowD";
        case GroupKind::Heisenberg3: return "Heisenberg3";
        case GroupKind::Lamplighter: return "Lamplighter";
    }
    return "?";
}

// Normal forms:
//   ZPowD        z = integer d-vector, lamps empty
//   Heisenberg3  z = (x, y, w) with law (x,y,w)(x',y',w') = (x+x', y+y', w+w'+x*y')
//   Lamplighter  z = (position), lamps = sorted list of lit lamps in Z
struct GroupElement {
    std::vector<std::int64_t> z;
    std::vector<std::int64_t> lamps;

    bool operator==(const GroupElement& o) const { return z == o.z && lamps == o.lamps; }
    bool operator!=(const GroupElement& o) const { return !(*this == o); }
    bool operator<(const GroupElement& o) const {
        if (z != o.z) return z < o.z;
        return lamps < o.lamps;
    }

    void absorb_into(KeyedStream& ks) const {
        ks.absorb_all(z);
        ks.absorb_all(lamps);
    }
};

struct ElementHash {
    std::size_t operator()(const GroupElement& g) const {
        std::uint64_t h = 0x243F6A8885A308D3ull;
        for (std::int64_t v : g.z) h = mix64(h ^ static_cast<std::uint64_t>(v));
        h = mix64(h ^ (0x13198A2E03707344ull + g.lamps.size()));
        for (std::int64_t v : g.lamps) h = mix64(h ^ static_cast<std::uint64_t>(v));
        return static_cast<std::size_t>(h);
    }
};

struct GroupDescriptor {
    GroupKind kind = GroupKind::ZPowD;
    int dim = 1; // ZPowD only

    bool operator==(const GroupDescriptor& o) const { return kind == o.kind && dim == o.dim; }
    bool operator!=(const GroupDescriptor& o) const { return !(*this == o); }

    static GroupDescriptor zd(int d) {
        if (d < 1) throw DomainError("ZPowD dimension must be positive");
        return GroupDescriptor{GroupKind::ZPowD, d};
    }
    static GroupDescriptor heisenberg() { return GroupDescriptor{GroupKind::Heisenberg3, 3}; }
    static GroupDescriptor lamplighter() { return GroupDescriptor{GroupKind::Lamplighter, 1}; }

    std::string name() const {
        if (kind == GroupKind::ZPowD) return "Z^" + std::to_string(dim);
        return group_kind_name(kind);
    }
};

inline GroupElement identity(const GroupDescriptor& d) {
    switch (d.kind) {
        case GroupKind::ZPowD: return GroupElement{std::vector<std::int64_t>(d.dim, 0), {}};
        case GroupKind::Heisenberg3: return GroupElement{{0, 0, 0}, {}};
        case GroupKind::Lamplighter: return GroupElement{{0}, {}};
    }
    throw DomainError("unknown group kind");
}

inline void check_shape(const GroupDescriptor& d, const GroupElement& g) {
    std::size_t want = d.kind == GroupKind::ZPowD ? static_cast<std::size_t>(d.dim)
                       : d.kind == GroupKind::Heisenberg3 ? 3u : 1u;
    if (g.z.size() != want) throw MixedGroups("element does not match group descriptor");
    if (d.kind != GroupKind::Lamplighter && !g.lamps.empty())
        throw MixedGroups("lamp state on a lamp-free group");
}

namespace detail {
// symmetric difference of sorted lamp lists
inline std::vector<std::int64_t> lamp_xor(const std::vector<std::int64_t>& a,
                                          std::vector<std::int64_t> b_shifted) {
    std::vector<std::int64_t> out;
    out.reserve(a.size() + b_shifted.size());
    std::set_symmetric_difference(a.begin(), a.end(), b_shifted.begin(), b_shifted.end(),
                                  std::back_inserter(out));
    return out;
}
} // namespace detail

inline GroupElement multiply(const GroupDescriptor& d, const GroupElement& a, const GroupElement& b) {
    check_shape(d, a);
    check_shape(d, b);
    switch (d.kind) {
        case GroupKind::ZPowD: {
            GroupElement r = a;
            for (int i = 0; i < d.dim; ++i) r.z[i] += b.z[i];
            return r;
        }
        case GroupKind::Heisenberg3:
            return GroupElement{{a.z[0] + b.z[0], a.z[1] + b.z[1], a.z[2] + b.z[2] + a.z[0] * b.z[1]}, {}};
        case GroupKind::Lamplighter: {
            std::vector<std::int64_t> shifted = b.lamps;
            for (auto& v : shifted) v += a.z[0];
            return GroupElement{{a.z[0] + b.z[0]}, detail::lamp_xor(a.lamps, std::move(shifted))};
        }
    }
    throw DomainError("unknown group kind");
}

inline GroupElement inverse(const GroupDescriptor& d, const GroupElement& a) {
    check_shape(d, a);
    switch (d.kind) {
        case GroupKind::ZPowD: {
            GroupElement r = a;
            for (auto& v : r.z) v = -v;
            return r;
        }
        case GroupKind::Heisenberg3:
            return GroupElement{{-a.z[0], -a.z[1], -a.z[2] + a.z[0] * a.z[1]}, {}};
        case GroupKind::Lamplighter: {
            std::vector<std::int64_t> shifted = a.lamps;
            for (auto& v : shifted) v -= a.z[0];
            std::sort(shifted.begin(), shifted.end());
            return GroupElement{{-a.z[0]}, std::move(shifted)};
        }
    }
    throw DomainError("unknown group kind");
}

enum class GroupOpMode { Multiply, Inverse };

inline GroupElement group_op(const GroupDescriptor& d, const GroupElement& g, const GroupElement& h,
                             GroupOpMode mode) {
    return mode == GroupOpMode::Multiply ? multiply(d, g, h) : inverse(d, g);
}

// Symmetric generating sets.  Lamplighter uses the switch-walk generators
// {t, t^-1, at, (at)^-1}: walk, or toggle the current lamp and walk.
inline std::vector<GroupElement> generators(const GroupDescriptor& d) {
    std::vector<GroupElement> s;
    switch (d.kind) {
        case GroupKind::ZPowD:
            for (int i = 0; i < d.dim; ++i) {
                GroupElement e = identity(d);
                e.z[i] = 1;
                s.push_back(e);
                e.z[i] = -1;
                s.push_back(e);
            }
            break;
        case GroupKind::Heisenberg3:
            s.push_back({{1, 0, 0}, {}});
            s.push_back({{-1, 0, 0}, {}});
            s.push_back({{0, 1, 0}, {}});
            s.push_back({{0, -1, 0}, {}});
            break;
        case GroupKind::Lamplighter:
            s.push_back({{1}, {}});        // t
            s.push_back({{-1}, {}});       // t^-1
            s.push_back({{1}, {0}});       // at
            s.push_back({{-1}, {-1}});     // (at)^-1 = t^-1 a
            break;
    }
    std::sort(s.begin(), s.end());
    return s;
}

inline std::vector<GroupElement> neighbors(const GroupDescriptor& d, const GroupElement& x,
                                           const std::vector<GroupElement>& gens) {
    std::vector<GroupElement> out;
    out.reserve(gens.size());
    for (const auto& s : gens) out.push_back(multiply(d, s, x));
    return out;
}

// ---------------------------------------------------------------------------
// FiniteSubset: canonically ordered, duplicate-free vertex set.

class FiniteSubset {
public:
    FiniteSubset() = default;
    explicit FiniteSubset(GroupDescriptor g) : group_(g) {}

    static FiniteSubset from_elements(GroupDescriptor g, std::vector<GroupElement> elems) {
        for (const auto& e : elems) check_shape(g, e);
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        FiniteSubset s(g);
        s.elems_ = std::move(elems);
        return s;
    }

    const GroupDescriptor& group() const { return group_; }
    const std::vector<GroupElement>& elements() const { return elems_; }
    std::size_t size() const { return elems_.size(); }
    bool empty() const { return elems_.empty(); }

    bool contains(const GroupElement& g) const {
        return std::binary_search(elems_.begin(), elems_.end(), g);
    }
    // index in canonical order, or npos
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t index_of(const GroupElement& g) const {
        auto it = std::lower_bound(elems_.begin(), elems_.end(), g);
        if (it == elems_.end() || !(*it == g)) return npos;
        return static_cast<std::size_t>(it - elems_.begin());
    }

    bool operator==(const FiniteSubset& o) const { return group_ == o.group_ && elems_ == o.elems_; }

private:
    GroupDescriptor group_;
    std::vector<GroupElement> elems_;
};

inline void check_same_group(const FiniteSubset& a, const FiniteSubset& b) {
    if (a.group() != b.group()) throw MixedGroups("sets live in different groups");
}

inline FiniteSubset set_union(const FiniteSubset& a, const FiniteSubset& b) {
    check_same_group(a, b);
    std::vector<GroupElement> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.elements().begin(), a.elements().end(), b.elements().begin(), b.elements().end(),
                   std::back_inserter(out));
    return FiniteSubset::from_elements(a.group(), std::move(out));
}

inline FiniteSubset set_intersection(const FiniteSubset& a, const FiniteSubset& b) {
    check_same_group(a, b);
    std::vector<GroupElement> out;
    std::set_intersection(a.elements().begin(), a.elements().end(), b.elements().begin(),
                          b.elements().end(), std::back_inserter(out));
    return FiniteSubset::from_elements(a.group(), std::move(out));
}

inline FiniteSubset set_difference(const FiniteSubset& a, const FiniteSubset& b) {
    check_same_group(a, b);
    std::vector<GroupElement> out;
    std::set_difference(a.elements().begin(), a.elements().end(), b.elements().begin(),
                        b.elements().end(), std::back_inserter(out));
    return FiniteSubset::from_elements(a.group(), std::move(out));
}

inline std::size_t intersection_size(const FiniteSubset& a, const FiniteSubset& b) {
    check_same_group(a, b);
    std::size_t n = 0;
    auto i = a.elements().begin();
    auto j = b.elements().begin();
    while (i != a.elements().end() && j != b.elements().end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

inline bool is_subset(const FiniteSubset& a, const FiniteSubset& b) {
    return intersection_size(a, b) == a.size();
}

// Lambda * g = {x g : x in Lambda}
inline FiniteSubset translate_set(const FiniteSubset& a, const GroupElement& g) {
    std::vector<GroupElement> out;
    out.reserve(a.size());
    for (const auto& x : a.elements()) out.push_back(multiply(a.group(), x, g));
    return FiniteSubset::from_elements(a.group(), std::move(out));
}

// K * Lambda = {k t : k in K, t in Lambda}
inline FiniteSubset set_product(const FiniteSubset& k, const FiniteSubset& lam) {
    check_same_group(k, lam);
    std::vector<GroupElement> out;
    out.reserve(k.size() * lam.size());
    for (const auto& a : k.elements())
        for (const auto& b : lam.elements()) out.push_back(multiply(k.group(), a, b));
    return FiniteSubset::from_elements(k.group(), std::move(out));
}

// ---------------------------------------------------------------------------
// Metric machinery.

inline constexpr std::size_t kDefaultElementCap = 5'000'000;

// Closed ball of the word metric around the identity, by BFS.
inline FiniteSubset ball(const GroupDescriptor& d, int radius,
                         std::size_t element_cap = kDefaultElementCap) {
    if (radius < 0) throw DomainError("ball radius must be >= 0");
    auto gens = generators(d);
    std::vector<GroupElement> all;
    std::unordered_set<GroupElement, ElementHash> seen;
    std::vector<GroupElement> frontier{identity(d)};
    seen.insert(frontier[0]);
    all.push_back(frontier[0]);
    for (int depth = 0; depth < radius; ++depth) {
        std::vector<GroupElement> next;
        for (const auto& x : frontier)
            for (const auto& y : neighbors(d, x, gens))
                if (seen.insert(y).second) {
                    next.push_back(y);
                    all.push_back(y);
                    if (all.size() > element_cap) throw ResourceLimit("ball exceeds element cap");
                }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return FiniteSubset::from_elements(d, std::move(all));
}

// d(x, y) <= r test support: BFS layers from `sources`, restricted to either
// inside or outside the member set, up to depth r.
namespace detail {
using ElementSet = std::unordered_set<GroupElement, ElementHash>;

inline std::vector<GroupElement> bfs_collect(const GroupDescriptor& d, const ElementSet& members,
                                             const std::vector<GroupElement>& sources, int depth,
                                             bool stay_inside) {
    auto gens = generators(d);
    ElementSet seen(sources.begin(), sources.end());
    std::vector<GroupElement> frontier = sources;
    std::vector<GroupElement> collected;
    for (int k = 0; k < depth; ++k) {
        std::vector<GroupElement> next;
        for (const auto& x : frontier)
            for (const auto& s : gens) {
                GroupElement y = multiply(d, s, x);
                if ((members.count(y) != 0) != stay_inside) continue;
                if (seen.insert(y).second) {
                    next.push_back(y);
                    collected.push_back(y);
                }
            }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return collected;
}
} // namespace detail

// Two-sided r-boundary:
//   {x in L : d(x, G\L) <= r}  union  {x in G\L : d(x, L) <= r}
inline FiniteSubset r_boundary(const FiniteSubset& lam, int r) {
    if (r < 0) throw DomainError("r must be >= 0");
    const GroupDescriptor& d = lam.group();
    FiniteSubset out(d);
    if (r == 0 || lam.empty()) return out; // both clauses need distance >= 1
    auto gens = generators(d);
    detail::ElementSet members(lam.elements().begin(), lam.elements().end());
    // first outside shell and first inside shell
    std::vector<GroupElement> shell_out, shell_in;
    {
        detail::ElementSet seen_out;
        for (const auto& x : lam.elements()) {
            bool edge = false;
            for (const auto& s : gens) {
                GroupElement y = multiply(d, s, x);
                if (members.count(y) == 0) {
                    edge = true;
                    if (seen_out.insert(y).second) shell_out.push_back(y);
                }
            }
            if (edge) shell_in.push_back(x);
        }
    }
    // deeper layers
    std::vector<GroupElement> inner = shell_in;
    {
        auto more = detail::bfs_collect(d, members, shell_in, r - 1, true);
        inner.insert(inner.end(), more.begin(), more.end());
    }
    std::vector<GroupElement> outer = shell_out;
    {
        auto more = detail::bfs_collect(d, members, shell_out, r - 1, false);
        outer.insert(outer.end(), more.begin(), more.end());
    }
    inner.insert(inner.end(), outer.begin(), outer.end());
    return FiniteSubset::from_elements(d, std::move(inner));
}

// Lambda^r = {x in L : d(x, G\L) > r}
inline FiniteSubset r_interior(const FiniteSubset& lam, int r) {
    if (r < 0) throw DomainError("r must be >= 0");
    if (r == 0) return lam;
    return set_difference(lam, r_boundary(lam, r));
}

inline std::size_t set_distance(const FiniteSubset& a, const FiniteSubset& b,
                                std::size_t element_cap = kDefaultElementCap) {
    check_same_group(a, b);
    if (a.empty() || b.empty()) throw EmptySet("set_distance needs nonempty sets");
    if (intersection_size(a, b) > 0) return 0;
    const GroupDescriptor& d = a.group();
    auto gens = generators(d);
    std::unordered_set<GroupElement, ElementHash> seen(a.elements().begin(), a.elements().end());
    std::vector<GroupElement> frontier = a.elements();
    std::size_t dist = 0;
    while (!frontier.empty()) {
        ++dist;
        std::vector<GroupElement> next;
        for (const auto& x : frontier)
            for (const auto& y : neighbors(d, x, gens)) {
                if (b.contains(y)) return dist;
                if (seen.insert(y).second) {
                    next.push_back(y);
                    if (seen.size() > element_cap) throw ResourceLimit("set_distance search exceeds cap");
                }
            }
        frontier = std::move(next);
    }
    throw ResourceLimit("sets not connected within explored region");
}

// true iff d(a, b) <= limit; bounded BFS, cheap for small limits
inline bool sets_within_distance(const FiniteSubset& a, const FiniteSubset& b, std::size_t limit) {
    check_same_group(a, b);
    if (a.empty() || b.empty()) throw EmptySet("sets_within_distance needs nonempty sets");
    if (intersection_size(a, b) > 0) return true;
    const GroupDescriptor& d = a.group();
    auto gens = generators(d);
    std::unordered_set<GroupElement, ElementHash> seen(a.elements().begin(), a.elements().end());
    std::vector<GroupElement> frontier = a.elements();
    for (std::size_t depth = 1; depth <= limit; ++depth) {
        std::vector<GroupElement> next;
        for (const auto& x : frontier)
            for (const auto& y : neighbors(d, x, gens)) {
                if (b.contains(y)) return true;
                if (seen.insert(y).second) next.push_back(y);
            }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return false;
}

inline std::size_t diameter(const FiniteSubset& a) {
    if (a.empty()) throw EmptySet("diameter of empty set");
    // max over x of eccentricity via per-point BFS within no restriction;
    // fine at the small sizes this is used for (exact tiling path checks).
    const GroupDescriptor& d = a.group();
    auto gens = generators(d);
    std::size_t best = 0;
    for (const auto& x0 : a.elements()) {
        std::unordered_map<GroupElement, std::size_t, ElementHash> dist;
        dist[x0] = 0;
        std::vector<GroupElement> frontier{x0};
        std::size_t remaining = a.size() - 1, depth = 0;
        while (remaining > 0 && !frontier.empty()) {
            ++depth;
            std::vector<GroupElement> next;
            for (const auto& x : frontier)
                for (const auto& y : neighbors(d, x, gens))
                    if (dist.emplace(y, depth).second) {
                        next.push_back(y);
                        if (a.contains(y)) {
                            --remaining;
                            best = std::max(best, depth);
                        }
                    }
            frontier = std::move(next);
        }
        if (remaining > 0) throw ResourceLimit("diameter: set not connected in explored region");
    }
    return best;
}

// |Lambda triangle K*Lambda| / |Lambda|
inline double folner_defect(const FiniteSubset& lam, const FiniteSubset& k) {
    if (lam.empty()) throw EmptySet("folner_defect needs nonempty Lambda");
    FiniteSubset prod = set_product(k, lam);
    std::size_t inter = intersection_size(lam, prod);
    std::size_t sym = lam.size() + prod.size() - 2 * inter;
    return static_cast<double>(sym) / static_cast<double>(lam.size());
}

// ---------------------------------------------------------------------------
// Folner sequences.

using BoundaryFn = std::function<double(const FiniteSubset&)>;

inline BoundaryFn zero_boundary_fn() {
    return [](const FiniteSubset&) { return 0.0; };
}

// beta'_n = max{ b(Q)/|Q|, b(Q^r)/|Q|, |d^r(Q)|/|Q| }
inline double beta_prime(const FiniteSubset& q, const BoundaryFn& b, int r) {
    if (q.empty()) throw EmptySet("beta_prime needs nonempty Q");
    double n = static_cast<double>(q.size());
    FiniteSubset bd = r_boundary(q, r);
    double t1 = b(q) / n;
    double t2 = b(set_difference(q, bd)) / n; // Q^r = Q \ d^r(Q)
    double t3 = static_cast<double>(bd.size()) / n;
    return std::max(t1, std::max(t2, t3));
}

// beta(eps) = beta'_1 sqrt(eps) + beta'_{ceil(1/sqrt(eps))}
inline double beta_of_eps(double eps, const std::vector<double>& betas) {
    if (!(eps > 0.0 && eps < 0.1)) throw DomainError("beta requires eps in (0, 1/10)");
    std::size_t need = static_cast<std::size_t>(std::ceil(1.0 / std::sqrt(eps)));
    if (betas.size() < need) throw InsufficientSequence("beta' sequence too short");
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (betas[i] > betas[i - 1] + 1e-15) throw NonMonotoneBetas("beta' sequence must be non-increasing");
    return betas[0] * std::sqrt(eps) + betas[need - 1];
}

// Base windows indexed by n >= 1: boxes [0,n)^d for Z^d, word-metric balls
// B_{n-1} for Heisenberg, lamp rectangles {lamps in [0,n), pos in [0,n)} for
// the lamplighter (its balls are not a Folner family: exponential growth).
inline FiniteSubset folner_term(const GroupDescriptor& d, const std::string& generator,
                                std::int64_t n, std::size_t element_cap = kDefaultElementCap) {
    if (n < 1) throw DomainError("folner index must be >= 1");
    if (generator == "boxes") {
        if (d.kind != GroupKind::ZPowD) throw Unsupported("boxes are a Z^d generator");
        double logcount = d.dim * std::log(static_cast<double>(n));
        if (logcount > std::log(static_cast<double>(element_cap)))
            throw ResourceLimit("box exceeds element cap");
        std::vector<GroupElement> elems;
        std::vector<std::int64_t> v(d.dim, 0);
        while (true) {
            elems.push_back(GroupElement{v, {}});
            int i = d.dim - 1;
            while (i >= 0 && v[i] == n - 1) v[i--] = 0;
            if (i < 0) break;
            ++v[i];
        }
        return FiniteSubset::from_elements(d, std::move(elems));
    }
    if (generator == "balls") return ball(d, static_cast<int>(n - 1), element_cap);
    if (generator == "lamp_rects") {
        if (d.kind != GroupKind::Lamplighter) throw Unsupported("lamp_rects is a lamplighter generator");
        if (n > 20) throw ResourceLimit("lamp rectangle exceeds element cap");
        std::vector<GroupElement> elems;
        for (std::int64_t p = 0; p < n; ++p) {
            std::uint64_t m = 1ull << n;
            for (std::uint64_t mask = 0; mask < m; ++mask) {
                std::vector<std::int64_t> lamps;
                for (std::int64_t i = 0; i < n; ++i)
                    if (mask & (1ull << i)) lamps.push_back(i);
                elems.push_back(GroupElement{{p}, std::move(lamps)});
            }
            if (elems.size() > element_cap) throw ResourceLimit("lamp rectangle exceeds element cap");
        }
        return FiniteSubset::from_elements(d, std::move(elems));
    }
    throw Unsupported("unknown folner generator: " + generator);
}

inline std::string default_folner_generator(const GroupDescriptor& d) {
    switch (d.kind) {
        case GroupKind::ZPowD: return "boxes";
        case GroupKind::Heisenberg3: return "balls";
        case GroupKind::Lamplighter: return "lamp_rects";
    }
    return "boxes";
}

struct FolnerSpec {
    GroupDescriptor group;
    std::string generator; // "boxes" | "balls" | "lamp_rects"
    std::vector<std::int64_t> indices;
    bool nested = true;

    FiniteSubset term(std::size_t k, std::size_t element_cap = kDefaultElementCap) const {
        if (k >= indices.size()) throw IndexOutOfRange("folner term index");
        return folner_term(group, generator, indices[k], element_cap);
    }
    std::size_t count() const { return indices.size(); }
};

// First `count` base indices, unfiltered (the identity selection).  Terms are
// nested and Folner for all three base families; no beta' constraint.
inline FolnerSpec consecutive_folner(const GroupDescriptor& g, std::size_t count,
                                     std::string generator = "") {
    if (generator.empty()) generator = default_folner_generator(g);
    FolnerSpec spec{g, generator, {}, true};
    for (std::size_t n = 1; n <= count; ++n) spec.indices.push_back(static_cast<std::int64_t>(n));
    return spec;
}

// Greedy subsequence scan: keep the first base index satisfying, for the k-th
// kept term, beta'_k <= 1/(2k), non-increasing beta', non-increasing Folner
// defect, and nesting.  Deterministic by construction.
inline FolnerSpec build_nested_folner(const GroupDescriptor& g, std::size_t count,
                                      const BoundaryFn& b, int r, std::string generator = "",
                                      std::size_t element_cap = kDefaultElementCap) {
    if (count < 1) throw DomainError("build_nested_folner needs count >= 1");
    if (generator.empty()) generator = default_folner_generator(g);
    FolnerSpec spec{g, generator, {}, true};
    FiniteSubset sgen = FiniteSubset::from_elements(g, generators(g));
    double prev_beta = std::numeric_limits<double>::infinity();
    double prev_defect = std::numeric_limits<double>::infinity();

    // Balls grow one BFS layer per candidate instead of rebuilding.
    const bool incremental = generator == "balls";
    auto gens = generators(g);
    detail::ElementSet seen{identity(g)};
    std::vector<GroupElement> all{identity(g)}, frontier{identity(g)};
    std::int64_t radius = 0;

    std::int64_t n = 0;
    while (spec.indices.size() < count) {
        ++n;
        FiniteSubset q;
        if (incremental) {
            while (radius < n - 1) {
                std::vector<GroupElement> next;
                for (const auto& x : frontier)
                    for (const auto& s : gens) {
                        GroupElement y = multiply(g, s, x);
                        if (seen.insert(y).second) {
                            next.push_back(y);
                            all.push_back(y);
                            if (all.size() > element_cap)
                                throw ResourceLimit("ball exceeds element cap");
                        }
                    }
                frontier = std::move(next);
                ++radius;
            }
            q = FiniteSubset::from_elements(g, all);
        } else {
            q = folner_term(g, generator, n, element_cap); // throws ResourceLimit when too big
        }
        std::size_t k = spec.indices.size() + 1;
        double bp = beta_prime(q, b, r);
        if (bp > 1.0 / (2.0 * static_cast<double>(k))) continue;
        if (bp > prev_beta) continue;
        double defect = folner_defect(q, sgen); // only evaluated past the beta' gate
        if (defect > prev_defect) continue;
        spec.indices.push_back(n);
        prev_beta = bp;
        prev_defect = defect;
    }
    return spec;
}

inline std::vector<double> beta_prime_sequence(const std::vector<FiniteSubset>& qs,
                                               const BoundaryFn& b, int r) {
    std::vector<double> out;
    out.reserve(qs.size());
    for (const auto& q : qs) out.push_back(beta_prime(q, b, r));
    return out;
}

} // namespace quasitile
