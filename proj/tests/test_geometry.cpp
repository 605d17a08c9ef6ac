#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quasitile/geometry.hpp"
#include "test_support.hpp"

using namespace quasitile;
using namespace testsupport;

TEST_CASE("group law: Z^d componentwise") {
    GroupDescriptor g = GroupDescriptor::zd(2);
    GroupElement a = z2(1, 2), b = z2(3, -1);
    CHECK(multiply(g, a, b) == z2(4, 1));
    CHECK(multiply(g, a, inverse(g, a)) == identity(g));
}

TEST_CASE("group law: Heisenberg twist and non-commutativity") {
    GroupDescriptor g = GroupDescriptor::heisenberg();
    GroupElement x{{1, 0, 0}, {}}, y{{0, 1, 0}, {}};
    CHECK(multiply(g, x, y) == GroupElement{{1, 1, 1}, {}});
    CHECK(multiply(g, y, x) == GroupElement{{1, 1, 0}, {}});
    CHECK(multiply(g, x, inverse(g, x)) == identity(g));
}

TEST_CASE("group law: random associativity and inverses") {
    for (GroupDescriptor g : {GroupDescriptor::zd(2), GroupDescriptor::heisenberg(),
                              GroupDescriptor::lamplighter()}) {
        SeqRng rng(7 + static_cast<int>(g.kind));
        auto gens = generators(g);
        for (int trial = 0; trial < 200; ++trial) {
            auto word = [&](int len) {
                GroupElement e = identity(g);
                for (int i = 0; i < len; ++i) e = multiply(g, gens[rng.below(gens.size())], e);
                return e;
            };
            GroupElement a = word(5), b = word(5), c = word(5);
            CHECK(multiply(g, multiply(g, a, b), c) == multiply(g, a, multiply(g, b, c)));
            CHECK(multiply(g, a, inverse(g, a)) == identity(g));
            CHECK(multiply(g, inverse(g, a), a) == identity(g));
        }
    }
}

TEST_CASE("mixed groups rejected") {
    GroupDescriptor g2 = GroupDescriptor::zd(2);
    CHECK_THROWS_AS(multiply(g2, z2(0, 0), z1(1)), MixedGroups);
    FiniteSubset a = FiniteSubset::from_elements(g2, {z2(0, 0)});
    FiniteSubset b = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0)});
    CHECK_THROWS_AS(set_product(a, b), MixedGroups);
}

TEST_CASE("balls: spot sizes") {
    CHECK(ball(GroupDescriptor::zd(1), 2).size() == 5);
    CHECK(ball(GroupDescriptor::zd(2), 1).size() == 5);
    CHECK(ball(GroupDescriptor::heisenberg(), 2).size() == 17);
    CHECK(ball(GroupDescriptor::lamplighter(), 0).size() == 1);
    CHECK_THROWS_AS(ball(GroupDescriptor::zd(3), 400, /*element_cap=*/20000), ResourceLimit);
}

TEST_CASE("translate_set basics") {
    FiniteSubset lam = interval_z(0, 3);
    FiniteSubset moved = translate_set(lam, z1(5));
    CHECK(moved == interval_z(5, 8));
    CHECK(translate_set(lam, z1(0)) == lam);

    GroupDescriptor h = GroupDescriptor::heisenberg();
    FiniteSubset hs = FiniteSubset::from_elements(h, {{{0, 0, 0}, {}}, {{1, 0, 0}, {}}});
    FiniteSubset ht = translate_set(hs, GroupElement{{0, 1, 0}, {}});
    CHECK(ht.contains(GroupElement{{0, 1, 0}, {}}));
    CHECK(ht.contains(GroupElement{{1, 1, 1}, {}}));
    CHECK(ht.size() == 2);
}

TEST_CASE("set_product basics") {
    FiniteSubset a = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0), z1(1)});
    FiniteSubset b = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0), z1(10)});
    CHECK(set_product(a, b).size() == 4);
    FiniteSubset idset = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0)});
    CHECK(set_product(idset, b) == b);
    CHECK(set_product(a, a).size() == 3); // overlap collapses
}

TEST_CASE("r-boundary and interior: pinned examples") {
    FiniteSubset box = box_z2(3, 3);
    CHECK(r_boundary(box, 0).empty());
    CHECK(r_interior(box, 0) == box);
    CHECK(r_boundary(box, 1).size() == 20); // 8 inner + 12 outer
    FiniteSubset inner = r_interior(box, 1);
    CHECK(inner.size() == 1);
    CHECK(inner.contains(z2(1, 1)));

    FiniteSubset point = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0)});
    CHECK(r_boundary(point, 1).size() == 3);
    CHECK(r_interior(point, 1).empty());
}

TEST_CASE("boundary equals oracle on random subsets in all groups") {
    for (GroupDescriptor g : {GroupDescriptor::zd(2), GroupDescriptor::heisenberg(),
                              GroupDescriptor::lamplighter()}) {
        SeqRng rng(31 + static_cast<int>(g.kind));
        for (int trial = 0; trial < 12; ++trial) {
            FiniteSubset lam = random_subset(g, rng, 10 + rng.below(60));
            for (int r = 0; r <= 2; ++r) {
                CHECK(r_boundary(lam, r) == oracle_r_boundary(lam, r));
                CHECK(r_interior(lam, r) == oracle_r_interior(lam, r));
            }
        }
    }
}

TEST_CASE("boundary/interior identities and equivariance") {
    SeqRng rng(99);
    GroupDescriptor g = GroupDescriptor::heisenberg();
    auto gens = generators(g);
    for (int trial = 0; trial < 10; ++trial) {
        FiniteSubset lam = random_subset(g, rng, 12 + rng.below(25));
        GroupElement t = identity(g);
        for (int i = 0; i < 3; ++i) t = multiply(g, gens[rng.below(gens.size())], t);
        for (int r = 0; r <= 3; ++r) {
            FiniteSubset bd = r_boundary(lam, r);
            FiniteSubset in = r_interior(lam, r);
            // disjoint split of Lambda
            CHECK(set_union(in, set_intersection(bd, lam)) == lam);
            CHECK(intersection_size(in, bd) == 0);
            // right-translation equivariance
            CHECK(translate_set(bd, t) == r_boundary(translate_set(lam, t), r));
            CHECK(translate_set(in, t) == r_interior(translate_set(lam, t), r));
        }
        CHECK(translate_set(lam, t).size() == lam.size());
    }
}

TEST_CASE("set_distance: examples and oracle") {
    FiniteSubset a = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(0)});
    FiniteSubset b = FiniteSubset::from_elements(GroupDescriptor::zd(1), {z1(5)});
    CHECK(set_distance(a, b) == 5);
    CHECK(set_distance(a, a) == 0);
    FiniteSubset c = FiniteSubset::from_elements(GroupDescriptor::zd(2), {z2(0, 0)});
    FiniteSubset d = FiniteSubset::from_elements(GroupDescriptor::zd(2), {z2(2, 3)});
    CHECK(set_distance(c, d) == 5);
    CHECK_THROWS_AS(set_distance(a, FiniteSubset(GroupDescriptor::zd(1))), EmptySet);

    SeqRng rng(5);
    for (GroupDescriptor g : {GroupDescriptor::zd(2), GroupDescriptor::lamplighter()}) {
        for (int trial = 0; trial < 8; ++trial) {
            FiniteSubset s1 = random_subset(g, rng, 4 + rng.below(12));
            FiniteSubset s2 = translate_set(random_subset(g, rng, 4 + rng.below(12)),
                                            random_subset(g, rng, 6).elements().back());
            std::size_t got = set_distance(s1, s2);
            CHECK(got == oracle_set_distance(s1, s2));
            CHECK(set_distance(s2, s1) == got); // symmetry
        }
    }
}

TEST_CASE("folner_defect: pinned values") {
    GroupDescriptor g1 = GroupDescriptor::zd(1);
    FiniteSubset lam = interval_z(0, 10);
    FiniteSubset s = FiniteSubset::from_elements(g1, generators(g1));
    CHECK(folner_defect(lam, s) == doctest::Approx(0.2).epsilon(1e-15));
    FiniteSubset idset = FiniteSubset::from_elements(g1, {z1(0)});
    CHECK(folner_defect(lam, idset) == 0.0);

    FiniteSubset box = box_z2(10, 10);
    FiniteSubset s2 = FiniteSubset::from_elements(GroupDescriptor::zd(2),
                                                  generators(GroupDescriptor::zd(2)));
    CHECK(folner_defect(box, s2) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("beta_prime: pinned values") {
    auto b_zero = zero_boundary_fn();
    FiniteSubset q = interval_z(0, 10);
    CHECK(beta_prime(q, b_zero, 0) == 0.0);

    BoundaryFn b_abs1 = [](const FiniteSubset& s) {
        return static_cast<double>(r_boundary(s, 1).size());
    };
    CHECK(beta_prime(q, b_abs1, 1) == doctest::Approx(0.4));

    FiniteSubset box = box_z2(4, 4);
    CHECK(beta_prime(box, b_zero, 1) == doctest::Approx(28.0 / 16.0));
}

TEST_CASE("beta(eps): formula, preconditions, remark edge") {
    std::vector<double> betas;
    for (int n = 1; n <= 40; ++n) betas.push_back(1.0 / (2.0 * n));
    CHECK(beta_of_eps(0.04, betas) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(beta_of_eps(0.01, betas) == doctest::Approx(0.1).epsilon(1e-14));
    // with beta'_n <= 1/(2n) the value never exceeds sqrt(eps)
    for (double eps : {0.0025, 0.01, 0.04, 0.09})
        CHECK(beta_of_eps(eps, betas) <= std::sqrt(eps) + 1e-14);

    std::vector<double> zeros(40, 0.0);
    CHECK(beta_of_eps(0.05, zeros) == 0.0);

    CHECK_THROWS_AS(beta_of_eps(0.04, std::vector<double>{0.5, 0.25}), InsufficientSequence);
    CHECK_THROWS_AS(beta_of_eps(0.04, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}),
                    NonMonotoneBetas);
}

TEST_CASE("build_nested_folner: Z with the 1/(2n) rule picks 8n-length intervals") {
    BoundaryFn b_zero = zero_boundary_fn();
    FolnerSpec spec = build_nested_folner(GroupDescriptor::zd(1), 3, b_zero, 1);
    REQUIRE(spec.indices.size() == 3);
    CHECK(spec.indices[0] == 8);
    CHECK(spec.indices[1] == 16);
    CHECK(spec.indices[2] == 24);
    FiniteSubset q0 = spec.term(0);
    CHECK(q0.contains(z1(0)));
    CHECK(is_subset(q0, spec.term(1)));
}

TEST_CASE("build_nested_folner: count 1 accepts the first window when b == 0, r == 0") {
    FolnerSpec spec = build_nested_folner(GroupDescriptor::zd(1), 1, zero_boundary_fn(), 0);
    REQUIRE(spec.indices.size() == 1);
    CHECK(spec.indices[0] == 1);
}

TEST_CASE("build_nested_folner: Heisenberg balls shrink their boundary ratio") {
    FolnerSpec spec = build_nested_folner(GroupDescriptor::heisenberg(), 2, zero_boundary_fn(), 1);
    REQUIRE(spec.indices.size() == 2);
    FiniteSubset b1 = spec.term(0), b2 = spec.term(1);
    double r1 = static_cast<double>(r_boundary(b1, 1).size()) / b1.size();
    double r2 = static_cast<double>(r_boundary(b2, 1).size()) / b2.size();
    CHECK(r1 <= 0.5);
    CHECK(r2 <= 0.25);
    CHECK(r2 <= r1);
}

TEST_CASE("boundary ratio trend along stored Folner indices") {
    // Z and Z^2 reach ratio < 0.1 at desk scale; the lamplighter's Folner
    // function is exponential, so only monotone decrease is checkable there.
    for (int r = 1; r <= 2; ++r) {
        std::vector<std::int64_t> zs{20, 40, 80, 160};
        double prev = 1e9;
        for (std::int64_t n : zs) {
            FiniteSubset q = folner_term(GroupDescriptor::zd(1), "boxes", n);
            double ratio = static_cast<double>(r_boundary(q, r).size()) / q.size();
            CHECK(ratio <= prev + 1e-12);
            prev = ratio;
        }
        CHECK(prev < 0.1);
    }
    {
        double prev = 1e9;
        for (std::int64_t n : {40, 80, 160}) {
            FiniteSubset q = folner_term(GroupDescriptor::zd(2), "boxes", n);
            double ratio = static_cast<double>(r_boundary(q, 1).size()) / q.size();
            CHECK(ratio <= prev + 1e-12);
            prev = ratio;
        }
        CHECK(prev < 0.1);
    }
    {
        double prev = 1e9;
        for (std::int64_t n : {4, 6, 8, 10}) {
            FiniteSubset q = folner_term(GroupDescriptor::lamplighter(), "lamp_rects", n);
            double ratio = static_cast<double>(r_boundary(q, 1).size()) / q.size();
            CHECK(ratio <= prev + 1e-12);
            prev = ratio;
        }
    }
}

TEST_CASE("folner defect non-increasing along built specs") {
    FolnerSpec spec = build_nested_folner(GroupDescriptor::zd(2), 3, zero_boundary_fn(), 1);
    FiniteSubset s = FiniteSubset::from_elements(GroupDescriptor::zd(2),
                                                 generators(GroupDescriptor::zd(2)));
    double prev = 1e9;
    for (std::size_t k = 0; k < spec.count(); ++k) {
        double d = folner_defect(spec.term(k), s);
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
}
