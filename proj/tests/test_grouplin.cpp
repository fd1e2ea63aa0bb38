#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_set>
#include <vector>

#include "treegroup/errors.hpp"
#include "treegroup/grouplin.hpp"
#include "treegroup/orbit_tree.hpp"
#include "treegroup/stochastic.hpp"

using namespace treegroup;

// ---------------------------------------------------------------------------
// Oracles. Group orders come from breadth-first closure over portraits,
// derived subgroups from exhaustive commutator closure, polynomial weights
// from the binomial transform, and cyclic orders from the element-order
// exponent. None of them touches the chain machinery under test.
// ---------------------------------------------------------------------------

namespace {

// all products of the generators, by breadth-first closure
std::vector<TreeAutomorphism> oracle_closure(const std::vector<TreeAutomorphism>& gens,
                                             std::size_t cap) {
    const TreeShape& sh = gens.front().shape();
    std::vector<TreeAutomorphism> elements{TreeAutomorphism(sh)};
    std::unordered_set<std::string> seen{elements.front().portrait_key()};
    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const std::size_t at = frontier.front();
        frontier.pop_front();
        for (const auto& g : gens) {
            TreeAutomorphism next = compose(elements[at], g);
            if (seen.insert(next.portrait_key()).second) {
                elements.push_back(next);
                REQUIRE(elements.size() <= cap);
                frontier.push_back(elements.size() - 1);
            }
        }
    }
    return elements;
}

// derived subgroup of an explicitly listed group: closure of all commutators
std::vector<TreeAutomorphism> oracle_derived(const std::vector<TreeAutomorphism>& elements,
                                             std::size_t cap) {
    std::vector<TreeAutomorphism> comms;
    std::unordered_set<std::string> seen;
    for (const auto& a : elements)
        for (const auto& b : elements) {
            TreeAutomorphism c = commutator(a, b);
            if (seen.insert(c.portrait_key()).second) comms.push_back(c);
        }
    return oracle_closure(comms, cap);
}

int oracle_log2(std::size_t size) {
    int e = 0;
    while ((std::size_t{1} << e) < size) ++e;
    REQUIRE((std::size_t{1} << e) == size);
    return e;
}

// weight by expanding in powers of y = x - 1: the x^i coefficient
// contributes binomial(i, j) to the y^j coefficient
std::size_t oracle_weight_binomial(const SlicePolynomial& f) {
    const std::size_t n = f.coeffs.size();
    const int p = f.prime;
    std::vector<std::vector<int>> binom(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        binom[i][0] = 1;
        for (std::size_t j = 1; j <= i; ++j)
            binom[i][j] = (binom[i - 1][j - 1] + binom[i - 1][j]) % p;
    }
    for (std::size_t j = 0; j < n; ++j) {
        int c = 0;
        for (std::size_t i = 0; i < n; ++i)
            c = (c + binom[i][j] * f.coeffs[i]) % p;
        if (c != 0) return j;
    }
    return n; // zero polynomial
}

TreeShape binary_shape(int depth) { return TreeShape(PermGroup::cyclic(2), depth); }

TreeAutomorphism adding_machine_element(const TreeShape& sh) {
    std::vector<std::uint8_t> labels(sh.label_count(), 0);
    for (int l = 0; l < sh.depth(); ++l)
        labels[sh.global_index(l, sh.level_size(l) - 1)] = 1;
    return TreeAutomorphism(sh, std::move(labels));
}

// one generator per level, each a single label at the leftmost vertex;
// together they generate the full group (checked against the closure oracle)
std::vector<TreeAutomorphism> level_swap_generators(const TreeShape& sh) {
    std::vector<TreeAutomorphism> gens;
    for (int l = 0; l < sh.depth(); ++l) {
        std::vector<std::uint8_t> labels(sh.label_count(), 0);
        labels[sh.global_index(l, 0)] = 1;
        gens.emplace_back(sh, std::move(labels));
    }
    return gens;
}

TreeAutomorphism random_element(const TreeShape& sh, Rng& rng) {
    std::vector<std::uint8_t> labels(sh.label_count());
    const auto hsize = static_cast<std::uint64_t>(sh.group()->size());
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.uniform_below(hsize));
    return TreeAutomorphism(sh, std::move(labels));
}

} // namespace

// ---------------------------------------------------------------------------
// Chain construction
// ---------------------------------------------------------------------------

TEST_CASE("chain pinned orders and membership") {
    SUBCASE("full depth-3 binary group has order exponent 7") {
        const TreeShape sh = binary_shape(3);
        const auto gens = level_swap_generators(sh);
        REQUIRE(oracle_closure(gens, 200).size() == 128);
        StabilizerChain chain = build_chain(gens);
        CHECK(chain.order_exponent() == 7);
        CHECK(chain.kernel_exponent(1) == 6);
        CHECK(chain.kernel_exponent(2) == 4);
        CHECK(chain.kernel_exponent(3) == 0);
    }

    SUBCASE("identity generators give the trivial chain") {
        const TreeShape sh = binary_shape(4);
        StabilizerChain chain = build_chain({TreeAutomorphism(sh)});
        for (int l = 0; l <= 4; ++l) CHECK(chain.kernel_exponent(l) == 0);
        CHECK(chain.contains(TreeAutomorphism(sh)));
        CHECK_FALSE(chain.contains(adding_machine_element(sh)));
    }

    SUBCASE("the adding machine generates a cyclic group of order 2^n") {
        for (int n : {1, 3, 4, 7}) {
            const TreeShape sh = binary_shape(n);
            StabilizerChain chain = build_chain({adding_machine_element(sh)});
            CHECK(chain.order_exponent() == n);
            // one basis element per level: e_l = n - l
            for (int l = 0; l <= n; ++l) CHECK(chain.kernel_exponent(l) == n - l);
        }
    }

    SUBCASE("membership by sifting matches the closure exactly") {
        const TreeShape sh = binary_shape(3);
        Rng rng(RngConfig{411, 0}, 7);
        const auto everyone = oracle_closure(level_swap_generators(sh), 200);
        for (int trial = 0; trial < 12; ++trial) {
            std::vector<TreeAutomorphism> gens;
            for (int i = 0; i < 1 + trial % 2; ++i) gens.push_back(random_element(sh, rng));
            StabilizerChain chain = build_chain(gens);
            const auto closure = oracle_closure(gens, 200);
            std::unordered_set<std::string> inside;
            for (const auto& e : closure) inside.insert(e.portrait_key());
            for (const auto& e : everyone)
                CHECK(chain.contains(e) == (inside.count(e.portrait_key()) > 0));
        }
    }
}

TEST_CASE("chain order equals exhaustive closure for 200 random subgroups") {
    const TreeShape sh = binary_shape(4);
    Rng rng(RngConfig{88, 5}, 0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TreeAutomorphism> gens;
        const int k = 1 + trial % 3;
        for (int i = 0; i < k; ++i) gens.push_back(random_element(sh, rng));
        StabilizerChain chain = build_chain(gens);
        const auto closure = oracle_closure(gens, 40000);
        REQUIRE(chain.order_exponent() == oracle_log2(closure.size()));
        // kernel exponents decrease, densities stay in [0, 1]
        DensitySequence seq = density_sequence(gens, 4);
        for (int l = 0; l < 4; ++l)
            CHECK(chain.kernel_exponent(l) >= chain.kernel_exponent(l + 1));
        for (const auto& gamma : seq.exact) {
            CHECK(gamma >= Rational(0));
            CHECK(gamma <= Rational(1));
        }
    }
}

TEST_CASE("chain of a single element matches its order exponent") {
    for (int n : {3, 4, 5, 6}) {
        const TreeShape sh = binary_shape(n);
        Rng rng(RngConfig{909, static_cast<std::uint64_t>(n)}, 1);
        for (int trial = 0; trial < 30; ++trial) {
            TreeAutomorphism g = random_element(sh, rng);
            StabilizerChain chain = build_chain({g});
            CHECK(chain.order_exponent() == element_order_exponent(g));
        }
    }
}

TEST_CASE("chain preconditions and budgets") {
    const TreeShape sh = binary_shape(3);
    CHECK_THROWS_AS(build_chain({}), domain_error);
    CHECK_THROWS_AS(build_chain({TreeAutomorphism(TreeShape(PermGroup::symmetric(3), 2))}),
                    domain_error);
    CHECK_THROWS_AS(build_chain({TreeAutomorphism(TreeShape(PermGroup::cyclic(4), 2))}),
                    domain_error);
    CHECK_THROWS_AS(build_chain({TreeAutomorphism(sh), TreeAutomorphism(binary_shape(2))}),
                    domain_error);
    CHECK_THROWS_AS(build_chain({TreeAutomorphism(TreeShape(PermGroup::cyclic(2), 11))}),
                    resource_error);
    // depth 10 at p=2 and depth 7 at p=3 stay within the budget
    CHECK(build_chain({TreeAutomorphism(TreeShape(PermGroup::cyclic(2), 10))}).order_exponent() == 0);
    CHECK(build_chain({TreeAutomorphism(TreeShape(PermGroup::cyclic(3), 7))}).order_exponent() == 0);
}

// ---------------------------------------------------------------------------
// Density sequences
// ---------------------------------------------------------------------------

TEST_CASE("density sequence pinned values") {
    SUBCASE("full group has density one at every level") {
        DensitySequence seq = density_sequence(level_swap_generators(binary_shape(3)), 3);
        REQUIRE(seq.exact.size() == 3);
        for (const auto& gamma : seq.exact) CHECK(gamma == Rational(1));
        CHECK(seq.image_exponents == std::vector<int>{0, 1, 3, 7});
    }

    SUBCASE("adding machine density is l / (2^l - 1)") {
        DensitySequence seq = density_sequence({adding_machine_element(binary_shape(5))}, 5);
        REQUIRE(seq.exact.size() == 5);
        for (int l = 1; l <= 5; ++l)
            CHECK(seq.exact[static_cast<std::size_t>(l) - 1] == Rational(l, (1 << l) - 1));
        CHECK(seq.exact[2] == Rational(3, 7));
    }

    SUBCASE("ternary adding machine density is 2l / (3^l - 1)") {
        const TreeShape sh(PermGroup::cyclic(3), 3);
        std::vector<std::uint8_t> labels(sh.label_count(), 0);
        for (int l = 0; l < 3; ++l) labels[sh.global_index(l, sh.level_size(l) - 1)] = 1;
        DensitySequence seq = density_sequence({TreeAutomorphism(sh, std::move(labels))}, 3);
        CHECK(seq.exact[0] == Rational(1));
        CHECK(seq.exact[1] == Rational(1, 2));
        CHECK(seq.exact[2] == Rational(3, 13));
    }

    SUBCASE("identity generators have density zero") {
        DensitySequence seq = density_sequence({TreeAutomorphism(binary_shape(4))}, 4);
        for (const auto& gamma : seq.exact) CHECK(gamma == Rational(0));
    }

    SUBCASE("depth adjustment truncates and extends") {
        // the adding machine at depth 6, measured at depths 3 and 6
        TreeAutomorphism s = adding_machine_element(binary_shape(6));
        CHECK(density_sequence({s}, 3).exact[2] == Rational(3, 7));
        TreeAutomorphism short_s = adding_machine_element(binary_shape(2));
        // extending by identity levels: image exponent stays 2 below level 2
        DensitySequence seq = density_sequence({short_s}, 4);
        CHECK(seq.image_exponents == std::vector<int>{0, 1, 2, 2, 2});
    }
}

// ---------------------------------------------------------------------------
// Boundary slices
// ---------------------------------------------------------------------------

TEST_CASE("boundary slice dimensions") {
    for (int n = 1; n <= 5; ++n) {
        const TreeShape sh = binary_shape(n);
        CHECK(boundary_slice_dim(level_swap_generators(sh), n) == (1 << (n - 1)));
        CHECK(boundary_slice_dim({TreeAutomorphism(sh)}, n) == 0);
    }
    CHECK(boundary_slice_dim({TreeAutomorphism(binary_shape(2))}, 0) == 0);
}

TEST_CASE("slice polynomials of the adding machine chain") {
    // the only slice generator of <s> at depth 3 is s^4, the all-ones row
    StabilizerChain chain = build_chain({adding_machine_element(binary_shape(3))});
    auto basis = slice_basis(chain);
    REQUIRE(basis.size() == 1);
    CHECK(basis[0].coeffs == std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(weight(basis[0]) == 3);
}

TEST_CASE("weight of slice polynomials") {
    SUBCASE("pinned values") {
        SlicePolynomial one{2, {1, 0, 0, 0, 0, 0, 0, 0}};
        CHECK(weight(one) == 0);
        for (int k = 0; k <= 3; ++k) {
            SlicePolynomial f{2, std::vector<std::uint8_t>(8, 0)};
            const std::size_t q = std::size_t{1} << k;
            for (std::size_t i = 0; i < q; ++i) f.coeffs[i] = 1;
            CHECK(weight(f) == q - 1); // 1 + x + ... + x^{q-1} = (x-1)^{q-1}
        }
        SlicePolynomial zero{2, std::vector<std::uint8_t>(8, 0)};
        CHECK(weight(zero) == 8); // stands for infinity
    }

    SUBCASE("two methods agree on random polynomials") {
        for (int p : {2, 3}) {
            const std::size_t n = p == 2 ? 16 : 27;
            Rng rng(RngConfig{52, static_cast<std::uint64_t>(p)}, 3);
            for (int trial = 0; trial < 150; ++trial) {
                SlicePolynomial f{p, std::vector<std::uint8_t>(n)};
                for (auto& c : f.coeffs)
                    c = static_cast<std::uint8_t>(rng.uniform_below(static_cast<std::uint64_t>(p)));
                CHECK(weight(f) == oracle_weight_binomial(f));
            }
        }
    }

    SUBCASE("superadditivity and the shift by y") {
        Rng rng(RngConfig{53, 0}, 4);
        for (int trial = 0; trial < 100; ++trial) {
            SlicePolynomial f{2, std::vector<std::uint8_t>(16)};
            SlicePolynomial g{2, std::vector<std::uint8_t>(16)};
            for (auto& c : f.coeffs) c = static_cast<std::uint8_t>(rng.uniform_below(2));
            for (auto& c : g.coeffs) c = static_cast<std::uint8_t>(rng.uniform_below(2));
            CHECK(weight(add(f, g)) >= std::min(weight(f), weight(g)));
            const std::size_t w = weight(f);
            if (w < f.coeffs.size() - 1)
                CHECK(weight(multiply_by_y(f)) == w + 1);
            else
                CHECK(weight(multiply_by_y(f)) == f.coeffs.size());
        }
        // iterating the shift from 1 walks through every weight
        SlicePolynomial f{2, std::vector<std::uint8_t>(16, 0)};
        f.coeffs[0] = 1;
        for (std::size_t k = 0; k < 16; ++k) {
            CHECK(weight(f) == k);
            f = multiply_by_y(f);
        }
        CHECK(f.is_zero());
    }
}

// ---------------------------------------------------------------------------
// The slice pair construction
// ---------------------------------------------------------------------------

TEST_CASE("slice pair structure and pinned dimension") {
    auto [s, g] = polihamu_pair(3, 1, 2);
    CHECK(element_order_exponent(s) == 3);
    CHECK(s == adding_machine_element(binary_shape(3)));
    // g carries the top level of s plus one label at the ray-zero vertex
    CHECK(g.label(s.shape().global_index(0, 0)) == 1);
    CHECK(g.label(s.shape().global_index(2, s.shape().local_from_ray_counter(2, 0))) == 1);
    int nonzero = 0;
    for (std::size_t i = 0; i < s.shape().label_count(); ++i) nonzero += g.label(i) != 0;
    CHECK(nonzero == 2);

    CHECK(boundary_slice_dim({s, power(g, 2)}, 3) == 3); // 4 - 2 + 1

    CHECK_THROWS_AS(polihamu_pair(3, 3, 2), domain_error);
    CHECK_THROWS_AS(polihamu_pair(3, -1, 2), domain_error);
    CHECK_THROWS_AS(polihamu_pair(0, 0, 2), domain_error);
    CHECK_THROWS_AS(polihamu_pair(3, 1, 4), domain_error);
}

TEST_CASE("slice pair dimension formula across depths") {
    for (int n = 1; n <= 8; ++n)
        for (int k = 0; k < n; ++k) {
            auto [s, g] = polihamu_pair(n, k, 2);
            const int expected = (1 << (n - 1)) - (1 << k) + 1;
            CHECK(boundary_slice_dim({s, power(g, 1LL << k)}, n) == expected);
        }
    for (int n = 1; n <= 5; ++n)
        for (int k = 0; k < n; ++k) {
            auto [s, g] = polihamu_pair(n, k, 3);
            std::int64_t pk = 1;
            for (int i = 0; i < k; ++i) pk *= 3;
            std::int64_t pn1 = 1;
            for (int i = 0; i < n - 1; ++i) pn1 *= 3;
            CHECK(boundary_slice_dim({s, power(g, pk)}, n) == pn1 - pk + 1);
        }
}

// ---------------------------------------------------------------------------
// Derived subgroups
// ---------------------------------------------------------------------------

TEST_CASE("derived subgroup chains") {
    SUBCASE("Abelian generators have a trivial derived subgroup") {
        StabilizerChain d = derived_subgroup_chain({adding_machine_element(binary_shape(5))}, 5);
        CHECK(d.order_exponent() == 0);
    }

    SUBCASE("derived subgroup of the full depth-2 and depth-3 groups") {
        for (int n : {2, 3}) {
            const TreeShape sh = binary_shape(n);
            const auto gens = level_swap_generators(sh);
            const auto closure = oracle_closure(gens, 200);
            const auto derived = oracle_derived(closure, 200);
            StabilizerChain chain = derived_subgroup_chain(gens, n);
            CHECK(chain.order_exponent() == oracle_log2(derived.size()));
            for (const auto& e : derived) CHECK(chain.contains(e));
        }
    }

    SUBCASE("random subgroups match the exhaustive derived closure") {
        const TreeShape sh = binary_shape(4);
        Rng rng(RngConfig{31, 9}, 0);
        for (int trial = 0; trial < 12; ++trial) {
            std::vector<TreeAutomorphism> gens{random_element(sh, rng), random_element(sh, rng)};
            const auto closure = oracle_closure(gens, 40000);
            const auto derived = oracle_derived(closure, 40000);
            StabilizerChain chain = derived_subgroup_chain(gens, 4);
            CHECK(chain.order_exponent() == oracle_log2(derived.size()));
        }
    }

    SUBCASE("normality fixed point: conjugated strong generators sift away") {
        const TreeShape sh = binary_shape(5);
        Rng rng(RngConfig{32, 2}, 0);
        std::vector<TreeAutomorphism> gens{random_element(sh, rng), random_element(sh, rng),
                                           random_element(sh, rng)};
        StabilizerChain whole = build_chain(gens);
        StabilizerChain derived = derived_subgroup_chain(gens, 5);
        for (const auto& w : derived.strong_generators()) {
            CHECK(whole.contains(w));
            for (const auto& g : gens) CHECK(derived.contains(conjugate(w, g)));
        }
    }

    SUBCASE("density gap between a group and its derived subgroup shrinks") {
        const TreeShape sh = binary_shape(7);
        Rng rng(RngConfig{33, 4}, 0);
        std::vector<TreeAutomorphism> gens{haar_random(sh, rng), haar_random(sh, rng),
                                           haar_random(sh, rng)};
        const auto gap_at = [&](int n) {
            DensitySequence whole = density_sequence(gens, n);
            StabilizerChain derived = derived_subgroup_chain(gens, n);
            const double dgamma =
                static_cast<double>(derived.order_exponent()) / (((1 << n) - 1));
            return whole.values.back() - dgamma;
        };
        const double g5 = gap_at(5);
        const double g7 = gap_at(7);
        CHECK(g5 > 0.0);
        CHECK(g7 < g5);
    }
}

TEST_CASE("commutator density") {
    // Abelian groups: the density is the full order exponent
    CHECK(commutator_density({adding_machine_element(binary_shape(4))}) == 4.0);
    // dihedral group of order 8 at depth 2: index of the derived subgroup is 4
    CHECK(commutator_density(level_swap_generators(binary_shape(2))) == 2.0);
    // the bound by the number of points moved holds for random samples
    const TreeShape sh = binary_shape(4);
    Rng rng(RngConfig{34, 0}, 6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TreeAutomorphism> gens{random_element(sh, rng), random_element(sh, rng)};
        const double c = commutator_density(gens);
        CHECK(c >= 0.0);
        CHECK(c <= static_cast<double>(sh.leaf_count()));
    }
}

// ---------------------------------------------------------------------------
// Solvable and Abelian inequalities
// ---------------------------------------------------------------------------

TEST_CASE("solvable length and density partial sums") {
    SUBCASE("trivial group") {
        SolvableReport rep = solvable_sum_check({TreeAutomorphism(binary_shape(4))}, 4);
        CHECK(rep.derived_length == 0);
        CHECK(rep.partial_sum == Rational(0));
        CHECK(rep.bound == 0.0);
        CHECK(rep.holds);
    }

    SUBCASE("adding machine at depth 10") {
        SolvableReport rep = solvable_sum_check({adding_machine_element(binary_shape(10))}, 10);
        CHECK(rep.derived_length == 1);
        Rational expected(0);
        for (int l = 1; l <= 10; ++l) expected += Rational(l, (1 << l) - 1);
        CHECK(rep.partial_sum == expected);
        CHECK(rep.partial_sum_value == doctest::Approx(2.7329).epsilon(1e-3));
        CHECK(rep.bound == 6.0);
        CHECK(rep.holds);
    }

    SUBCASE("depth-3 full group embedded at the top of depth 10") {
        // oracle: derived series length of the 128-element group is 3
        const auto gens3 = level_swap_generators(binary_shape(3));
        auto elements = oracle_closure(gens3, 200);
        int oracle_length = 0;
        while (elements.size() > 1) {
            elements = oracle_derived(elements, 200);
            ++oracle_length;
            REQUIRE(oracle_length < 10);
        }
        CHECK(oracle_length == 3);

        SolvableReport rep = solvable_sum_check(gens3, 10);
        CHECK(rep.derived_length == 3);
        CHECK(rep.bound == 18.0);
        CHECK(rep.holds);
        // the embedded copy acts trivially below level 3
        Rational expected(0);
        for (int l = 1; l <= 3; ++l) expected += Rational((1 << l) - 1, (1 << l) - 1);
        for (int l = 4; l <= 10; ++l) expected += Rational(7, (1 << l) - 1);
        CHECK(rep.partial_sum == expected);
    }
}

TEST_CASE("Abelian order bound through solo nodes") {
    SUBCASE("trivial and adding machine cases") {
        AbelianReport trivial = abelian_bound_check({TreeAutomorphism(binary_shape(4))}, 4);
        CHECK(trivial.log_order == 0);
        CHECK(trivial.solo_nodes == 0);
        CHECK(trivial.equality);
        for (int n : {3, 5, 6}) {
            AbelianReport rep = abelian_bound_check({adding_machine_element(binary_shape(n))}, n);
            CHECK(rep.log_order == n);
            CHECK(rep.solo_nodes == static_cast<std::uint64_t>(n));
            CHECK(rep.equality);
        }
    }

    SUBCASE("non-Abelian input is rejected") {
        CHECK_THROWS_AS(abelian_bound_check(level_swap_generators(binary_shape(2)), 2),
                        domain_error);
    }

    SUBCASE("500 random cyclic subgroups satisfy the bound") {
        const TreeShape sh = binary_shape(4);
        Rng rng(RngConfig{35, 1}, 2);
        int equalities = 0;
        for (int trial = 0; trial < 500; ++trial) {
            AbelianReport rep = abelian_bound_check({random_element(sh, rng)}, 4);
            CHECK(rep.holds);
            equalities += rep.equality;
        }
        CHECK(equalities > 0); // full-order elements achieve equality
    }
}

// ---------------------------------------------------------------------------
// Random generation experiment
// ---------------------------------------------------------------------------

TEST_CASE("random generation dimension experiment") {
    SUBCASE("three generators at moderate depth have high density") {
        ExperimentReport rep = random_generation_dimension_experiment(3, 2, 6, 30, {1414, 0});
        REQUIRE(rep.results.at("gamma_values").size() == 30);
        CHECK(rep.results.at("mean_gamma").get<double>() > 0.7);
        CHECK(rep.results.at("max_gamma").get<double>() <= 1.0 + 1e-12);
        CHECK(rep.results.at("min_gamma").get<double>() >= 0.0);
        CHECK(rep.params.at("guaranteed_regime").get<bool>());
    }

    SUBCASE("one generator reproduces the element order exponent") {
        const int n = 5;
        ExperimentReport rep = random_generation_dimension_experiment(1, 2, n, 20, {1717, 3});
        CHECK_FALSE(rep.params.at("guaranteed_regime").get<bool>());
        const TreeShape sh = binary_shape(n);
        for (std::uint64_t i = 0; i < 20; ++i) {
            Rng rng(RngConfig{1717, 3}, i);
            TreeAutomorphism g = haar_random(sh, rng);
            const double expected =
                static_cast<double>(element_order_exponent(g)) / ((1 << n) - 1);
            CHECK(rep.results.at("gamma_values")[i].get<double>() ==
                  doctest::Approx(expected).epsilon(1e-15));
        }
    }

    SUBCASE("deterministic across repeated runs") {
        ExperimentReport a = random_generation_dimension_experiment(2, 2, 5, 16, {77, 8});
        ExperimentReport b = random_generation_dimension_experiment(2, 2, 5, 16, {77, 8});
        CHECK(a.to_json(false).dump() == b.to_json(false).dump());
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(random_generation_dimension_experiment(0, 2, 4, 10, {1, 0}),
                        domain_error);
        CHECK_THROWS_AS(random_generation_dimension_experiment(2, 2, 4, 0, {1, 0}),
                        domain_error);
        CHECK_THROWS_AS(random_generation_dimension_experiment(2, 2, 11, 4, {1, 0}),
                        resource_error);
    }
}

TEST_CASE("large single chain stays consistent") {
    // one three-generator sample at depth 8: invariants on a big instance
    const TreeShape sh = binary_shape(8);
    Rng rng(RngConfig{2024, 0}, 0);
    std::vector<TreeAutomorphism> gens{haar_random(sh, rng), haar_random(sh, rng),
                                       haar_random(sh, rng)};
    StabilizerChain chain = build_chain(gens);
    CHECK(chain.order_exponent() <= 255);
    for (int l = 0; l < 8; ++l)
        CHECK(chain.kernel_exponent(l) >= chain.kernel_exponent(l + 1));
    for (const auto& g : gens) CHECK(chain.contains(g));
    // products and inverses of generators are members too
    CHECK(chain.contains(compose(gens[0], inverse(gens[1]))));
    CHECK(chain.contains(commutator(gens[0], gens[2])));
}
