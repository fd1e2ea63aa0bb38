#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <random>
#include <set>

#include "treegroup/errors.hpp"
#include "treegroup/stochastic.hpp"

using namespace treegroup;

// ---------------------------------------------------------------------------
// Oracles: exact extinction/maximum recursions for branching processes, and
// total-variation distance between empirical histograms. None of them touch
// the samplers under test.
// ---------------------------------------------------------------------------

namespace {

// pmf of the number of fixed points of a uniform element of H
std::vector<double> fixed_pmf(const PermGroup& H) {
    std::vector<double> pmf(static_cast<std::size_t>(H.degree()) + 1, 0.0);
    for (int e = 0; e < H.size(); ++e)
        pmf[static_cast<std::size_t>(H.fixed_points(e))] += 1.0 / H.size();
    return pmf;
}

// P(the fixed-vertex process of a uniform element survives to level n),
// via the generating-function extinction recursion
double exact_survival(const PermGroup& H, int n) {
    const auto pmf = fixed_pmf(H);
    double u = 0.0;
    for (int step = 0; step < n; ++step) {
        double nu = 0.0;
        for (std::size_t c = 0; c < pmf.size(); ++c)
            nu += pmf[c] * std::pow(u, static_cast<double>(c));
        u = nu;
    }
    return 1.0 - u;
}

// E[max displacement at level n] of the rotation walk, by exact dynamic
// programming on G_n(k) = P(K_n <= k)
double exact_mean_K(int p, int n) {
    std::vector<double> G(static_cast<std::size_t>(n) + 1, 1.0);
    std::vector<double> next(G.size());
    const double a = static_cast<double>(p - 1) / p;
    const double b = 1.0 / p;
    for (int step = 0; step < n; ++step) {
        for (std::size_t k = 0; k < G.size(); ++k)
            next[k] = a * (k > 0 ? G[k - 1] : 0.0) +
                      b * std::pow(G[k], static_cast<double>(p));
        std::swap(G, next);
    }
    double mean = 0.0;
    for (std::size_t k = 0; k + 1 < G.size(); ++k) mean += 1.0 - G[k];
    return mean;
}

double tv_distance(const std::map<long long, std::uint64_t>& a, std::uint64_t na,
                   const std::map<long long, std::uint64_t>& b, std::uint64_t nb) {
    std::set<long long> keys;
    for (const auto& [k, v] : a) keys.insert(k);
    for (const auto& [k, v] : b) keys.insert(k);
    double tv = 0.0;
    for (long long k : keys) {
        const double pa = a.count(k) ? static_cast<double>(a.at(k)) / static_cast<double>(na) : 0.0;
        const double pb = b.count(k) ? static_cast<double>(b.at(k)) / static_cast<double>(nb) : 0.0;
        tv += std::abs(pa - pb);
    }
    return tv / 2.0;
}

std::uint64_t nodes_at_level(const OrbitTree& t, int level) {
    std::uint64_t c = 0;
    for (const auto& node : t.nodes)
        if (node.level == level) ++c;
    return c;
}

} // namespace

TEST_CASE("engine basics: determinism, range, rejection sampling") {
    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
    Rng r(17);
    std::vector<std::uint64_t> bins(7, 0);
    const int N = 70000;
    for (int i = 0; i < N; ++i) {
        const std::uint64_t v = r.uniform_below(7);
        REQUIRE(v < 7);
        bins[static_cast<std::size_t>(v)]++;
    }
    const double expect = N / 7.0;
    const double sigma = std::sqrt(N * (1.0 / 7) * (6.0 / 7));
    for (auto c : bins)
        CHECK(std::abs(static_cast<double>(c) - expect) < 5 * sigma);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(r.uniform_below(1) == 0);
    CHECK_THROWS_AS(r.uniform_below(0), domain_error);
}

TEST_CASE("per-sample seeds are distinct across indices and streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i)
        seen.insert(derive_seed(RngConfig{42, 0}, i));
    for (std::uint64_t s = 0; s < 100; ++s)
        seen.insert(derive_seed(RngConfig{42, s}, 0));
    CHECK(seen.size() == 1099); // index 0 of stream 0 appears twice
}

TEST_CASE("uniform element sampling: identity at depth 0, uniform law") {
    auto H = PermGroup::cyclic(2);
    Rng rng(7);
    CHECK(haar_random(TreeShape(H, 0), rng).is_identity());

    TreeShape sh1(H, 1);
    int nontrivial = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i)
        if (!haar_random(sh1, rng).is_identity()) ++nontrivial;
    const double sigma = std::sqrt(N * 0.25);
    CHECK(std::abs(nontrivial - N / 2.0) < 3 * sigma);

    // chi-square uniformity over the 8 elements of the depth-2 group
    TreeShape sh2(H, 2);
    std::map<std::vector<std::uint8_t>, std::uint64_t> counts;
    for (int i = 0; i < N; ++i) counts[haar_random(sh2, rng).labels()]++;
    REQUIRE(counts.size() == 8);
    double chi2 = 0.0;
    const double expect = N / 8.0;
    for (const auto& [labels, c] : counts) {
        const double diff = static_cast<double>(c) - expect;
        chi2 += diff * diff / expect;
    }
    CHECK(chi2 < 24.32); // df 7, level 0.001
}

TEST_CASE("offspring laws carry exact cycle-type probabilities") {
    auto law2 = OffspringLaw::of_uniform_element(*PermGroup::cyclic(2));
    REQUIRE(law2.atoms.size() == 2);
    CHECK(law2.atoms[0].values == std::vector<int>{1, 1});
    CHECK(law2.atoms[0].prob == Rational(1, 2));
    CHECK(law2.atoms[1].values == std::vector<int>{2});
    CHECK(law2.atoms[1].prob == Rational(1, 2));

    auto law3 = OffspringLaw::of_uniform_element(*PermGroup::cyclic(3));
    REQUIRE(law3.atoms.size() == 2);
    CHECK(law3.atoms[0].prob == Rational(1, 3));
    CHECK(law3.atoms[1].values == std::vector<int>{3});
    CHECK(law3.atoms[1].prob == Rational(2, 3));

    auto laws3 = OffspringLaw::of_uniform_element(*PermGroup::symmetric(3));
    REQUIRE(laws3.atoms.size() == 3);
    CHECK(laws3.mean_children() == Rational(11, 6));
    // mean number of fixed points is 1 for any transitive group
    for (const auto& Hp : {PermGroup::cyclic(2), PermGroup::cyclic(5),
                           PermGroup::symmetric(3), PermGroup::symmetric(4)}) {
        auto law = OffspringLaw::of_uniform_element(*Hp);
        Rational mean_fixed(0);
        for (const auto& atom : law.atoms) {
            int ones = 0;
            for (int v : atom.values)
                if (v == 1) ++ones;
            mean_fixed += atom.prob * Rational(ones);
        }
        CHECK(mean_fixed == Rational(1));
    }

    CHECK_THROWS_AS(OffspringLaw::from_atoms(
                        {{std::vector<int>{1}, Rational(1, 2)}}),
                    domain_error);
    CHECK_THROWS_AS(OffspringLaw::from_atoms(
                        {{std::vector<int>{1}, Rational(3, 2)},
                         {std::vector<int>{2}, Rational(-1, 2)}}),
                    domain_error);
}

TEST_CASE("law sampling frequencies match the exact weights") {
    auto law = OffspringLaw::rotation_walk(3);
    Rng rng(99);
    const int N = 90000;
    std::uint64_t first = 0;
    for (int i = 0; i < N; ++i)
        if (law.sample(rng) == 0) ++first;
    const double expect = N * 2.0 / 3.0;
    const double sigma = std::sqrt(N * (2.0 / 3) * (1.0 / 3));
    CHECK(std::abs(static_cast<double>(first) - expect) < 5 * sigma);
}

TEST_CASE("branching sampler: small cases and budget") {
    Rng rng(1);
    auto H = PermGroup::cyclic(3);
    OrbitTree t0 = gw_orbit_tree_sample(*H, 0, rng);
    CHECK(t0.total_nodes() == 1);

    // root offspring: one child w.p. (p-1)/p
    int singles = 0;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        OrbitTree t = gw_orbit_tree_sample(*H, 1, rng);
        if (t.total_nodes() == 2) ++singles;
    }
    const double expect = N * 2.0 / 3.0;
    const double sigma = std::sqrt(N * (2.0 / 3) * (1.0 / 3));
    CHECK(std::abs(static_cast<double>(singles) - expect) < 4 * sigma);

    auto doubling = OffspringLaw::from_atoms({{std::vector<int>{1, 1}, Rational(1)}});
    CHECK_THROWS_AS(gw_orbit_tree_sample(doubling, 25, rng, 1000), resource_error);
}

TEST_CASE("branching sampler agrees with element sampling in distribution") {
    auto run_tv = [](const PermGroupPtr& H, int depth, int level, int N,
                     double bound) {
        TreeShape sh(H, depth);
        Rng rng_elem(2025), rng_gw(4050);
        std::map<long long, std::uint64_t> from_elem, from_gw;
        for (int i = 0; i < N; ++i) {
            OrbitTree te = orbit_tree_of_element(haar_random(sh, rng_elem));
            from_elem[static_cast<long long>(nodes_at_level(te, level))]++;
            OrbitTree tg = gw_orbit_tree_sample(*H, depth, rng_gw);
            from_gw[static_cast<long long>(nodes_at_level(tg, level))]++;
        }
        const double tv = tv_distance(from_elem, N, from_gw, N);
        CHECK(tv < bound);
    };
    run_tv(PermGroup::cyclic(2), 3, 2, 100000, 0.01);
    run_tv(PermGroup::cyclic(2), 3, 3, 100000, 0.01);
    run_tv(PermGroup::symmetric(3), 2, 2, 30000, 0.02);
}

TEST_CASE("fixed vertices per level match brute force") {
    std::mt19937_64 seed_gen(3);
    auto check_shape = [&](const TreeShape& sh, int reps) {
        for (int rep = 0; rep < reps; ++rep) {
            Rng rng(seed_gen());
            TreeAutomorphism g = haar_random(sh, rng);
            const auto counts = fixed_counts_per_level(g);
            REQUIRE(counts.size() == static_cast<std::size_t>(sh.depth()) + 1);
            for (int l = 0; l <= sh.depth(); ++l) {
                std::uint64_t direct = 0;
                for (std::size_t v = 0; v < sh.level_size(l); ++v)
                    if (apply_local(g, l, v) == v) ++direct;
                CHECK(counts[static_cast<std::size_t>(l)] == direct);
            }
        }
    };
    check_shape(TreeShape(PermGroup::cyclic(2), 5), 10);
    check_shape(TreeShape(PermGroup::cyclic(3), 3), 10);
    check_shape(TreeShape(PermGroup::symmetric(3), 3), 10);
}

TEST_CASE("survival probabilities track the exact recursion") {
    auto H2 = PermGroup::cyclic(2);

    auto r0 = survival_experiment(*H2, 0, 1000, RngConfig{1, 0});
    CHECK(r0.results.at("p_fix_level_n").get<double>() == 1.0);

    auto r1 = survival_experiment(*H2, 1, 100000, RngConfig{2, 0});
    const double p1 = r1.results.at("p_fix_level_n").get<double>();
    CHECK(std::abs(p1 - 0.5) < 4 * std::sqrt(0.25 / 100000));

    auto r8 = survival_experiment(*H2, 8, 200000, RngConfig{3, 0});
    const double p8 = r8.results.at("p_fix_level_n").get<double>();
    const double e8 = exact_survival(*H2, 8);
    CHECK(std::abs(p8 - e8) < 4 * std::sqrt(e8 * (1 - e8) / 200000));

    auto r64 = survival_experiment(*H2, 64, 200000, RngConfig{4, 0});
    const double p64 = r64.results.at("p_fix_level_n").get<double>();
    const double e64 = exact_survival(*H2, 64);
    CHECK(std::abs(p64 - e64) < 4 * std::sqrt(e64 * (1 - e64) / 200000));
    const double np = r64.results.at("n_times_p").get<double>();
    CHECK(np > 1.6);
    CHECK(np < 2.2);
    CHECK(r64.results.at("limit_2_over_r_minus_1").get<double>() == 2.0);
    CHECK(r64.results.at("rank_on_pairs").get<int>() == 2);

    auto S3 = PermGroup::symmetric(3);
    auto rs = survival_experiment(*S3, 6, 200000, RngConfig{5, 0});
    const double ps = rs.results.at("p_fix_level_n").get<double>();
    const double es = exact_survival(*S3, 6);
    CHECK(std::abs(ps - es) < 4 * std::sqrt(es * (1 - es) / 200000));

    auto intransitive = PermGroup::explicit_list(
        {{0, 1, 2}, {1, 0, 2}}); // fixes the third point
    CHECK_THROWS_AS(survival_experiment(*intransitive, 4, 10, RngConfig{6, 0}),
                    domain_error);
}

TEST_CASE("maximum displacement statistics match the exact recursion") {
    auto r1 = turan_experiment(2, 1, 100000, RngConfig{11, 0});
    const double m1 = r1.results.at("mean_K").get<double>();
    CHECK(std::abs(m1 - 0.5) < 4 * std::sqrt(0.25 / 100000));

    auto r10 = turan_experiment(2, 10, 20000, RngConfig{12, 0});
    const double m10 = r10.results.at("mean_K").get<double>();
    const double se10 = r10.results.at("stderr_mean_K").get<double>();
    CHECK(std::abs(m10 - exact_mean_K(2, 10)) < 4 * se10 + 1e-9);

    auto r12 = turan_experiment(2, 12, 10000, RngConfig{13, 0});
    CHECK(r12.results.at("var_K").get<double>() < 5.0);

    auto r3 = turan_experiment(3, 8, 20000, RngConfig{14, 0});
    const double m3 = r3.results.at("mean_K").get<double>();
    const double se3 = r3.results.at("stderr_mean_K").get<double>();
    CHECK(std::abs(m3 - exact_mean_K(3, 8)) < 4 * se3 + 1e-9);

    CHECK_THROWS_AS(turan_experiment(4, 3, 10, RngConfig{15, 0}), domain_error);

    // tiny budget: every sample either completes or is counted as aborted
    auto rb = turan_experiment(2, 40, 50, RngConfig{16, 0}, 10000);
    CHECK(rb.results.at("aborted").get<std::uint64_t>() +
              rb.results.at("completed").get<std::uint64_t>() ==
          50);
    CHECK(rb.results.at("aborted").get<std::uint64_t>() > 0);
}

TEST_CASE("generic walk maximum: exact cases and coupling") {
    auto one_step = OffspringLaw::from_atoms({{std::vector<int>{1}, Rational(1)}});
    auto rd = brw_max_position(one_step, 17, 500, RngConfig{21, 0});
    CHECK(rd.results.at("mean_X").get<double>() == 17.0);
    CHECK(rd.results.at("var_X").get<double>() == 0.0);

    // the rotation walk couples with the displacement maximum of the orbit
    // process: compare against the exact recursion and the element-free
    // order-statistics experiment
    auto walk = OffspringLaw::rotation_walk(2);
    auto rw = brw_max_position(walk, 6, 100000, RngConfig{22, 0});
    auto rt = turan_experiment(2, 6, 100000, RngConfig{23, 0});
    const double mw = rw.results.at("mean_X").get<double>();
    const double mt = rt.results.at("mean_K").get<double>();
    const double sew = rw.results.at("stderr_mean_X").get<double>();
    const double set = rt.results.at("stderr_mean_K").get<double>();
    CHECK(std::abs(mw - exact_mean_K(2, 6)) < 4 * sew + 1e-9);
    CHECK(std::abs(mw - mt) < 4 * (sew + set) + 1e-9);

    // distributional coupling with the orbit tree of a uniform element:
    // max displacement = log2 of the largest leaf orbit
    std::map<long long, std::uint64_t> from_tree, from_walk;
    TreeShape sh(PermGroup::cyclic(2), 6);
    Rng rng_tree(31), rng_walk(32);
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        OrbitTree t = gw_orbit_tree_sample(*sh.group(), 6, rng_tree);
        std::uint64_t best = 1;
        for (const auto& node : t.nodes)
            if (node.level == 6) best = std::max(best, node.size);
        long long k = 0;
        while ((std::uint64_t{1} << k) < best) ++k;
        from_tree[k]++;
        std::vector<long long> disp{0}, next;
        for (int level = 0; level < 6; ++level) {
            next.clear();
            for (long long x : disp) {
                const auto& atom = walk.atoms[walk.sample(rng_walk)];
                for (int off : atom.values) next.push_back(x + off);
            }
            std::swap(disp, next);
        }
        from_walk[*std::max_element(disp.begin(), disp.end())]++;
    }
    CHECK(tv_distance(from_tree, N, from_walk, N) < 0.01);

    // subcritical law: extinctions are counted
    auto dying = OffspringLaw::from_atoms(
        {{std::vector<int>{}, Rational(1, 2)}, {std::vector<int>{1}, Rational(1, 2)}});
    auto re = brw_max_position(dying, 5, 2000, RngConfig{24, 0});
    CHECK(re.results.at("extinct").get<std::uint64_t>() > 0);
    CHECK(re.results.at("extinct").get<std::uint64_t>() +
              re.results.at("completed").get<std::uint64_t>() ==
          2000);

    // explosion with a tiny budget aborts every sample
    auto doubling = OffspringLaw::from_atoms({{std::vector<int>{0, 0}, Rational(1)}});
    CHECK_THROWS_AS(brw_max_position(doubling, 30, 10, RngConfig{25, 0}, 1000),
                    resource_error);
}

TEST_CASE("transitive generation probability: closed form and lattice") {
    auto H2 = PermGroup::cyclic(2);
    for (int m = 0; m <= 10; ++m) {
        const Rational expect =
            Rational(1) - Rational(1, std::int64_t{1} << m);
        CHECK(q_transitive_exact(*H2, m) == expect);
        CHECK(std::abs(q_transitive(*H2, m) - expect.to_double()) < 1e-12);
    }
    auto H3 = PermGroup::cyclic(3);
    CHECK(q_transitive_exact(*H3, 2) == Rational(8, 9));

    // symmetric group: Monte Carlo oracle over generated subgroups
    auto S3 = PermGroup::symmetric(3);
    for (int m : {1, 2, 3}) {
        Rng rng(static_cast<std::uint64_t>(100 + m));
        const int N = 200000;
        int transitive = 0;
        for (int i = 0; i < N; ++i) {
            // orbit of point 0 under m uniform elements
            std::vector<int> elems;
            for (int t = 0; t < m; ++t) elems.push_back(rng.uniform_int(6));
            std::set<int> orbit{0};
            bool grew = true;
            while (grew) {
                grew = false;
                for (int x : std::vector<int>(orbit.begin(), orbit.end()))
                    for (int e : elems) {
                        if (orbit.insert(S3->image(e, x)).second) grew = true;
                        if (orbit.insert(S3->image(S3->inv(e), x)).second) grew = true;
                    }
            }
            if (orbit.size() == 3) ++transitive;
        }
        const double q = q_transitive(*S3, m);
        const double se = std::sqrt(q * (1 - q) / N);
        CHECK(std::abs(static_cast<double>(transitive) / N - q) < 4 * se + 1e-9);
        CHECK(std::abs(q_transitive_exact(*S3, m).to_double() - q) < 1e-12);
    }
}

TEST_CASE("transitivity products: closed form, limits, experiment") {
    auto H2 = PermGroup::cyclic(2);
    // independent closed-form loop
    auto closed = [](int n) {
        double prod = 1.0;
        for (int l = 0; l < n; ++l)
            prod *= 1.0 - std::pow(2.0, -(1.0 + std::pow(2.0, l)));
        return prod;
    };
    CHECK(std::abs(transitivity_product(*H2, 2, 20) - closed(20)) < 1e-14);
    CHECK(std::abs(transitivity_product(*H2, 2, 20) - 0.6344956626115023) < 1e-12);
    CHECK(std::abs(transitivity_product(*H2, 2, 4) - closed(4)) < 1e-14);

    for (int p : {2, 3, 5}) {
        auto H = PermGroup::cyclic(p);
        CHECK(std::abs(transitivity_product(*H, 1, 1) -
                       static_cast<double>(p - 1) / p) < 1e-15);
    }

    auto rexp = transitivity_experiment(H2, 2, 4, 100000, RngConfig{41, 0});
    CHECK(rexp.results.at("abs_error").get<double>() < 0.01);

    auto S3 = PermGroup::symmetric(3);
    auto rs = transitivity_experiment(S3, 2, 2, 30000, RngConfig{42, 0});
    CHECK(rs.results.at("abs_error").get<double>() < 0.015);
}

TEST_CASE("multi-type orbit process") {
    Rng rng(51);
    auto H2 = PermGroup::cyclic(2);
    CHECK(multitype_gw_sample(*H2, 2, 0, rng).total_nodes() == 1);

    // j = 1 reduces to the single-element branching law
    {
        std::map<long long, std::uint64_t> multi, single;
        Rng ra(52), rb(53);
        const int N = 100000;
        for (int i = 0; i < N; ++i) {
            multi[static_cast<long long>(
                nodes_at_level(multitype_gw_sample(*H2, 1, 3, ra), 2))]++;
            single[static_cast<long long>(
                nodes_at_level(gw_orbit_tree_sample(*H2, 3, rb), 2))]++;
        }
        CHECK(tv_distance(multi, N, single, N) < 0.01);
    }

    // j = 2 matches direct generator sampling
    auto tv_vs_direct = [](const PermGroupPtr& H, int j, int depth, int level,
                           int N, double bound) {
        TreeShape sh(H, depth);
        std::map<long long, std::uint64_t> multi, direct;
        Rng ra(54), rb(55);
        for (int i = 0; i < N; ++i) {
            multi[static_cast<long long>(
                nodes_at_level(multitype_gw_sample(*H, j, depth, ra), level))]++;
            std::vector<TreeAutomorphism> gens;
            for (int t = 0; t < j; ++t) gens.push_back(haar_random(sh, rb));
            direct[static_cast<long long>(
                nodes_at_level(orbit_tree_of_subgroup(gens), level))]++;
        }
        CHECK(tv_distance(multi, N, direct, N) < bound);
    };
    tv_vs_direct(PermGroup::cyclic(2), 2, 2, 2, 100000, 0.01);
    tv_vs_direct(PermGroup::cyclic(2), 2, 3, 3, 100000, 0.01);
    tv_vs_direct(PermGroup::symmetric(3), 2, 2, 2, 30000, 0.02);

    // every child must exceed a one-node budget
    Rng rc(56);
    CHECK_THROWS_AS(multitype_gw_sample(*H2, 1, 1, rc, 1), resource_error);
    CHECK_THROWS_AS(multitype_gw_sample(*H2, 0, 1, rc), domain_error);
}

TEST_CASE("orbit count plateaus") {
    auto H2 = PermGroup::cyclic(2);
    auto rep = ray_boundedness_experiment(*H2, 2, 12, 20000, RngConfig{61, 0});
    CHECK(rep.results.at("plateau_fraction").get<double>() > 0.9);
    const auto means = rep.results.at("mean_orbit_count").get<std::vector<double>>();
    REQUIRE(means.size() == 13);
    CHECK(means[0] == 1.0);

    auto rep6 = ray_boundedness_experiment(*H2, 6, 8, 100000, RngConfig{62, 0});
    const double single = rep6.results.at("single_orbit_fraction").get<double>();
    CHECK(std::abs(single - transitivity_product(*H2, 6, 8)) < 0.01);

    CHECK_THROWS_AS(ray_boundedness_experiment(*H2, 1, 8, 10, RngConfig{63, 0}),
                    domain_error);
}

TEST_CASE("word reduction") {
    CHECK(reduce_word({1, 2, -2, -1, 3}) == std::vector<int>{3});
    CHECK(reduce_word({1, -1}) == std::vector<int>{});
    CHECK(reduce_word({}) == std::vector<int>{});
    CHECK(reduce_word({1, 1, -1, 2}) == std::vector<int>{1, 2});
    CHECK_THROWS_AS(reduce_word({1, 0}), domain_error);
}

TEST_CASE("word values: single letter matches survival") {
    auto H2 = PermGroup::cyclic(2);
    auto rep = word_fixed_point_experiment({1}, H2, 8, 20000, RngConfig{71, 0});
    const auto p = rep.results.at("p_fixed_per_level").get<std::vector<double>>();
    REQUIRE(p.size() == 9);
    CHECK(p[0] == 1.0);
    for (int n : {4, 8}) {
        const double e = exact_survival(*H2, n);
        CHECK(std::abs(p[static_cast<std::size_t>(n)] - e) <
              4 * std::sqrt(e * (1 - e) / 20000));
    }

    // g*g acts trivially on level 1, so level 1 is always fixed
    auto rep2 = word_fixed_point_experiment({1, 1}, H2, 4, 2000, RngConfig{72, 0});
    const auto p2 = rep2.results.at("p_fixed_per_level").get<std::vector<double>>();
    CHECK(p2[1] == 1.0);
}

TEST_CASE("commutator word: polynomial decay of fixed-point probability") {
    auto H2 = PermGroup::cyclic(2);
    auto rep = word_fixed_point_experiment({-1, -2, 1, 2}, H2, 12, 30000,
                                           RngConfig{73, 0});
    const auto p = rep.results.at("p_fixed_per_level").get<std::vector<double>>();
    // rotations of level 1 commute, so level 1 is always fully fixed
    CHECK(p[1] == 1.0);
    // the level-2 action is trivial or fixed-point-free, so the fix
    // probability equals the fraction of commuting pairs in the
    // depth-2 group: 40/64
    CHECK(std::abs(p[2] - 0.625) < 0.012);
    for (std::size_t l = 2; l <= 12; ++l) CHECK(p[l] < p[l - 1]);
    // n * p grows like a + b log n through this depth range, so the
    // fitted top-half slope sits near -1/2 here and drifts toward the
    // asymptotic -1 only at much greater depth
    const double slope = rep.results.at("decay_exponent").get<double>();
    CHECK(slope < -0.44);
    CHECK(slope > -0.60);
}

TEST_CASE("conjugate words have identical fixed-point statistics") {
    auto H2 = PermGroup::cyclic(2);
    const RngConfig cfg{74, 0};
    auto base = word_fixed_point_experiment({1, 2}, H2, 8, 5000, cfg);
    auto conj = word_fixed_point_experiment({1, 1, 2, -1}, H2, 8, 5000, cfg);
    CHECK(base.results.at("p_fixed_per_level") ==
          conj.results.at("p_fixed_per_level"));
}

TEST_CASE("trivial words are rejected") {
    auto H2 = PermGroup::cyclic(2);
    CHECK_THROWS_AS(word_fixed_point_experiment({1, -1}, H2, 4, 10, RngConfig{75, 0}),
                    domain_error);
    CHECK_THROWS_AS(word_fixed_point_experiment({}, H2, 4, 10, RngConfig{76, 0}),
                    domain_error);
}

TEST_CASE("reports are bit-identical for identical configs") {
    auto H2 = PermGroup::cyclic(2);
    auto a = survival_experiment(*H2, 16, 5000, RngConfig{81, 3});
    auto b = survival_experiment(*H2, 16, 5000, RngConfig{81, 3});
    CHECK(a.to_json(false).dump() == b.to_json(false).dump());
    CHECK(a.to_csv() == b.to_csv());
    auto c = survival_experiment(*H2, 16, 5000, RngConfig{81, 4});
    CHECK(a.to_json(false).dump() != c.to_json(false).dump());

    // thread count must not change the bytes
    setenv("TREEGROUP_THREADS", "1", 1);
    auto t1 = turan_experiment(2, 10, 20000, RngConfig{82, 0});
    setenv("TREEGROUP_THREADS", "4", 1);
    auto t4 = turan_experiment(2, 10, 20000, RngConfig{82, 0});
    unsetenv("TREEGROUP_THREADS");
    CHECK(t1.to_json(false).dump() == t4.to_json(false).dump());
}

TEST_CASE("report serialization carries config and timing") {
    auto H2 = PermGroup::cyclic(2);
    auto rep = survival_experiment(*H2, 4, 1000, RngConfig{91, 7});
    auto j = rep.to_json(true);
    CHECK(j.at("name") == "survival");
    CHECK(j.at("rng").at("seed") == 91);
    CHECK(j.at("rng").at("stream") == 7);
    CHECK(j.at("samples") == 1000);
    CHECK(j.contains("timing"));
    CHECK_FALSE(rep.to_json(false).contains("timing"));
    const std::string csv = rep.to_csv();
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(csv.find("\nsamples,1000\n") != std::string::npos);
}
