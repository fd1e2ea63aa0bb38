#pragma once

#include <cstdint>
#include <vector>

#include "treegroup/experiment.hpp"
#include "treegroup/orbit_tree.hpp"
#include "treegroup/rational.hpp"
#include "treegroup/rng.hpp"
#include "treegroup/tree_automorphism.hpp"

namespace treegroup {

// Offspring distribution of a branching process. Each atom is one possible
// child list together with its exact probability:
//  - for the orbit tree of a uniform random element, values are the orbit
//    lengths of a uniform element of H (its cycle type), and a child orbit
//    multiplies its parent's size by that length;
//  - for a branching random walk, values are displacement offsets.
struct OffspringLaw {
    struct Atom {
        std::vector<int> values;
        Rational prob;
    };
    std::vector<Atom> atoms;

    // Cycle type of a uniform random element of H.
    static OffspringLaw of_uniform_element(const PermGroup& H);
    // Walk offsets for the rotation group: one child at +1 with probability
    // (p-1)/p, p children at 0 with probability 1/p.
    static OffspringLaw rotation_walk(int p);
    static OffspringLaw from_atoms(std::vector<Atom> atoms);

    Rational mean_children() const;
    // index of a sampled atom, exactly (integer weights, no floating point)
    std::size_t sample(Rng& rng) const;

private:
    void finalize();
    std::vector<std::uint64_t> weights_;
    std::uint64_t weight_den_ = 0;
};

// Uniform random automorphism: every label independent uniform on H.
TreeAutomorphism haar_random(const TreeShape& shape, Rng& rng);

// Orbit tree sampled directly from its branching law, without constructing
// an element. Throws resource_error past node_budget.
OrbitTree gw_orbit_tree_sample(const OffspringLaw& law, int depth, Rng& rng,
                               std::uint64_t node_budget = 10'000'000);
OrbitTree gw_orbit_tree_sample(const PermGroup& H, int depth, Rng& rng,
                               std::uint64_t node_budget = 10'000'000);

// Locals of fixed vertices, counted per level (index 0 is the root).
std::vector<std::uint64_t> fixed_counts_per_level(const TreeAutomorphism& g);

// P(a uniform element fixes some level-n vertex), sampled from the critical
// branching process of fixed vertices. Reports n*p_hat and the limit value
// 2/(r-1) with r the rank of H on pairs. H must be transitive.
ExperimentReport survival_experiment(const PermGroup& H, int n,
                                     std::uint64_t samples, RngConfig cfg);

// E[K_n]/n and Var(K_n) for K_n = log_p |uniform element of level-n group|,
// sampled as the maximum displacement of the rotation walk over the orbit
// tree; elements are never materialized.
ExperimentReport turan_experiment(int p, int n, std::uint64_t samples,
                                  RngConfig cfg,
                                  std::uint64_t node_budget = 10'000'000);

// Maximum displacement at generation n of a branching random walk.
// Samples whose population exceeds node_budget are dropped and counted, as
// are extinct ones; estimates are over the completed survivors.
ExperimentReport brw_max_position(const OffspringLaw& law, int n,
                                  std::uint64_t samples, RngConfig cfg,
                                  std::uint64_t node_budget = 10'000'000);

// P(m independent uniform elements of H generate a transitive subgroup).
// Exact over the subgroup lattice; the closed form for the rotation group is
// 1 - p^(-m).
double q_transitive(const PermGroup& H, int m);
Rational q_transitive_exact(const PermGroup& H, int m);

// P(j independent uniform automorphisms act transitively on level n):
// the product of q(1 + (j-1) d^l) over levels l < n.
double transitivity_product(const PermGroup& H, int j, int n);

// Monte Carlo version: j Haar elements, level-n orbit count by union-find.
ExperimentReport transitivity_experiment(const PermGroupPtr& H, int j, int n,
                                         std::uint64_t samples, RngConfig cfg);

// Orbit tree of the subgroup generated by j independent uniform elements,
// sampled as a multi-type branching process: an orbit of length k spawns the
// orbits of (j-1)k+1 fresh uniform elements of H on X, scaled by k.
OrbitTree multitype_gw_sample(const PermGroup& H, int j, int depth, Rng& rng,
                              std::uint64_t node_budget = 10'000'000);

// Distribution of per-level orbit counts of the sampled subgroup orbit tree;
// reports the fraction of runs whose orbit count is constant over the upper
// half of the levels (the plateau fraction) and the single-orbit fraction.
ExperimentReport ray_boundedness_experiment(const PermGroup& H, int j,
                                            int depth, std::uint64_t samples,
                                            RngConfig cfg);

// Evaluates a reduced word in k letters (letters +-1..+-k, negative for the
// inverse) at j independent Haar elements and estimates, per level, the
// probability that the value fixes some vertex of that level. Also fits the
// log-log decay rate over the upper half of the levels.
ExperimentReport word_fixed_point_experiment(const std::vector<int>& word,
                                             const PermGroupPtr& H, int depth,
                                             std::uint64_t samples,
                                             RngConfig cfg);

// Free reduction (cancel adjacent x x^-1); empty input stays empty.
std::vector<int> reduce_word(const std::vector<int>& word);

} // namespace treegroup
