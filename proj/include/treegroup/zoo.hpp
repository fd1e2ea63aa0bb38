#pragma once

// Named elements and groups: the adding machine, finite-state automaton
// elements (including the Grigorchuk generators), and subtree-stabilizer
// groups with a prescribed boundary measure.

#include <cstdint>
#include <vector>

#include "treegroup/rational.hpp"
#include "treegroup/rng.hpp"
#include "treegroup/tree_automorphism.hpp"

#include "json.hpp"

namespace treegroup {

// The +1 map on little-endian base-p digit strings: at every level l the
// induced permutation is a full p^l-cycle, and the ray counter of the image
// of v is N(v) + 1 (mod p^l). Its non-identity labels sit exactly on the
// all-(p-1) spine.
TreeAutomorphism adding_machine(int p, int depth);

// Element given by a finite deterministic complete automaton: reading the
// digits of a vertex from the root leads to a state whose output is the
// label at that vertex. Truncation to any depth is a valid automorphism and
// truncations at different depths agree on their common levels.
struct AutomatonElement {
    PermGroupPtr group;                        // label group H on {0..d-1}
    std::vector<int> outputs;                  // per state: H element index
    std::vector<std::vector<int>> transitions; // per state, per digit: next state
    int initial = 0;

    int state_count() const { return static_cast<int>(outputs.size()); }
    void validate() const; // throws domain_error on malformed tables

    // Two states: an active carry state that outputs +1 and follows the
    // digit p-1, and an idle state.
    static AutomatonElement adding_machine_automaton(int p);

    nlohmann::ordered_json to_json() const;
    static AutomatonElement from_json(const nlohmann::json& j);
};

TreeAutomorphism automaton_truncate(const AutomatonElement& a, int depth);

// The four standard generators a, b, c, d of the Grigorchuk group as one
// shared 5-state automaton family over the binary tree:
//   a = root swap;  b = (a, c),  c = (a, d),  d = (1, b).
std::vector<AutomatonElement> grigorchuk_automata();
std::vector<TreeAutomorphism> grigorchuk_generators(int depth);

// A rooted subtree T' of the d-ary tree described by a finite-state
// branching rule: every vertex of T' carries a state, and the state says
// which children belong to T' (entry -1 = absent) and which state each kept
// child carries. Finitely many states make the rule eventually periodic, so
// the level densities |T'_n| / d^n converge and the limit is an exact
// rational.
struct SubtreeSpec {
    struct State {
        std::vector<int> children; // size = degree; child state index or -1
    };

    int degree = 2;
    std::vector<State> states;
    int initial = 0;

    void validate() const; // throws domain_error on malformed tables
    // True when every state keeps either no child or all of them -- the
    // shape required of a pointwise-stabilizer group's defining subtree.
    bool zero_or_full() const;

    static SubtreeSpec full_tree(int degree);
    static SubtreeSpec root_only(int degree);
    // Digit 0 continues into a complete subtree, all other digits end.
    static SubtreeSpec half_tree(int degree);
    // Digit 0 continues along a single path, all other digits end.
    static SubtreeSpec single_ray(int degree);
    // Even levels keep every child, odd levels keep only digit 0.
    static SubtreeSpec alternating_levels(int degree);
};

// |T'_l| for l = 0..depth.
std::vector<std::uint64_t> subtree_level_counts(const SubtreeSpec& spec, int depth);
// mu_n = |T'_n| / degree^n, exact.
Rational subtree_measure_at(const SubtreeSpec& spec, int n);
// lim mu_n, exact: 1 on the states whose entire reachable set branches
// fully, 0 on the states that cannot reach such a set, and the absorption
// probability (a rational linear solve) in between.
Rational subtree_measure_limit(const SubtreeSpec& spec);

// Uniform random element of the pointwise stabilizer of T': identity labels
// at every branching vertex of T', independent uniform labels everywhere
// else. Requires a 0-or-full spec whose degree matches the shape.
TreeAutomorphism subtree_stabilizer_sample(const SubtreeSpec& spec,
                                           const TreeShape& shape, Rng& rng);

} // namespace treegroup
