#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treegroup/rational.hpp"
#include "treegroup/tree_automorphism.hpp"

namespace treegroup {

// Orbit tree of an element or subgroup acting on the depth-n tree: one node
// per orbit of a level, a node's parent is the orbit containing the parents
// of its vertices. Element trees carry an edge label on each node: the orbit
// of the child edge under the acting power of the element, recorded as the
// cycle starting at its smallest point. Subgroup trees are unlabeled.
struct OrbitTreeNode {
    std::uint64_t size = 1;          // number of tree vertices in the orbit
    int level = 0;
    int parent = -1;
    std::vector<int> children;
    std::vector<std::uint8_t> label; // empty for subgroup trees / the root
};

struct OrbitTree {
    int depth = 0;
    bool labeled = false;
    std::vector<OrbitTreeNode> nodes; // node 0 is the root; children are deeper

    std::vector<std::uint64_t> nodes_per_level() const; // size depth+1
    std::uint64_t total_nodes() const { return nodes.size(); }
};

OrbitTree orbit_tree_of_element(const TreeAutomorphism& g);
OrbitTree orbit_tree_of_subgroup(const std::vector<TreeAutomorphism>& gens);

// Canonical form deciding labeled-tree equivalence (elements) or rooted-tree
// isomorphism with orbit sizes (subgroups). Equal strings <=> equivalent.
std::string canonical_form(const OrbitTree& tree, const PermGroup& H);
std::string canonical_form_unlabeled(const OrbitTree& tree);

// Conjugacy test through orbit-tree equivalence. Supported for cyclic_p and
// symmetric_d label groups.
bool are_conjugate(const TreeAutomorphism& g1, const TreeAutomorphism& g2);

// Number of internal one-child nodes of a subgroup orbit tree (the quantity
// bounding log_p of an Abelian subgroup's order).
int solo_count(const OrbitTree& tree);

// A plain finite rooted tree by child counts, for density bookkeeping.
struct FiniteTree {
    // children[v] lists node ids; node 0 is the root.
    std::vector<std::vector<int>> children;
    std::vector<int> level;
    int depth = 0;

    static FiniteTree from_orbit_tree(const OrbitTree& t);
};

// Level densities of a d-bounded tree T and of its defect set U (vertices
// with fewer than d children): r_i counts vertices, delta_i = r_i / d^i.
// For 1-d trees (every vertex has 0 or d children) counting parents gives
// r_{i+1} = d*(r_i(T) - r_i(U)), so delta_i(U) = delta_i(T) - delta_{i+1}(T)
// and the partial sums telescope:
//   sum_{i<=m} delta_i(U) = 1 - delta_{m+1}(T).
// The identity is checked exactly at every level and reported.
struct DensityProfile {
    int d = 0;
    std::vector<std::uint64_t> r_tree;   // per level 0..depth
    std::vector<std::uint64_t> r_defect; // vertices of degree < d per level
    std::vector<Rational> delta_tree;
    std::vector<Rational> delta_defect;
    bool one_d_tree = false;   // every vertex has 0 or d children
    bool identity_holds = false; // partial-sum identity (1-d trees only)
};

DensityProfile tree_density_profile(const FiniteTree& tree, int d);

nlohmann::ordered_json orbit_tree_to_json(const OrbitTree& tree);
OrbitTree orbit_tree_from_json(const nlohmann::json& j);

} // namespace treegroup
