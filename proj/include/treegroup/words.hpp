#pragma once

// Free-group words and their interaction with tree automorphism groups:
// evaluation, exponent-sum vectors, even covering of fiber products, kernel
// censuses of word maps, orbit (Schreier) graphs with their stabilizer
// words, 1-chains over F_p, and the minimal twisting power kappa.

#include <cstdint>
#include <string>
#include <vector>

#include "treegroup/experiment.hpp"
#include "treegroup/rng.hpp"
#include "treegroup/tree_automorphism.hpp"

#include "json.hpp"

namespace treegroup {

// Word in a free group, stored fully reduced. Letter +i stands for the i-th
// generator (1-based), letter -i for its inverse; the empty word is the
// identity.
class FreeWord {
public:
    FreeWord() = default;
    explicit FreeWord(std::vector<int> letters); // reduces on construction

    // "a b A b b": one letter per alphabetic character (whitespace
    // optional), capitals are inverses.
    static FreeWord parse(const std::string& text);
    // JSON array of signed 1-based indices, reduced on load.
    static FreeWord from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    std::string str() const;

    const std::vector<int>& letters() const { return letters_; }
    bool empty() const { return letters_.empty(); }
    std::size_t length() const { return letters_.size(); }
    // Largest generator index used (0 for the empty word).
    int max_index() const;
    FreeWord inverse() const;

    bool operator==(const FreeWord& o) const { return letters_ == o.letters_; }
    bool operator!=(const FreeWord& o) const { return letters_ != o.letters_; }

private:
    std::vector<int> letters_;
};

// Concatenation followed by free reduction.
FreeWord concat(const FreeWord& a, const FreeWord& b);

// Substitutes gens[i-1] for letter i and multiplies left to right.
TreeAutomorphism evaluate(const FreeWord& w, const std::vector<TreeAutomorphism>& gens);

// Per-generator exponent totals mod `modulus`, as a length-k vector.
std::vector<int> exponent_sum_vector(const FreeWord& w, int k, int modulus);

// Every element of the full level-`depth` group, one per label array.
std::vector<TreeAutomorphism> enumerate_group(const TreeShape& shape,
                                              std::uint64_t budget = std::uint64_t{1} << 24);

// Exhaustive verification that the word map G^n -> G^k (free letters 1..n,
// letters n+1.. fixed to the given values) is |G|^(n-k)-to-one and onto.
// Requires the words' exponent-sum vectors restricted to the free letters
// to be independent mod p.
struct EvenCoverReport {
    bool even = false;
    std::uint64_t group_order = 0;
    std::uint64_t domain_tuples = 0;  // |G|^n
    std::uint64_t expected_fiber = 0; // |G|^(n-k)
    std::uint64_t images_seen = 0;
    // when a fiber has the wrong size: its image tuple and that size
    std::vector<TreeAutomorphism> witness_image;
    std::uint64_t witness_fiber = 0;
};
EvenCoverReport even_cover_check(const std::vector<FreeWord>& words,
                                 const std::vector<TreeAutomorphism>& group_elements,
                                 int free_letters,
                                 const std::vector<TreeAutomorphism>& fixed_values = {},
                                 std::uint64_t budget = std::uint64_t{1} << 24);

// Number of k-tuples in the full level-n group over C_p on which the word
// evaluates to the identity, with the dimension-style ratio
// log |solutions| / log |group|^k. Exhaustive while |group|^k fits the
// tuple budget, otherwise a seeded Monte Carlo estimate with a 95%
// confidence interval on the ratio.
struct KernelCensusReport {
    std::string mode; // "exhaustive" or "monte_carlo"
    int letters = 0;
    int prime = 0;
    int depth = 0;
    std::uint64_t inspected = 0; // tuples enumerated or samples drawn
    std::uint64_t hits = 0;
    double log2_kernel = 0.0; // log2 of the (estimated) solution count
    double log2_domain = 0.0; // k * log2 |group|
    double ratio = 0.0;       // log2_kernel / log2_domain
    double ratio_ci_low = 0.0;
    double ratio_ci_high = 0.0;
};
KernelCensusReport kernel_census(const FreeWord& w, int k, int p, int n,
                                 std::uint64_t tuple_budget = std::uint64_t{1} << 24,
                                 std::uint64_t mc_samples = 100'000,
                                 RngConfig cfg = {});

// Orbit graph of a generator list acting on one level of the tree: vertex
// set X = that level, one edge (v, s) from v to its image under generator
// s. Edges are indexed v * generator_count + s.
struct SchreierGraph {
    TreeShape shape;
    int level = 0;
    std::vector<std::vector<std::uint32_t>> images;    // per generator
    std::vector<std::vector<std::uint32_t>> preimages; // inverse tables

    std::size_t vertex_count() const { return images.empty() ? 0 : images[0].size(); }
    std::size_t generator_count() const { return images.size(); }
    std::size_t edge_count() const { return vertex_count() * generator_count(); }
    std::size_t edge_index(std::size_t v, std::size_t s) const {
        return v * generator_count() + s;
    }
};
SchreierGraph schreier_graph(const std::vector<TreeAutomorphism>& gens, int level);

// Free generators of the stabilizer of `basepoint` inside the free group on
// the graph's generators: one fundamental-cycle word per non-tree edge of a
// breadth-first spanning tree of the basepoint's component, |E| - |V| + 1
// words in total (E, V of that component).
std::vector<FreeWord> stabilizer_words(const SchreierGraph& graph, std::size_t basepoint);

// Edge-usage vector over F_p of the path traced by a word from a vertex.
struct OneChain {
    int prime = 2;
    std::vector<std::uint8_t> coeffs; // indexed by edge_index
    bool is_zero() const;
};
OneChain one_chain(const FreeWord& w, std::size_t v, const SchreierGraph& graph);
// The chain of the closed path: the word is repeated until it first returns
// to v (the orbit length of v under the word's value), so the boundary
// vanishes.
OneChain closed_chain(const FreeWord& w, std::size_t v, const SchreierGraph& graph);
// Vertex vector sum of coeff * (head - tail) over the edges.
std::vector<std::uint8_t> boundary(const OneChain& chain, const SchreierGraph& graph);
OneChain add(const OneChain& a, const OneChain& b);
// Rank over F_p by Gaussian elimination.
int chain_rank(const std::vector<OneChain>& chains);

// Smallest power kappa = p^a <= |X| such that the stabilizer of the vertex
// contains a word in {g1, g2, g3^kappa} whose letter-3 exponent sum is not
// divisible by p, decided by linear algebra on the fundamental-cycle words;
// the witness is one such word. kappa_min scans all basepoints of the level
// and returns the first minimizer.
struct KappaResult {
    std::size_t vertex = 0;
    std::uint64_t kappa = 1;
    FreeWord witness;
    bool third_has_fixed_point = false; // g3 itself fixes some level vertex
};
KappaResult kappa(const TreeAutomorphism& g1, const TreeAutomorphism& g2,
                  const TreeAutomorphism& g3, int level, std::size_t vertex);
KappaResult kappa_min(const TreeAutomorphism& g1, const TreeAutomorphism& g2,
                      const TreeAutomorphism& g3, int level);

// For each sampled Haar partner g of the +1 machine s at the given depth,
// evaluates every nontrivial reduced word of length <= max_length in
// {s, g} and counts the words that act trivially. Results report the
// fraction of relation-free partners and the shortest relation seen.
ExperimentReport adding_machine_partner_relations(int p, int depth, int max_length,
                                                  std::uint64_t samples, RngConfig cfg);

} // namespace treegroup
