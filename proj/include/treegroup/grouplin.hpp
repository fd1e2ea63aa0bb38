#pragma once

// Exact subgroup computations in the cyclic-prime tree groups: layered
// stabilizer chains along the level filtration, kernel exponents and
// density sequences, boundary slices as polynomials over F_p, derived
// subgroups, and the solvable/Abelian inequality checks.
//
// Chain design: per level, an insertion echelon of basis elements whose
// leading label row has a fresh pivot. Closure pushes, for every new
// basis element w: its p-th power, its commutator with every defining
// generator (making each tail subgroup normal in the whole group), and
// its commutators with same-level basis elements (letting ordered
// products reorder); the deepest level is elementary Abelian and needs
// no pair closure. Orders are tracked as p-exponents only.

#include <cstdint>
#include <utility>
#include <vector>

#include "treegroup/experiment.hpp"
#include "treegroup/rational.hpp"
#include "treegroup/rng.hpp"
#include "treegroup/tree_automorphism.hpp"

namespace treegroup {

struct StabilizerChain {
    struct Entry {
        int level = 0;
        std::size_t pivot = 0;
        TreeAutomorphism witness;
        // witness^-1, witness^-2, ..., witness^-(p-1) for sifting
        std::vector<TreeAutomorphism> inverse_powers;
    };

    TreeShape shape;
    int prime = 2;
    std::vector<std::vector<Entry>> layers; // indexed by level 0..depth-1

    int depth() const { return shape.depth(); }
    // e_l: log_p of the order of the sub-chain fixing level l
    int kernel_exponent(int level) const;
    int order_exponent() const { return kernel_exponent(0); }
    bool contains(const TreeAutomorphism& g) const;
    std::vector<TreeAutomorphism> strong_generators() const;
};

// chain for <gens>; extra_conjugators extends the closure so the result
// is the normal closure of <gens> under them as well
StabilizerChain build_chain(const std::vector<TreeAutomorphism>& gens);
StabilizerChain build_chain(const std::vector<TreeAutomorphism>& gens,
                            const std::vector<TreeAutomorphism>& extra_conjugators);

struct DensitySequence {
    int prime = 2;
    // log_p of the order of the image at depth l, index 0..n
    std::vector<int> image_exponents;
    std::vector<Rational> exact; // gamma_1..gamma_n
    std::vector<double> values;
};

// gens are truncated or extended by identity levels to depth n
DensitySequence density_sequence(const std::vector<TreeAutomorphism>& gens, int n);

// dimension over F_p of the pointwise level-(n-1) stabilizer's label
// space (= e_{n-1} of the chain at depth n)
int boundary_slice_dim(const std::vector<TreeAutomorphism>& gens, int n);

// element of F_p[x] / (x^{p^{n-1}} - 1); coefficient i belongs to the
// level-(n-1) vertex whose ray counter is i
struct SlicePolynomial {
    int prime = 2;
    std::vector<std::uint8_t> coeffs;

    bool is_zero() const;
};

// largest k with (x-1)^k dividing f; coeffs.size() stands for infinity
// (the zero polynomial)
std::size_t weight(const SlicePolynomial& f);
SlicePolynomial multiply_by_y(const SlicePolynomial& f); // f * (x-1)
SlicePolynomial add(const SlicePolynomial& f, const SlicePolynomial& g);

// last-level label rows of a chain, as polynomials
std::vector<SlicePolynomial> slice_basis(const StabilizerChain& chain);

// the adding machine s and the companion g agreeing with s on the top k
// levels, with a single nontrivial label at the ray-counter-0 vertex of
// the last level; dim of the slice of <s, g^{p^k}> is p^{n-1} - p^k + 1
std::pair<TreeAutomorphism, TreeAutomorphism> polihamu_pair(int n, int k, int p = 2);

// chain of the derived subgroup at depth n: normal closure of the
// pairwise generator commutators under the generators
StabilizerChain derived_subgroup_chain(const std::vector<TreeAutomorphism>& gens, int n);

// log_p of the index of the derived subgroup
double commutator_density(const std::vector<TreeAutomorphism>& gens);

struct SolvableReport {
    int derived_length = 0;
    Rational partial_sum{0};
    double partial_sum_value = 0.0;
    double bound = 0.0; // C * derived_length, C = (p^2+p)/(p-1)
    bool holds = false;
};

// derived series via iterated chains (cap 20), density partial sum at
// depth n against the solvable bound
SolvableReport solvable_sum_check(const std::vector<TreeAutomorphism>& gens, int n);

struct AbelianReport {
    int log_order = 0;       // log_p |A|
    std::uint64_t solo_nodes = 0; // one-child nodes of the orbit tree of A
    std::int64_t gap = 0;    // solo_nodes - log_order, nonnegative
    bool holds = false;
    bool equality = false;
};

// verifies log_p|A| <= number of one-child nodes of the orbit tree
AbelianReport abelian_bound_check(const std::vector<TreeAutomorphism>& gens, int n);

// samples j uniform elements at depth n and reports the distribution of
// the density gamma_n of the generated subgroup
ExperimentReport random_generation_dimension_experiment(int j, int p, int n,
                                                        std::uint64_t samples,
                                                        RngConfig cfg);

} // namespace treegroup
