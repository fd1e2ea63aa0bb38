#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace treegroup {

enum class PermGroupKind { cyclic_p, symmetric_d, explicit_list };

// A finite permutation group H acting on X = {0, ..., d-1}, given by the
// full element list. Elements are referred to by their index into that list
// everywhere else in the toolkit (tree labels are such indices), so the
// element order is part of the contract:
//   cyclic_p:     element k is the rotation x -> x+k (mod p), k = 0..p-1
//   symmetric_d:  all d! permutations in lexicographic order of image tuples
//   explicit:     caller-provided list, validated to be a group
// Multiplication convention is left-to-right action: (a*b)(x) = b(a(x)),
// matching the composition order of tree automorphisms.
class PermGroup {
public:
    static std::shared_ptr<const PermGroup> cyclic(int p);
    static std::shared_ptr<const PermGroup> symmetric(int d);
    static std::shared_ptr<const PermGroup> explicit_list(std::vector<std::vector<std::uint8_t>> images);

    PermGroupKind kind() const { return kind_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(images_.size()); }
    int identity() const { return identity_; }

    int image(int elem, int point) const { return images_[elem][point]; }
    const std::vector<std::uint8_t>& images(int elem) const { return images_[elem]; }

    int mul(int a, int b) const { return mul_[a * size() + b]; }
    int inv(int a) const { return inv_[a]; }
    int pow(int a, long long e) const;

    // Cycle decomposition of one element; each cycle starts at its smallest
    // point and follows the element's action.
    std::vector<std::vector<std::uint8_t>> cycles(int elem) const;
    int fixed_points(int elem) const;

    bool is_transitive() const;
    // Number of orbits of H acting diagonally on X x X.
    int rank_on_pairs() const;
    // Distinct primes dividing |H|.
    std::vector<int> order_primes() const;

    std::string kind_name() const;

    // All subgroups, each as a sorted list of element indices. Intended for
    // small H (generation probabilities); guarded by a size budget.
    std::vector<std::vector<int>> all_subgroups() const;
    bool subgroup_is_transitive(const std::vector<int>& elems) const;

private:
    PermGroup() = default;
    void build_tables();

    PermGroupKind kind_ = PermGroupKind::explicit_list;
    int degree_ = 0;
    int identity_ = 0;
    std::vector<std::vector<std::uint8_t>> images_;
    std::vector<std::int32_t> mul_;
    std::vector<std::int32_t> inv_;
};

using PermGroupPtr = std::shared_ptr<const PermGroup>;

bool is_prime(int n);

} // namespace treegroup
