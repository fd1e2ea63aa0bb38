#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "treegroup/perm_group.hpp"

#include "json.hpp"

namespace treegroup {

// Shape of the depth-n rooted d-ary tree together with the group H acting on
// the d children of each internal vertex. Internal vertices live on levels
// 0..depth-1 and are addressed by a dense level-order index:
//   level_offset(l) = 1 + d + ... + d^(l-1)     (index of first level-l vertex)
//   global(l, j)    = level_offset(l) + j
// where j is the big-endian local index of the digit string (x1..xl):
//   j = x1*d^(l-1) + x2*d^(l-2) + ... + xl.
// Children are then contiguous: child (l+1, j*d + x) of (l, j). The ray
// counter N(v) used by the adding machine is little-endian by contrast:
//   N(x1..xl) = x1 + x2*d + ... + xl*d^(l-1).
class TreeShape {
public:
    TreeShape() = default;
    TreeShape(PermGroupPtr group, int depth);

    const PermGroupPtr& group() const { return group_; }
    int degree() const { return d_; }
    int depth() const { return depth_; }

    // Number of internal (labeled) vertices: level_offset(depth).
    std::size_t label_count() const { return offsets_[depth_]; }
    std::size_t level_offset(int level) const { return offsets_[level]; }
    std::size_t level_size(int level) const { return sizes_[level]; }
    std::size_t leaf_count() const { return sizes_[depth_]; }

    std::size_t global_index(int level, std::size_t local) const { return offsets_[level] + local; }
    std::size_t child_local(std::size_t local, int digit) const { return local * d_ + digit; }
    std::size_t parent_local(std::size_t local) const { return local / d_; }
    int last_digit(std::size_t local) const { return static_cast<int>(local % d_); }

    std::vector<std::uint8_t> digits(int level, std::size_t local) const;
    std::size_t local_from_digits(const std::vector<std::uint8_t>& v) const;
    // Little-endian ray counter N(v) of the digit string addressed by local.
    std::uint64_t ray_counter(int level, std::size_t local) const;
    std::size_t local_from_ray_counter(int level, std::uint64_t value) const;

    bool same(const TreeShape& o) const;

private:
    PermGroupPtr group_;
    int d_ = 0;
    int depth_ = 0;
    std::vector<std::size_t> offsets_; // size depth+1
    std::vector<std::size_t> sizes_;   // size depth+1, sizes_[l] = d^l
};

// A vertex of the tree as an explicit digit string (empty = root).
struct Vertex {
    std::vector<std::uint8_t> path;

    int level() const { return static_cast<int>(path.size()); }
    static Vertex root() { return Vertex{}; }
    Vertex child(int digit) const {
        Vertex v = *this;
        v.path.push_back(static_cast<std::uint8_t>(digit));
        return v;
    }
    bool operator==(const Vertex& o) const { return path == o.path; }
    std::string str() const;
};

// Automorphism of the depth-n tree: one H-label per internal vertex, stored
// level-order (the portrait). Composition is left-to-right:
//   (g*h)(v) = g(v) * h(v^g),    v^(g*h) = (v^g)^h.
class TreeAutomorphism {
public:
    TreeAutomorphism() = default;
    explicit TreeAutomorphism(TreeShape shape); // identity
    TreeAutomorphism(TreeShape shape, std::vector<std::uint8_t> labels);

    const TreeShape& shape() const { return shape_; }
    int depth() const { return shape_.depth(); }
    int degree() const { return shape_.degree(); }
    const std::vector<std::uint8_t>& labels() const { return labels_; }
    std::uint8_t label(std::size_t global) const { return labels_[global]; }
    std::uint8_t label_at(const Vertex& v) const;
    void set_label(std::size_t global, std::uint8_t h);
    void set_label_at(const Vertex& v, std::uint8_t h);

    bool is_identity() const { return first_active_ >= depth(); }
    // Lowest level carrying a non-identity label (depth() for the identity).
    int first_active_level() const { return first_active_; }
    void refresh_first_active();

    bool operator==(const TreeAutomorphism& o) const { return labels_ == o.labels_; }
    bool operator!=(const TreeAutomorphism& o) const { return labels_ != o.labels_; }

    std::string portrait_key() const { return std::string(labels_.begin(), labels_.end()); }

private:
    friend TreeAutomorphism compose(const TreeAutomorphism&, const TreeAutomorphism&);
    friend TreeAutomorphism inverse(const TreeAutomorphism&);

    TreeShape shape_;
    std::vector<std::uint8_t> labels_;
    int first_active_ = 0;
};

// Image of a vertex, both as digit string and in (level, local) addressing.
Vertex apply(const TreeAutomorphism& g, const Vertex& v);
std::size_t apply_local(const TreeAutomorphism& g, int level, std::size_t local);
// Permutation induced on all of level `level`, as an image table.
std::vector<std::uint32_t> level_action(const TreeAutomorphism& g, int level);

TreeAutomorphism compose(const TreeAutomorphism& g, const TreeAutomorphism& h);
TreeAutomorphism inverse(const TreeAutomorphism& g);
TreeAutomorphism power(const TreeAutomorphism& g, long long e);
TreeAutomorphism conjugate(const TreeAutomorphism& g, const TreeAutomorphism& x); // x^-1 g x
TreeAutomorphism commutator(const TreeAutomorphism& a, const TreeAutomorphism& b); // a^-1 b^-1 a b
TreeAutomorphism truncate(const TreeAutomorphism& g, int depth);
// Lift a depth-m automorphism to depth n >= m: same labels on levels < m,
// identity labels below. Truncating the result recovers g.
TreeAutomorphism embed(const TreeAutomorphism& g, int depth);

// Exponent of each prime in |g|: |g| = prod over primes q of q^e[q].
// Never materializes the order itself (it reaches 2^1023 at p=2, depth 10).
std::map<int, int> element_order_exponents(const TreeAutomorphism& g);
// Convenience for H = C_p: the single exponent K with |g| = p^K.
int element_order_exponent(const TreeAutomorphism& g);

nlohmann::ordered_json portrait_to_json(const TreeAutomorphism& g);
TreeAutomorphism portrait_from_json(const nlohmann::json& j);
// Parse a list of portraits sharing one shape (the "generators" file format).
std::vector<TreeAutomorphism> generators_from_json(const nlohmann::json& j);
nlohmann::ordered_json generators_to_json(const std::vector<TreeAutomorphism>& gens);

} // namespace treegroup
