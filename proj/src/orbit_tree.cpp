#include "treegroup/orbit_tree.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "treegroup/errors.hpp"

namespace treegroup {

std::vector<std::uint64_t> OrbitTree::nodes_per_level() const {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(depth) + 1, 0);
    for (const auto& node : nodes) counts[static_cast<std::size_t>(node.level)]++;
    return counts;
}

OrbitTree orbit_tree_of_element(const TreeAutomorphism& g) {
    const TreeShape& shape = g.shape();
    const PermGroup& H = *shape.group();
    const int n = shape.depth();

    OrbitTree tree;
    tree.depth = n;
    tree.labeled = true;
    tree.nodes.push_back(OrbitTreeNode{1, 0, -1, {}, {}});

    // Frame: an orbit represented by one vertex, with the element acting on
    // its child edges. If the orbit of v under g has length k, the child
    // edges of v are permuted by the product of the labels of g along the
    // orbit, and a label cycle of length c yields a child orbit of size k*c.
    struct Frame {
        int level;
        std::size_t local;  // representative vertex at this level
        std::uint64_t size; // orbit size
        int node;           // index into tree.nodes
    };
    std::vector<Frame> stack;
    stack.push_back(Frame{0, 0, 1, 0});

    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.level == n) continue;

        // Product of labels along the orbit of the representative.
        int acting = H.identity();
        std::size_t v = fr.local;
        for (std::uint64_t step = 0; step < fr.size; ++step) {
            acting = H.mul(acting, g.label(shape.global_index(fr.level, v)));
            if (step + 1 < fr.size) v = apply_local(g, fr.level, v);
        }

        for (const auto& cyc : H.cycles(acting)) {
            const auto len = static_cast<std::uint64_t>(cyc.size());
            OrbitTreeNode node;
            node.size = fr.size * len;
            node.level = fr.level + 1;
            node.parent = fr.node;
            node.label.assign(cyc.begin(), cyc.end());
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes[static_cast<std::size_t>(fr.node)].children.push_back(id);
            tree.nodes.push_back(std::move(node));
            stack.push_back(Frame{fr.level + 1,
                                  shape.child_local(fr.local, cyc.front()),
                                  fr.size * len, id});
        }
    }
    return tree;
}

namespace {

int uf_find(std::vector<int>& par, int x) {
    while (par[static_cast<std::size_t>(x)] != x) {
        par[static_cast<std::size_t>(x)] =
            par[static_cast<std::size_t>(par[static_cast<std::size_t>(x)])];
        x = par[static_cast<std::size_t>(x)];
    }
    return x;
}

void uf_union(std::vector<int>& par, int a, int b) {
    a = uf_find(par, a);
    b = uf_find(par, b);
    if (a != b) par[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
}

} // namespace

OrbitTree orbit_tree_of_subgroup(const std::vector<TreeAutomorphism>& gens) {
    if (gens.empty()) throw domain_error("orbit_tree_of_subgroup: no generators");
    const TreeShape& shape = gens.front().shape();
    for (const auto& g : gens)
        if (!shape.same(g.shape()))
            throw domain_error("orbit_tree_of_subgroup: mixed tree shapes");
    const int n = shape.depth();

    OrbitTree tree;
    tree.depth = n;
    tree.labeled = false;
    tree.nodes.push_back(OrbitTreeNode{1, 0, -1, {}, {}});

    // node id of each component at the previous level, indexed by vertex
    std::vector<int> prev_node_of(1, 0);

    for (int level = 1; level <= n; ++level) {
        const std::size_t width = shape.level_size(level);
        if (width > (std::size_t{1} << 31))
            throw resource_error("orbit_tree_of_subgroup: level too wide");
        std::vector<int> par(width);
        std::iota(par.begin(), par.end(), 0);
        for (const auto& g : gens) {
            for (std::size_t v = 0; v < width; ++v)
                uf_union(par, static_cast<int>(v),
                         static_cast<int>(apply_local(g, level, v)));
        }
        // union-by-min makes the representative the least vertex of its
        // component, so new nodes appear in order of their least vertex
        std::vector<int> node_of(width, -1);
        std::vector<int> next_prev(width);
        for (std::size_t v = 0; v < width; ++v) {
            const int root = uf_find(par, static_cast<int>(v));
            if (node_of[static_cast<std::size_t>(root)] < 0) {
                const int parent_node = prev_node_of[shape.parent_local(
                    static_cast<std::size_t>(root))];
                OrbitTreeNode node;
                node.size = 0;
                node.level = level;
                node.parent = parent_node;
                const int id = static_cast<int>(tree.nodes.size());
                tree.nodes[static_cast<std::size_t>(parent_node)].children.push_back(id);
                tree.nodes.push_back(std::move(node));
                node_of[static_cast<std::size_t>(root)] = id;
            }
            const int id = node_of[static_cast<std::size_t>(root)];
            tree.nodes[static_cast<std::size_t>(id)].size++;
            next_prev[v] = id;
        }
        prev_node_of = std::move(next_prev);
    }
    return tree;
}

namespace {

// Equivalence of labeled orbit trees allows an independent relabeling of the
// child edges of every node by an element of H. What survives normalization:
//  - symmetric_d: only cycle lengths, in any order; sort (length, code) pairs.
//  - cyclic_p: a one-child node keeps its rotation step (conjugation by a
//    rotation fixes it); a p-child node's children are permuted cyclically,
//    so take the lexicographically least cyclic rotation of their codes.
std::string canon_labeled(const OrbitTree& tree, const PermGroup& H, int id) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    if (H.kind() == PermGroupKind::symmetric_d) {
        std::vector<std::pair<std::uint64_t, std::string>> parts;
        parts.reserve(node.children.size());
        for (int c : node.children) {
            const auto& child = tree.nodes[static_cast<std::size_t>(c)];
            parts.emplace_back(child.label.size(), canon_labeled(tree, H, c));
        }
        std::sort(parts.begin(), parts.end());
        std::string out = "(";
        for (const auto& [len, code] : parts)
            out += std::to_string(len) + ":" + code + ",";
        out += ")";
        return out;
    }
    // cyclic_p
    const int p = H.degree();
    if (node.children.empty()) return "()";
    if (node.children.size() == 1) {
        const auto& child =
            tree.nodes[static_cast<std::size_t>(node.children.front())];
        // label is the full cycle starting at 0; its second entry is the step
        const int step = child.label.size() > 1 ? child.label[1] : 1;
        return "(s" + std::to_string(step) + ":" +
               canon_labeled(tree, H, node.children.front()) + ")";
    }
    if (static_cast<int>(node.children.size()) != p)
        throw domain_error("canonical_form: malformed rotation orbit tree");
    // children are labeled by the fixed points 0..p-1 in order of discovery,
    // which here is increasing; rotate to the least sequence
    std::vector<std::string> codes(static_cast<std::size_t>(p));
    for (int c : node.children) {
        const auto& child = tree.nodes[static_cast<std::size_t>(c)];
        codes[static_cast<std::size_t>(child.label.front())] =
            canon_labeled(tree, H, c);
    }
    std::vector<std::string> best = codes;
    for (int r = 1; r < p; ++r) {
        std::vector<std::string> rot(static_cast<std::size_t>(p));
        for (int i = 0; i < p; ++i)
            rot[static_cast<std::size_t>(i)] =
                codes[static_cast<std::size_t>((i + r) % p)];
        if (rot < best) best = rot;
    }
    std::string out = "(";
    for (const auto& code : best) out += code + ",";
    out += ")";
    return out;
}

std::string canon_unlabeled(const OrbitTree& tree, int id) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    std::vector<std::string> parts;
    parts.reserve(node.children.size());
    for (int c : node.children) {
        const auto& child = tree.nodes[static_cast<std::size_t>(c)];
        // size ratio child/parent distinguishes e.g. one transitive child
        // orbit from a fixed child orbit of the same shape below
        parts.push_back(std::to_string(child.size / node.size) + ":" +
                        canon_unlabeled(tree, c));
    }
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (const auto& part : parts) out += part + ",";
    out += ")";
    return out;
}

} // namespace

std::string canonical_form(const OrbitTree& tree, const PermGroup& H) {
    if (!tree.labeled)
        throw domain_error("canonical_form: tree has no labels; use the unlabeled form");
    if (H.kind() == PermGroupKind::explicit_list)
        throw domain_error(
            "canonical_form: labeled equivalence is only implemented for "
            "rotation and full symmetric label groups");
    return canon_labeled(tree, H, 0);
}

std::string canonical_form_unlabeled(const OrbitTree& tree) {
    return canon_unlabeled(tree, 0);
}

bool are_conjugate(const TreeAutomorphism& g1, const TreeAutomorphism& g2) {
    if (!g1.shape().same(g2.shape()))
        throw domain_error("are_conjugate: elements live on different trees");
    const PermGroup& H = *g1.shape().group();
    if (H.kind() == PermGroupKind::explicit_list)
        throw domain_error(
            "are_conjugate: only rotation and full symmetric label groups "
            "are supported");
    return canonical_form(orbit_tree_of_element(g1), H) ==
           canonical_form(orbit_tree_of_element(g2), H);
}

int solo_count(const OrbitTree& tree) {
    int count = 0;
    for (const auto& node : tree.nodes)
        if (node.children.size() == 1) count++;
    return count;
}

FiniteTree FiniteTree::from_orbit_tree(const OrbitTree& t) {
    FiniteTree out;
    out.depth = t.depth;
    out.children.resize(t.nodes.size());
    out.level.resize(t.nodes.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        out.children[i] = t.nodes[i].children;
        out.level[i] = t.nodes[i].level;
    }
    return out;
}

DensityProfile tree_density_profile(const FiniteTree& tree, int d) {
    if (d < 2) throw domain_error("tree_density_profile: need d >= 2");
    if (tree.children.empty())
        throw domain_error("tree_density_profile: empty tree");
    DensityProfile prof;
    prof.d = d;
    prof.r_tree.assign(static_cast<std::size_t>(tree.depth) + 1, 0);
    prof.r_defect.assign(static_cast<std::size_t>(tree.depth) + 1, 0);
    prof.one_d_tree = true;
    for (std::size_t v = 0; v < tree.children.size(); ++v) {
        const auto deg = static_cast<int>(tree.children[v].size());
        if (deg > d)
            throw domain_error("tree_density_profile: vertex exceeds arity d");
        const auto lv = static_cast<std::size_t>(tree.level[v]);
        prof.r_tree[lv]++;
        if (deg < d) prof.r_defect[lv]++;
        if (deg != 0 && deg != d) prof.one_d_tree = false;
    }
    Rational weight(1);
    for (std::size_t i = 0; i < prof.r_tree.size(); ++i) {
        prof.delta_tree.push_back(Rational(static_cast<long long>(prof.r_tree[i])) * weight);
        prof.delta_defect.push_back(
            Rational(static_cast<long long>(prof.r_defect[i])) * weight);
        weight = weight / Rational(d);
    }
    if (prof.one_d_tree) {
        // partial sums: sum_{i<=m} delta_i(U) = 1 - delta_{m+1}(T)
        prof.identity_holds = true;
        Rational sum(0);
        Rational next_weight = Rational(1) / Rational(d);
        for (std::size_t m = 0; m < prof.r_tree.size(); ++m) {
            sum = sum + prof.delta_defect[m];
            const std::uint64_t r_next =
                m + 1 < prof.r_tree.size() ? prof.r_tree[m + 1] : 0;
            const Rational rhs =
                Rational(1) -
                Rational(static_cast<long long>(r_next)) * next_weight;
            if (!(sum == rhs)) prof.identity_holds = false;
            next_weight = next_weight / Rational(d);
        }
    }
    return prof;
}

namespace {

nlohmann::ordered_json node_to_json(const OrbitTree& tree, int id) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    nlohmann::ordered_json j;
    j["size"] = node.size;
    if (!node.label.empty()) j["label"] = node.label;
    auto children = nlohmann::ordered_json::array();
    for (int c : node.children) children.push_back(node_to_json(tree, c));
    j["children"] = std::move(children);
    return j;
}

void node_from_json(const nlohmann::json& j, OrbitTree& tree, int parent,
                    int level) {
    if (!j.is_object() || !j.contains("size") || !j.contains("children"))
        throw domain_error("orbit_tree_from_json: node needs size and children");
    OrbitTreeNode node;
    node.size = j.at("size").get<std::uint64_t>();
    node.level = level;
    node.parent = parent;
    if (j.contains("label"))
        node.label = j.at("label").get<std::vector<std::uint8_t>>();
    const int id = static_cast<int>(tree.nodes.size());
    if (parent >= 0)
        tree.nodes[static_cast<std::size_t>(parent)].children.push_back(id);
    tree.nodes.push_back(std::move(node));
    tree.depth = std::max(tree.depth, level);
    for (const auto& c : j.at("children"))
        node_from_json(c, tree, id, level + 1);
}

} // namespace

nlohmann::ordered_json orbit_tree_to_json(const OrbitTree& tree) {
    nlohmann::ordered_json j;
    j["depth"] = tree.depth;
    j["labeled"] = tree.labeled;
    j["root"] = node_to_json(tree, 0);
    return j;
}

OrbitTree orbit_tree_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("depth") || !j.contains("root"))
        throw domain_error("orbit_tree_from_json: needs depth and root");
    OrbitTree tree;
    node_from_json(j.at("root"), tree, -1, 0);
    tree.labeled = j.value("labeled", false);
    const int declared = j.at("depth").get<int>();
    if (declared < tree.depth)
        throw domain_error("orbit_tree_from_json: depth shallower than nodes");
    tree.depth = declared;
    return tree;
}

} // namespace treegroup
