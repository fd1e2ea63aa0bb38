#include "treegroup/tree_automorphism.hpp"

#include <algorithm>

#include "treegroup/errors.hpp"

namespace treegroup {

TreeShape::TreeShape(PermGroupPtr group, int depth) : group_(std::move(group)), depth_(depth) {
    if (!group_) throw domain_error("TreeShape: null group");
    if (depth < 0) throw domain_error("TreeShape: negative depth");
    d_ = group_->degree();
    offsets_.resize(depth_ + 1);
    sizes_.resize(depth_ + 1);
    std::size_t count = 1, total = 0;
    for (int l = 0; l <= depth_; ++l) {
        offsets_[l] = total;
        sizes_[l] = count;
        if (l < depth_) {
            if (count > (SIZE_MAX - total) / 2 || count > (SIZE_MAX / 2) / d_)
                throw resource_error("TreeShape: tree too large");
            total += count;
            count *= d_;
        }
    }
}

std::vector<std::uint8_t> TreeShape::digits(int level, std::size_t local) const {
    std::vector<std::uint8_t> v(level);
    for (int i = level - 1; i >= 0; --i) {
        v[i] = static_cast<std::uint8_t>(local % d_);
        local /= d_;
    }
    return v;
}

std::size_t TreeShape::local_from_digits(const std::vector<std::uint8_t>& v) const {
    std::size_t local = 0;
    for (auto x : v) {
        if (x >= d_) throw domain_error("vertex digit out of range");
        local = local * d_ + x;
    }
    return local;
}

std::uint64_t TreeShape::ray_counter(int level, std::size_t local) const {
    // Digits peeled low-to-high off the big-endian local index are the *last*
    // digits of the string, which carry the *highest* little-endian weight.
    std::uint64_t value = 0;
    std::uint64_t weight = 1;
    for (int i = 0; i < level; ++i) weight *= d_; // d^level
    for (int i = 0; i < level; ++i) {
        weight /= d_;
        value += static_cast<std::uint64_t>(local % d_) * weight;
        local /= d_;
    }
    return value;
}

std::size_t TreeShape::local_from_ray_counter(int level, std::uint64_t value) const {
    // inverse of ray_counter: digit x_i = (value / d^(i-1)) mod d, big-endian
    // packing x_1 ... x_level.
    std::size_t local = 0;
    std::uint64_t rest = value;
    for (int i = 0; i < level; ++i) {
        local = local * d_ + static_cast<std::size_t>(rest % d_);
        rest /= d_;
    }
    if (rest != 0) throw domain_error("ray counter out of range for level");
    return local;
}

bool TreeShape::same(const TreeShape& o) const {
    if (depth_ != o.depth_ || d_ != o.d_) return false;
    if (group_ == o.group_) return true;
    if (!group_ || !o.group_) return false;
    if (group_->kind() != o.group_->kind() || group_->size() != o.group_->size()) return false;
    if (group_->kind() != PermGroupKind::explicit_list) return true; // canonical construction
    for (int e = 0; e < group_->size(); ++e)
        if (group_->images(e) != o.group_->images(e)) return false;
    return true;
}

std::string Vertex::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(path[i]);
    }
    return s + ")";
}

TreeAutomorphism::TreeAutomorphism(TreeShape shape)
    : shape_(std::move(shape)), first_active_(shape_.depth()) {
    labels_.assign(shape_.label_count(), static_cast<std::uint8_t>(shape_.group()->identity()));
}

TreeAutomorphism::TreeAutomorphism(TreeShape shape, std::vector<std::uint8_t> labels)
    : shape_(std::move(shape)), labels_(std::move(labels)) {
    if (labels_.size() != shape_.label_count())
        throw domain_error("portrait label array has wrong length");
    const int m = shape_.group()->size();
    for (auto h : labels_)
        if (h >= m) throw domain_error("portrait label out of range");
    refresh_first_active();
}

std::uint8_t TreeAutomorphism::label_at(const Vertex& v) const {
    if (v.level() >= depth()) throw domain_error("label_at: vertex at or below leaf level");
    return labels_[shape_.global_index(v.level(), shape_.local_from_digits(v.path))];
}

void TreeAutomorphism::set_label(std::size_t global, std::uint8_t h) {
    if (h >= shape_.group()->size()) throw domain_error("set_label: label out of range");
    labels_[global] = h;
    refresh_first_active();
}

void TreeAutomorphism::set_label_at(const Vertex& v, std::uint8_t h) {
    if (v.level() >= depth()) throw domain_error("set_label_at: vertex at or below leaf level");
    set_label(shape_.global_index(v.level(), shape_.local_from_digits(v.path)), h);
}

void TreeAutomorphism::refresh_first_active() {
    const auto id = static_cast<std::uint8_t>(shape_.group()->identity());
    for (int l = 0; l < depth(); ++l) {
        const std::size_t off = shape_.level_offset(l), sz = shape_.level_size(l);
        for (std::size_t j = 0; j < sz; ++j)
            if (labels_[off + j] != id) { first_active_ = l; return; }
    }
    first_active_ = depth();
}

Vertex apply(const TreeAutomorphism& g, const Vertex& v) {
    if (v.level() > g.depth()) throw domain_error("apply: vertex deeper than tree");
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    Vertex out;
    out.path.reserve(v.path.size());
    std::size_t prefix = 0; // local index of the original prefix
    for (int i = 0; i < v.level(); ++i) {
        const std::uint8_t h = g.label(sh.global_index(i, prefix));
        out.path.push_back(static_cast<std::uint8_t>(H.image(h, v.path[i])));
        prefix = sh.child_local(prefix, v.path[i]);
    }
    return out;
}

std::size_t apply_local(const TreeAutomorphism& g, int level, std::size_t local) {
    if (level > g.depth()) throw domain_error("apply_local: level deeper than tree");
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    const int d = sh.degree();
    // digit walk (hot paths that need a whole level use level_action instead)
    auto digs = sh.digits(level, local);
    std::size_t pre = 0, img = 0;
    for (int i = 0; i < level; ++i) {
        const std::uint8_t h = g.label(sh.global_index(i, pre));
        img = img * d + H.image(h, digs[i]);
        pre = sh.child_local(pre, digs[i]);
    }
    return img;
}

std::vector<std::uint32_t> level_action(const TreeAutomorphism& g, int level) {
    if (level > g.depth()) throw domain_error("level_action: level deeper than tree");
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    const int d = sh.degree();
    std::vector<std::uint32_t> img{0}; // level 0
    for (int l = 0; l < level; ++l) {
        const std::size_t off = sh.level_offset(l), sz = sh.level_size(l);
        std::vector<std::uint32_t> next(sz * d);
        for (std::size_t j = 0; j < sz; ++j) {
            const std::uint8_t h = g.label(off + j);
            const std::size_t base = static_cast<std::size_t>(img[j]) * d;
            for (int x = 0; x < d; ++x)
                next[j * d + x] = static_cast<std::uint32_t>(base + H.image(h, x));
        }
        img = std::move(next);
    }
    return img;
}

TreeAutomorphism compose(const TreeAutomorphism& g, const TreeAutomorphism& h) {
    const TreeShape& sh = g.shape();
    if (!sh.same(h.shape())) throw domain_error("compose: mismatched tree shapes");
    const PermGroup& H = *sh.group();
    const int d = sh.degree();
    const int n = sh.depth();
    const auto id = static_cast<std::uint8_t>(H.identity());

    TreeAutomorphism out(sh);
    const int start = std::min(g.first_active_, h.first_active_);
    if (start >= n) return out;

    // (g*h)(v) = g(v) * h(v^g); chase images of g level by level starting at
    // the first level where either factor acts.
    std::vector<std::uint32_t> img(sh.level_size(start));
    for (std::size_t j = 0; j < img.size(); ++j) img[j] = static_cast<std::uint32_t>(j);
    int first = n;
    for (int l = start; l < n; ++l) {
        const std::size_t off = sh.level_offset(l), sz = sh.level_size(l);
        const bool last = (l + 1 == n);
        std::vector<std::uint32_t> next;
        if (!last) next.resize(sz * d);
        for (std::size_t j = 0; j < sz; ++j) {
            const std::uint8_t a = g.labels_[off + j];
            const std::uint8_t b = h.labels_[off + img[j]];
            const std::uint8_t c = static_cast<std::uint8_t>(H.mul(a, b));
            out.labels_[off + j] = c;
            if (c != id && l < first) first = l;
            if (!last) {
                const std::size_t base = static_cast<std::size_t>(img[j]) * d;
                for (int x = 0; x < d; ++x)
                    next[j * d + x] = static_cast<std::uint32_t>(base + H.image(a, x));
            }
        }
        img = std::move(next);
    }
    out.first_active_ = first;
    return out;
}

TreeAutomorphism inverse(const TreeAutomorphism& g) {
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    const int d = sh.degree();
    const int n = sh.depth();

    TreeAutomorphism out(sh);
    const int start = g.first_active_;
    if (start >= n) return out;

    // (g^-1)(v^g) = (g(v))^-1: write the inverted label at the image vertex.
    std::vector<std::uint32_t> img(sh.level_size(start));
    for (std::size_t j = 0; j < img.size(); ++j) img[j] = static_cast<std::uint32_t>(j);
    for (int l = start; l < n; ++l) {
        const std::size_t off = sh.level_offset(l), sz = sh.level_size(l);
        const bool last = (l + 1 == n);
        std::vector<std::uint32_t> next;
        if (!last) next.resize(sz * d);
        for (std::size_t j = 0; j < sz; ++j) {
            const std::uint8_t a = g.labels_[off + j];
            out.labels_[off + img[j]] = static_cast<std::uint8_t>(H.inv(a));
            if (!last) {
                const std::size_t base = static_cast<std::size_t>(img[j]) * d;
                for (int x = 0; x < d; ++x)
                    next[j * d + x] = static_cast<std::uint32_t>(base + H.image(a, x));
            }
        }
        img = std::move(next);
    }
    out.first_active_ = start;
    return out;
}

TreeAutomorphism power(const TreeAutomorphism& g, long long e) {
    TreeAutomorphism base = e < 0 ? inverse(g) : g;
    unsigned long long k = e < 0 ? static_cast<unsigned long long>(-(e + 1)) + 1ULL
                                 : static_cast<unsigned long long>(e);
    TreeAutomorphism acc(g.shape());
    while (k > 0) {
        if (k & 1ULL) acc = compose(acc, base);
        k >>= 1;
        if (k) base = compose(base, base);
    }
    return acc;
}

TreeAutomorphism conjugate(const TreeAutomorphism& g, const TreeAutomorphism& x) {
    return compose(compose(inverse(x), g), x);
}

TreeAutomorphism commutator(const TreeAutomorphism& a, const TreeAutomorphism& b) {
    return compose(compose(inverse(a), inverse(b)), compose(a, b));
}

TreeAutomorphism truncate(const TreeAutomorphism& g, int depth) {
    if (depth > g.depth()) throw domain_error("truncate: target depth exceeds element depth");
    TreeShape sh(g.shape().group(), depth);
    std::vector<std::uint8_t> labels(g.labels().begin(), g.labels().begin() + sh.label_count());
    return TreeAutomorphism(std::move(sh), std::move(labels));
}

TreeAutomorphism embed(const TreeAutomorphism& g, int depth) {
    if (depth < g.depth()) throw domain_error("embed: target depth below element depth");
    TreeShape sh(g.shape().group(), depth);
    std::vector<std::uint8_t> labels(sh.label_count(),
                                     static_cast<std::uint8_t>(sh.group()->identity()));
    std::copy(g.labels().begin(), g.labels().end(), labels.begin());
    return TreeAutomorphism(std::move(sh), std::move(labels));
}

namespace {

// Exponent of prime q in n.
int prime_exponent(long long n, int q) {
    int e = 0;
    while (n % q == 0) { n /= q; ++e; }
    return e;
}

} // namespace

std::map<int, int> element_order_exponents(const TreeAutomorphism& g) {
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    const int n = sh.depth();
    const auto primes = H.order_primes();
    std::map<int, int> best;
    for (int q : primes) best[q] = 0;
    if (n == 0 || primes.empty()) return best;

    // Walk the orbits of <g> on each level without materializing a tree.
    // A frame is a level-l vertex v together with the orbit length k of v
    // under <g>; the element acting below v is g^k, whose label at v is the
    // product of g's labels along the orbit of v.
    struct Frame {
        int level;
        std::size_t local;      // orbit representative
        long long orbit_len;    // k
        std::map<int, int> path; // per-prime exponent sums along the path
    };
    std::vector<Frame> stack;
    std::map<int, int> zero;
    for (int q : primes) zero[q] = 0;
    stack.push_back({0, 0, 1, zero});

    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (f.level == n) {
            for (auto& [q, e] : f.path)
                if (e > best[q]) best[q] = e;
            continue;
        }
        // label of g^k at v: product of labels along the <g>-orbit of v
        int acting = H.identity();
        std::size_t u = f.local;
        for (long long i = 0; i < f.orbit_len; ++i) {
            acting = H.mul(acting, g.label(sh.global_index(f.level, u)));
            if (i + 1 < f.orbit_len) u = apply_local(g, f.level, u);
        }
        for (const auto& cyc : H.cycles(acting)) {
            Frame c;
            c.level = f.level + 1;
            c.local = sh.child_local(f.local, cyc[0]);
            c.orbit_len = f.orbit_len * static_cast<long long>(cyc.size());
            c.path = f.path;
            for (int q : primes) c.path[q] += prime_exponent(static_cast<long long>(cyc.size()), q);
            stack.push_back(std::move(c));
        }
    }
    return best;
}

int element_order_exponent(const TreeAutomorphism& g) {
    const PermGroup& H = *g.shape().group();
    if (H.kind() != PermGroupKind::cyclic_p)
        throw domain_error("element_order_exponent: single-prime form requires H = C_p");
    auto m = element_order_exponents(g);
    return m.empty() ? 0 : m.begin()->second;
}

nlohmann::ordered_json portrait_to_json(const TreeAutomorphism& g) {
    nlohmann::ordered_json j;
    j["d"] = g.degree();
    j["p_kind"] = g.shape().group()->kind_name();
    j["depth"] = g.depth();
    j["labels"] = g.labels();
    if (g.shape().group()->kind() == PermGroupKind::explicit_list) {
        nlohmann::ordered_json elems = nlohmann::ordered_json::array();
        for (int e = 0; e < g.shape().group()->size(); ++e)
            elems.push_back(g.shape().group()->images(e));
        j["elements"] = std::move(elems);
    }
    return j;
}

namespace {

PermGroupPtr group_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("p_kind").get<std::string>();
    const int d = j.at("d").get<int>();
    if (kind == "cyclic_p") return PermGroup::cyclic(d);
    if (kind == "symmetric_d") return PermGroup::symmetric(d);
    if (kind == "explicit") {
        std::vector<std::vector<std::uint8_t>> images;
        for (const auto& im : j.at("elements")) images.push_back(im.get<std::vector<std::uint8_t>>());
        auto g = PermGroup::explicit_list(std::move(images));
        if (g->degree() != d) throw domain_error("portrait: degree does not match element table");
        return g;
    }
    throw domain_error("portrait: unknown p_kind '" + kind + "'");
}

} // namespace

TreeAutomorphism portrait_from_json(const nlohmann::json& j) {
    auto H = group_from_json(j);
    TreeShape sh(H, j.at("depth").get<int>());
    auto labels = j.at("labels").get<std::vector<std::uint8_t>>();
    return TreeAutomorphism(std::move(sh), std::move(labels));
}

std::vector<TreeAutomorphism> generators_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_array() ? j : j.at("generators");
    if (!arr.is_array() || arr.empty()) throw domain_error("generators: expected non-empty array");
    std::vector<TreeAutomorphism> gens;
    for (const auto& pj : arr) gens.push_back(portrait_from_json(pj));
    for (std::size_t i = 1; i < gens.size(); ++i)
        if (!gens[0].shape().same(gens[i].shape()))
            throw domain_error("generators: mismatched shapes in list");
    return gens;
}

nlohmann::ordered_json generators_to_json(const std::vector<TreeAutomorphism>& gens) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& g : gens) arr.push_back(portrait_to_json(g));
    nlohmann::ordered_json j;
    j["generators"] = std::move(arr);
    return j;
}

} // namespace treegroup
