#include "treegroup/perm_group.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "treegroup/errors.hpp"

namespace treegroup {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int q = 2; q * q <= n; ++q)
        if (n % q == 0) return false;
    return true;
}

std::shared_ptr<const PermGroup> PermGroup::cyclic(int p) {
    if (!is_prime(p)) throw domain_error("cyclic group degree must be prime, got " + std::to_string(p));
    auto g = std::shared_ptr<PermGroup>(new PermGroup());
    g->kind_ = PermGroupKind::cyclic_p;
    g->degree_ = p;
    g->images_.resize(p);
    for (int k = 0; k < p; ++k) {
        g->images_[k].resize(p);
        for (int x = 0; x < p; ++x) g->images_[k][x] = static_cast<std::uint8_t>((x + k) % p);
    }
    g->build_tables();
    return g;
}

std::shared_ptr<const PermGroup> PermGroup::symmetric(int d) {
    if (d < 1 || d > 5) throw resource_error("symmetric_d supported for 1 <= d <= 5, got " + std::to_string(d));
    std::vector<std::uint8_t> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    auto g = std::shared_ptr<PermGroup>(new PermGroup());
    g->kind_ = PermGroupKind::symmetric_d;
    g->degree_ = d;
    do {
        g->images_.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    g->build_tables();
    return g;
}

std::shared_ptr<const PermGroup> PermGroup::explicit_list(std::vector<std::vector<std::uint8_t>> images) {
    if (images.empty()) throw domain_error("explicit group: empty element list");
    const int d = static_cast<int>(images[0].size());
    if (static_cast<long long>(images.size()) > 4096)
        throw resource_error("explicit group too large: " + std::to_string(images.size()));
    for (const auto& im : images) {
        if (static_cast<int>(im.size()) != d) throw domain_error("explicit group: inconsistent degree");
        std::vector<bool> seen(d, false);
        for (auto x : im) {
            if (x >= d || seen[x]) throw domain_error("explicit group: element is not a permutation");
            seen[x] = true;
        }
    }
    std::sort(images.begin(), images.end());
    if (std::adjacent_find(images.begin(), images.end()) != images.end())
        throw domain_error("explicit group: duplicate elements");
    auto g = std::shared_ptr<PermGroup>(new PermGroup());
    g->kind_ = PermGroupKind::explicit_list;
    g->degree_ = d;
    g->images_ = std::move(images);
    g->build_tables(); // throws if closure/identity/inverse fail
    return g;
}

void PermGroup::build_tables() {
    const int m = size();
    // locate identity
    identity_ = -1;
    for (int i = 0; i < m; ++i) {
        bool id = true;
        for (int x = 0; x < degree_; ++x)
            if (images_[i][x] != x) { id = false; break; }
        if (id) { identity_ = i; break; }
    }
    if (identity_ < 0) throw domain_error("permutation group: identity missing");

    std::map<std::vector<std::uint8_t>, int> index;
    for (int i = 0; i < m; ++i) index[images_[i]] = i;

    mul_.assign(static_cast<std::size_t>(m) * m, -1);
    std::vector<std::uint8_t> prod(degree_);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            for (int x = 0; x < degree_; ++x) prod[x] = images_[b][images_[a][x]];
            auto it = index.find(prod);
            if (it == index.end()) throw domain_error("permutation group: not closed under composition");
            mul_[a * m + b] = it->second;
        }
    }
    inv_.assign(m, -1);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b)
            if (mul_[a * m + b] == identity_) { inv_[a] = b; break; }
        if (inv_[a] < 0) throw domain_error("permutation group: inverse missing");
    }
}

int PermGroup::pow(int a, long long e) const {
    int base = a;
    if (e < 0) { base = inv(a); e = -e; }
    int acc = identity_;
    while (e > 0) {
        if (e & 1) acc = mul(acc, base);
        base = mul(base, base);
        e >>= 1;
    }
    return acc;
}

std::vector<std::vector<std::uint8_t>> PermGroup::cycles(int elem) const {
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<bool> seen(degree_, false);
    for (int x = 0; x < degree_; ++x) {
        if (seen[x]) continue;
        std::vector<std::uint8_t> cyc;
        int y = x;
        do {
            seen[y] = true;
            cyc.push_back(static_cast<std::uint8_t>(y));
            y = images_[elem][y];
        } while (y != x);
        out.push_back(std::move(cyc));
    }
    return out;
}

int PermGroup::fixed_points(int elem) const {
    int c = 0;
    for (int x = 0; x < degree_; ++x)
        if (images_[elem][x] == x) ++c;
    return c;
}

namespace {
int uf_find(std::vector<int>& parent, int x) {
    while (parent[x] != x) { parent[x] = parent[parent[x]]; x = parent[x]; }
    return x;
}
void uf_union(std::vector<int>& parent, int a, int b) {
    parent[uf_find(parent, a)] = uf_find(parent, b);
}
} // namespace

bool PermGroup::is_transitive() const {
    std::vector<int> parent(degree_);
    std::iota(parent.begin(), parent.end(), 0);
    for (int e = 0; e < size(); ++e)
        for (int x = 0; x < degree_; ++x) uf_union(parent, x, images_[e][x]);
    for (int x = 1; x < degree_; ++x)
        if (uf_find(parent, x) != uf_find(parent, 0)) return false;
    return true;
}

int PermGroup::rank_on_pairs() const {
    const int n = degree_ * degree_;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int e = 0; e < size(); ++e)
        for (int x = 0; x < degree_; ++x)
            for (int y = 0; y < degree_; ++y)
                uf_union(parent, x * degree_ + y, images_[e][x] * degree_ + images_[e][y]);
    std::set<int> reps;
    for (int i = 0; i < n; ++i) reps.insert(uf_find(parent, i));
    return static_cast<int>(reps.size());
}

std::vector<int> PermGroup::order_primes() const {
    int m = size();
    std::vector<int> primes;
    for (int q = 2; q <= m; ++q) {
        if (m % q == 0) {
            primes.push_back(q);
            while (m % q == 0) m /= q;
        }
    }
    return primes;
}

std::string PermGroup::kind_name() const {
    switch (kind_) {
        case PermGroupKind::cyclic_p: return "cyclic_p";
        case PermGroupKind::symmetric_d: return "symmetric_d";
        case PermGroupKind::explicit_list: return "explicit";
    }
    return "explicit";
}

std::vector<std::vector<int>> PermGroup::all_subgroups() const {
    if (size() > 512) throw resource_error("subgroup enumeration limited to |H| <= 512");
    // close a set of elements under multiplication
    auto close = [&](std::vector<int> elems) {
        std::set<int> s(elems.begin(), elems.end());
        s.insert(identity_);
        bool grew = true;
        while (grew) {
            grew = false;
            std::vector<int> cur(s.begin(), s.end());
            for (int a : cur)
                for (int b : cur)
                    if (s.insert(mul(a, b)).second) grew = true;
        }
        return std::vector<int>(s.begin(), s.end());
    };
    std::set<std::vector<int>> found;
    found.insert(close({}));
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::vector<int>> cur(found.begin(), found.end());
        for (const auto& sub : cur) {
            for (int e = 0; e < size(); ++e) {
                std::vector<int> gens = sub;
                gens.push_back(e);
                if (found.insert(close(gens)).second) grew = true;
            }
        }
    }
    return std::vector<std::vector<int>>(found.begin(), found.end());
}

bool PermGroup::subgroup_is_transitive(const std::vector<int>& elems) const {
    std::vector<int> parent(degree_);
    std::iota(parent.begin(), parent.end(), 0);
    for (int e : elems)
        for (int x = 0; x < degree_; ++x) uf_union(parent, x, images_[e][x]);
    for (int x = 1; x < degree_; ++x)
        if (uf_find(parent, x) != uf_find(parent, 0)) return false;
    return true;
}

} // namespace treegroup
