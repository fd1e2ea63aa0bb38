#include "treegroup/words.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "treegroup/errors.hpp"
#include "treegroup/stochastic.hpp"
#include "treegroup/zoo.hpp"

namespace treegroup {

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

int positive_mod(long long x, int m) {
    return static_cast<int>(((x % m) + m) % m);
}

void require_same_shape(const std::vector<TreeAutomorphism>& gens, const char* who) {
    if (gens.empty()) throw domain_error(std::string(who) + ": no generators");
    for (std::size_t i = 1; i < gens.size(); ++i)
        if (!gens[0].shape().same(gens[i].shape()))
            throw domain_error(std::string(who) + ": mismatched shapes");
}

// Rank of a matrix with entries mod p (rows of equal length).
int matrix_rank_mod_p(std::vector<std::vector<int>> rows, int p) {
    int rank = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t col = 0; col < cols; ++col) {
        std::size_t pivot = rows.size();
        for (std::size_t r = static_cast<std::size_t>(rank); r < rows.size(); ++r)
            if (rows[r][col] % p != 0) {
                pivot = r;
                break;
            }
        if (pivot == rows.size()) continue;
        std::swap(rows[static_cast<std::size_t>(rank)], rows[pivot]);
        auto& lead = rows[static_cast<std::size_t>(rank)];
        int inv = 0;
        for (int t = 1; t < p; ++t)
            if (lead[col] * t % p == 1) {
                inv = t;
                break;
            }
        for (auto& x : lead) x = x * inv % p;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == static_cast<std::size_t>(rank)) continue;
            const int f = rows[r][col] % p;
            if (f == 0) continue;
            for (std::size_t c2 = col; c2 < cols; ++c2)
                rows[r][c2] = positive_mod(rows[r][c2] - static_cast<long long>(f) * rows[static_cast<std::size_t>(rank)][c2], p);
        }
        ++rank;
    }
    return rank;
}

} // namespace

FreeWord::FreeWord(std::vector<int> letters) {
    for (int l : letters)
        if (l == 0) throw domain_error("free word: zero is not a letter");
    letters_ = reduce_word(letters);
}

FreeWord FreeWord::parse(const std::string& text) {
    std::vector<int> letters;
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
        if (ch >= 'a' && ch <= 'z') letters.push_back(ch - 'a' + 1);
        else if (ch >= 'A' && ch <= 'Z') letters.push_back(-(ch - 'A' + 1));
        else throw domain_error(std::string("free word: unexpected character '") + ch + "'");
    }
    return FreeWord(std::move(letters));
}

FreeWord FreeWord::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw domain_error("free word: expected an array of signed indices");
    return FreeWord(j.get<std::vector<int>>());
}

nlohmann::ordered_json FreeWord::to_json() const {
    return nlohmann::ordered_json(letters_);
}

std::string FreeWord::str() const {
    std::string out;
    for (int l : letters_) {
        const int idx = l > 0 ? l : -l;
        if (idx > 26) {
            out = {};
            for (int m : letters_) {
                if (!out.empty()) out += ' ';
                out += std::to_string(m);
            }
            return out;
        }
        if (!out.empty()) out += ' ';
        out += static_cast<char>((l > 0 ? 'a' : 'A') + idx - 1);
    }
    return out;
}

int FreeWord::max_index() const {
    int m = 0;
    for (int l : letters_) m = std::max(m, l > 0 ? l : -l);
    return m;
}

FreeWord FreeWord::inverse() const {
    std::vector<int> rev(letters_.rbegin(), letters_.rend());
    for (int& l : rev) l = -l;
    FreeWord w;
    w.letters_ = std::move(rev); // the reverse of a reduced word is reduced
    return w;
}

FreeWord concat(const FreeWord& a, const FreeWord& b) {
    std::vector<int> joined = a.letters();
    joined.insert(joined.end(), b.letters().begin(), b.letters().end());
    return FreeWord(std::move(joined));
}

TreeAutomorphism evaluate(const FreeWord& w, const std::vector<TreeAutomorphism>& gens) {
    require_same_shape(gens, "evaluate");
    if (w.max_index() > static_cast<int>(gens.size()))
        throw domain_error("evaluate: generator index out of range");
    std::unordered_map<int, TreeAutomorphism> inverses;
    TreeAutomorphism acc(gens[0].shape());
    for (int l : w.letters()) {
        if (l > 0) {
            acc = compose(acc, gens[static_cast<std::size_t>(l) - 1]);
        } else {
            auto it = inverses.find(-l);
            if (it == inverses.end())
                it = inverses.emplace(-l, inverse(gens[static_cast<std::size_t>(-l) - 1])).first;
            acc = compose(acc, it->second);
        }
    }
    return acc;
}

std::vector<int> exponent_sum_vector(const FreeWord& w, int k, int modulus) {
    if (k < 0) throw domain_error("exponent sums: negative letter count");
    if (modulus < 1) throw domain_error("exponent sums: modulus must be positive");
    if (w.max_index() > k) throw domain_error("exponent sums: word uses a letter beyond k");
    std::vector<long long> totals(static_cast<std::size_t>(k), 0);
    for (int l : w.letters()) {
        if (l > 0) ++totals[static_cast<std::size_t>(l) - 1];
        else --totals[static_cast<std::size_t>(-l) - 1];
    }
    std::vector<int> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = positive_mod(totals[i], modulus);
    return out;
}

std::vector<TreeAutomorphism> enumerate_group(const TreeShape& shape, std::uint64_t budget) {
    const std::uint64_t h = static_cast<std::uint64_t>(shape.group()->size());
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < shape.label_count(); ++i) {
        if (count > budget / h)
            throw resource_error("group enumeration: order exceeds the budget");
        count *= h;
    }
    std::vector<TreeAutomorphism> out;
    out.reserve(static_cast<std::size_t>(count));
    std::vector<std::uint8_t> labels(shape.label_count(), 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        out.emplace_back(shape, labels);
        for (std::size_t pos = 0; pos < labels.size(); ++pos) {
            if (++labels[pos] < h) break;
            labels[pos] = 0;
        }
    }
    return out;
}

EvenCoverReport even_cover_check(const std::vector<FreeWord>& words,
                                 const std::vector<TreeAutomorphism>& group_elements,
                                 int free_letters,
                                 const std::vector<TreeAutomorphism>& fixed_values,
                                 std::uint64_t budget) {
    if (words.empty()) throw domain_error("even cover: no words");
    require_same_shape(group_elements, "even cover");
    const TreeShape& shape = group_elements[0].shape();
    if (shape.group()->kind() != PermGroupKind::cyclic_p || !is_prime(shape.group()->degree()))
        throw domain_error("even cover: the label group must be cyclic of prime order");
    const int p = shape.group()->degree();
    const int k = static_cast<int>(words.size());
    const int n = free_letters;
    const int m = static_cast<int>(fixed_values.size());
    if (n < 1) throw domain_error("even cover: at least one free letter required");
    for (const auto& f : fixed_values)
        if (!f.shape().same(shape)) throw domain_error("even cover: fixed value shape mismatch");
    for (const auto& w : words)
        if (w.max_index() > n + m)
            throw domain_error("even cover: word uses a letter with no value");

    std::vector<std::vector<int>> exponent_rows;
    for (const auto& w : words) {
        auto row = exponent_sum_vector(w, n + m, p);
        row.resize(static_cast<std::size_t>(n));
        exponent_rows.push_back(std::move(row));
    }
    if (matrix_rank_mod_p(exponent_rows, p) < k)
        throw domain_error("even cover: exponent-sum vectors of the free letters are dependent mod p");

    const std::uint64_t g = group_elements.size();
    // sanity-check the element list is really a group when that is cheap
    if (g <= 1024) {
        std::unordered_set<std::string> keys;
        bool has_identity = false;
        for (const auto& e : group_elements) {
            keys.insert(e.portrait_key());
            has_identity = has_identity || e.is_identity();
        }
        if (!has_identity || keys.size() != g)
            throw domain_error("even cover: element list is not a group");
        for (const auto& a : group_elements)
            for (const auto& b : group_elements)
                if (!keys.count(compose(a, b).portrait_key()))
                    throw domain_error("even cover: element list is not closed");
    }

    std::uint64_t domain = 1;
    for (int i = 0; i < n; ++i) {
        if (domain > budget / g)
            throw resource_error("even cover: domain size exceeds the budget");
        domain *= g;
    }

    EvenCoverReport rep;
    rep.group_order = g;
    rep.domain_tuples = domain;
    rep.expected_fiber = 1;
    for (int i = 0; i < n - k; ++i) rep.expected_fiber *= g;

    std::vector<TreeAutomorphism> args;
    for (int i = 0; i < n; ++i) args.push_back(group_elements[0]);
    for (const auto& f : fixed_values) args.push_back(f);

    std::unordered_map<std::string, std::uint64_t> fibers;
    std::vector<std::size_t> odometer(static_cast<std::size_t>(n), 0);
    for (std::uint64_t t = 0; t < domain; ++t) {
        std::string key;
        key.reserve(static_cast<std::size_t>(k) * shape.label_count());
        for (const auto& w : words) key += evaluate(w, args).portrait_key();
        ++fibers[key];
        for (std::size_t pos = 0; pos < odometer.size(); ++pos) {
            if (++odometer[pos] < g) {
                args[pos] = group_elements[odometer[pos]];
                break;
            }
            odometer[pos] = 0;
            args[pos] = group_elements[0];
        }
    }

    rep.images_seen = fibers.size();
    std::uint64_t expected_images = 1;
    for (int i = 0; i < k; ++i) expected_images *= g;
    rep.even = fibers.size() == expected_images;
    const std::string* worst = nullptr;
    for (const auto& [key, size] : fibers)
        if (size != rep.expected_fiber && (!worst || key < *worst)) {
            worst = &key;
            rep.witness_fiber = size;
        }
    if (worst) {
        rep.even = false;
        for (int i = 0; i < k; ++i) {
            std::vector<std::uint8_t> labels(
                worst->begin() + static_cast<std::ptrdiff_t>(i * shape.label_count()),
                worst->begin() + static_cast<std::ptrdiff_t>((i + 1) * shape.label_count()));
            rep.witness_image.emplace_back(shape, std::move(labels));
        }
    }
    return rep;
}

KernelCensusReport kernel_census(const FreeWord& w, int k, int p, int n,
                                 std::uint64_t tuple_budget, std::uint64_t mc_samples,
                                 RngConfig cfg) {
    if (k < 1) throw domain_error("kernel census: at least one letter required");
    if (w.max_index() > k) throw domain_error("kernel census: word uses a letter beyond k");
    if (!is_prime(p)) throw domain_error("kernel census: p must be prime");
    if (n < 1) throw domain_error("kernel census: depth must be positive");
    const TreeShape shape(PermGroup::cyclic(p), n);

    KernelCensusReport rep;
    rep.letters = k;
    rep.prime = p;
    rep.depth = n;
    rep.log2_domain = static_cast<double>(k) * static_cast<double>(shape.label_count()) *
                      std::log2(static_cast<double>(p));

    // |group|^k <= tuple_budget decides between enumeration and sampling
    bool exhaustive = true;
    {
        std::uint64_t tuples = 1;
        const std::uint64_t g = [&] {
            std::uint64_t v = 1;
            for (std::size_t i = 0; i < shape.label_count(); ++i) {
                if (v > tuple_budget / static_cast<std::uint64_t>(p)) return std::uint64_t{0};
                v *= static_cast<std::uint64_t>(p);
            }
            return v;
        }();
        if (g == 0) exhaustive = false;
        else
            for (int i = 0; i < k; ++i) {
                if (tuples > tuple_budget / g) {
                    exhaustive = false;
                    break;
                }
                tuples *= g;
            }
    }

    if (exhaustive) {
        rep.mode = "exhaustive";
        const auto elems = enumerate_group(shape, tuple_budget);
        const std::uint64_t g = elems.size();
        std::uint64_t tuples = 1;
        for (int i = 0; i < k; ++i) tuples *= g;
        rep.inspected = tuples;
        std::vector<TreeAutomorphism> args(static_cast<std::size_t>(k), elems[0]);
        std::vector<std::size_t> odometer(static_cast<std::size_t>(k), 0);
        for (std::uint64_t t = 0; t < tuples; ++t) {
            if (evaluate(w, args).is_identity()) ++rep.hits;
            for (std::size_t pos = 0; pos < odometer.size(); ++pos) {
                if (++odometer[pos] < g) {
                    args[pos] = elems[odometer[pos]];
                    break;
                }
                odometer[pos] = 0;
                args[pos] = elems[0];
            }
        }
        rep.log2_kernel = std::log2(static_cast<double>(rep.hits));
        rep.ratio = rep.log2_domain > 0 ? rep.log2_kernel / rep.log2_domain : 0.0;
        rep.ratio_ci_low = rep.ratio;
        rep.ratio_ci_high = rep.ratio;
        return rep;
    }

    rep.mode = "monte_carlo";
    if (mc_samples == 0) throw domain_error("kernel census: zero samples");
    rep.inspected = mc_samples;
    for (std::uint64_t i = 0; i < mc_samples; ++i) {
        Rng rng(cfg, i);
        std::vector<TreeAutomorphism> args;
        args.reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) args.push_back(haar_random(shape, rng));
        if (evaluate(w, args).is_identity()) ++rep.hits;
    }
    const double nn = static_cast<double>(mc_samples);
    const double q = static_cast<double>(rep.hits) / nn;
    // the kernel always contains the identity tuple, so the count estimate
    // and both interval ends are floored at one solution
    const auto ratio_from_q = [&](double qq) {
        if (qq <= 0.0) return 0.0;
        const double log2_count = std::max(0.0, std::log2(qq) + rep.log2_domain);
        return log2_count / rep.log2_domain;
    };
    rep.log2_kernel = q > 0.0 ? std::max(0.0, std::log2(q) + rep.log2_domain) : 0.0;
    rep.ratio = ratio_from_q(q);
    const double z = 1.959963985;
    const double denom = nn + z * z;
    const double center = (static_cast<double>(rep.hits) + z * z / 2) / denom;
    const double half = z * std::sqrt(q * (1 - q) * nn + z * z / 4) / denom;
    rep.ratio_ci_low = ratio_from_q(std::max(0.0, center - half));
    rep.ratio_ci_high = ratio_from_q(std::min(1.0, center + half));
    return rep;
}

SchreierGraph schreier_graph(const std::vector<TreeAutomorphism>& gens, int level) {
    require_same_shape(gens, "orbit graph");
    const TreeShape& shape = gens[0].shape();
    if (level < 0 || level > shape.depth())
        throw domain_error("orbit graph: level out of range");
    SchreierGraph graph;
    graph.shape = shape;
    graph.level = level;
    for (const auto& g : gens) {
        graph.images.push_back(level_action(g, level));
        std::vector<std::uint32_t> pre(graph.images.back().size());
        for (std::uint32_t v = 0; v < pre.size(); ++v)
            pre[graph.images.back()[v]] = v;
        graph.preimages.push_back(std::move(pre));
    }
    return graph;
}

std::vector<FreeWord> stabilizer_words(const SchreierGraph& graph, std::size_t basepoint) {
    const std::size_t V = graph.vertex_count();
    const std::size_t S = graph.generator_count();
    if (basepoint >= V) throw domain_error("stabilizer words: basepoint out of range");

    std::vector<char> seen(V, 0);
    std::vector<char> tree_edge(graph.edge_count(), 0);
    std::vector<std::vector<int>> word_to(V);
    std::vector<std::size_t> queue{basepoint};
    seen[basepoint] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t v = queue[head];
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t fwd = graph.images[s][v];
            if (!seen[fwd]) {
                seen[fwd] = 1;
                tree_edge[graph.edge_index(v, s)] = 1;
                word_to[fwd] = word_to[v];
                word_to[fwd].push_back(static_cast<int>(s) + 1);
                queue.push_back(fwd);
            }
            const std::size_t back = graph.preimages[s][v];
            if (!seen[back]) {
                seen[back] = 1;
                tree_edge[graph.edge_index(back, s)] = 1;
                word_to[back] = word_to[v];
                word_to[back].push_back(-(static_cast<int>(s) + 1));
                queue.push_back(back);
            }
        }
    }

    std::vector<FreeWord> cycles;
    for (std::size_t v = 0; v < V; ++v) {
        if (!seen[v]) continue;
        for (std::size_t s = 0; s < S; ++s) {
            if (tree_edge[graph.edge_index(v, s)]) continue;
            std::vector<int> letters = word_to[v];
            letters.push_back(static_cast<int>(s) + 1);
            const auto& back = word_to[graph.images[s][v]];
            for (auto it = back.rbegin(); it != back.rend(); ++it) letters.push_back(-*it);
            cycles.emplace_back(std::move(letters));
        }
    }
    return cycles;
}

bool OneChain::is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](std::uint8_t c) { return c == 0; });
}

namespace {

int chain_prime(const SchreierGraph& graph) {
    const int p = graph.shape.group()->degree();
    if (graph.shape.group()->kind() != PermGroupKind::cyclic_p || !is_prime(p))
        throw domain_error("1-chain: the label group must be cyclic of prime order");
    return p;
}

// Adds the edge-usage of the path w(v) to coeffs and returns the endpoint.
std::size_t walk_word(const FreeWord& w, std::size_t v, const SchreierGraph& graph,
                      std::vector<std::uint8_t>& coeffs, int p) {
    for (int l : w.letters()) {
        const std::size_t s = static_cast<std::size_t>(l > 0 ? l : -l) - 1;
        if (s >= graph.generator_count())
            throw domain_error("1-chain: word uses a generator the graph lacks");
        if (l > 0) {
            const std::size_t e = graph.edge_index(v, s);
            coeffs[e] = static_cast<std::uint8_t>((coeffs[e] + 1) % p);
            v = graph.images[s][v];
        } else {
            v = graph.preimages[s][v];
            const std::size_t e = graph.edge_index(v, s);
            coeffs[e] = static_cast<std::uint8_t>((coeffs[e] + p - 1) % p);
        }
    }
    return v;
}

} // namespace

OneChain one_chain(const FreeWord& w, std::size_t v, const SchreierGraph& graph) {
    if (v >= graph.vertex_count()) throw domain_error("1-chain: vertex out of range");
    OneChain chain;
    chain.prime = chain_prime(graph);
    chain.coeffs.assign(graph.edge_count(), 0);
    walk_word(w, v, graph, chain.coeffs, chain.prime);
    return chain;
}

OneChain closed_chain(const FreeWord& w, std::size_t v, const SchreierGraph& graph) {
    if (v >= graph.vertex_count()) throw domain_error("1-chain: vertex out of range");
    OneChain chain;
    chain.prime = chain_prime(graph);
    chain.coeffs.assign(graph.edge_count(), 0);
    std::size_t cur = v;
    do {
        cur = walk_word(w, cur, graph, chain.coeffs, chain.prime);
    } while (cur != v);
    return chain;
}

std::vector<std::uint8_t> boundary(const OneChain& chain, const SchreierGraph& graph) {
    if (chain.coeffs.size() != graph.edge_count())
        throw domain_error("boundary: chain does not match the graph");
    const int p = chain.prime;
    std::vector<std::uint8_t> out(graph.vertex_count(), 0);
    for (std::size_t v = 0; v < graph.vertex_count(); ++v)
        for (std::size_t s = 0; s < graph.generator_count(); ++s) {
            const int c = chain.coeffs[graph.edge_index(v, s)];
            if (c == 0) continue;
            const std::size_t head = graph.images[s][v];
            out[head] = static_cast<std::uint8_t>((out[head] + c) % p);
            out[v] = static_cast<std::uint8_t>((out[v] + p - c) % p);
        }
    return out;
}

OneChain add(const OneChain& a, const OneChain& b) {
    if (a.prime != b.prime || a.coeffs.size() != b.coeffs.size())
        throw domain_error("1-chain sum: mismatched chains");
    OneChain out;
    out.prime = a.prime;
    out.coeffs.resize(a.coeffs.size());
    for (std::size_t i = 0; i < out.coeffs.size(); ++i)
        out.coeffs[i] = static_cast<std::uint8_t>((a.coeffs[i] + b.coeffs[i]) % a.prime);
    return out;
}

int chain_rank(const std::vector<OneChain>& chains) {
    if (chains.empty()) return 0;
    const int p = chains[0].prime;
    std::vector<std::vector<int>> rows;
    for (const auto& c : chains) {
        if (c.prime != p || c.coeffs.size() != chains[0].coeffs.size())
            throw domain_error("chain rank: mismatched chains");
        rows.emplace_back(c.coeffs.begin(), c.coeffs.end());
    }
    return matrix_rank_mod_p(std::move(rows), p);
}

namespace {

// Shortest fundamental-cycle word whose letter-3 exponent sum is nonzero
// mod p, if any: the exponent functional is linear on the stabilizer, so a
// nonzero value on some free generator decides it.
bool kappa_witness(const SchreierGraph& graph, std::size_t v, int p, FreeWord& out) {
    bool found = false;
    for (const auto& w : stabilizer_words(graph, v)) {
        if (exponent_sum_vector(w, std::max(3, w.max_index()), p)[2] == 0) continue;
        if (!found || w.length() < out.length()) {
            out = w;
            found = true;
        }
    }
    return found;
}

} // namespace

KappaResult kappa(const TreeAutomorphism& g1, const TreeAutomorphism& g2,
                  const TreeAutomorphism& g3, int level, std::size_t vertex) {
    const std::vector<TreeAutomorphism> gens{g1, g2, g3};
    require_same_shape(gens, "kappa");
    const int p = g1.shape().group()->degree();
    if (g1.shape().group()->kind() != PermGroupKind::cyclic_p || !is_prime(p))
        throw domain_error("kappa: the label group must be cyclic of prime order");
    if (level < 0 || level > g1.depth()) throw domain_error("kappa: level out of range");
    const std::size_t V = g1.shape().level_size(level);
    if (vertex >= V) throw domain_error("kappa: vertex out of range");

    KappaResult res;
    res.vertex = vertex;
    const auto third = level_action(g3, level);
    for (std::size_t x = 0; x < third.size(); ++x)
        if (third[x] == x) {
            res.third_has_fixed_point = true;
            break;
        }

    for (std::uint64_t power = 1; power <= V; power *= static_cast<std::uint64_t>(p)) {
        const SchreierGraph graph =
            schreier_graph({g1, g2, treegroup::power(g3, static_cast<long long>(power))}, level);
        if (kappa_witness(graph, vertex, p, res.witness)) {
            res.kappa = power;
            return res;
        }
    }
    throw domain_error("kappa: no power of p up to the level size works");
}

KappaResult kappa_min(const TreeAutomorphism& g1, const TreeAutomorphism& g2,
                      const TreeAutomorphism& g3, int level) {
    const std::vector<TreeAutomorphism> gens{g1, g2, g3};
    require_same_shape(gens, "kappa");
    const int p = g1.shape().group()->degree();
    if (g1.shape().group()->kind() != PermGroupKind::cyclic_p || !is_prime(p))
        throw domain_error("kappa: the label group must be cyclic of prime order");
    if (level < 0 || level > g1.depth()) throw domain_error("kappa: level out of range");
    const std::size_t V = g1.shape().level_size(level);

    KappaResult res;
    const auto third = level_action(g3, level);
    for (std::size_t x = 0; x < third.size(); ++x)
        if (third[x] == x) {
            res.third_has_fixed_point = true;
            break;
        }

    for (std::uint64_t power = 1; power <= V; power *= static_cast<std::uint64_t>(p)) {
        const SchreierGraph graph =
            schreier_graph({g1, g2, treegroup::power(g3, static_cast<long long>(power))}, level);
        for (std::size_t v = 0; v < V; ++v)
            if (kappa_witness(graph, v, p, res.witness)) {
                res.vertex = v;
                res.kappa = power;
                return res;
            }
    }
    throw domain_error("kappa: no power of p up to the level size works");
}

ExperimentReport adding_machine_partner_relations(int p, int depth, int max_length,
                                                  std::uint64_t samples, RngConfig cfg) {
    if (p < 2) throw domain_error("relation search: degree must be at least 2");
    if (depth < 1) throw domain_error("relation search: depth must be positive");
    if (max_length < 1) throw domain_error("relation search: word length bound must be positive");
    if (samples == 0) throw domain_error("relation search: at least one sample required");
    // 4 * 3^(l-1) reduced words of length l over two letters
    std::uint64_t words_per_partner = 0;
    {
        std::uint64_t layer = 4;
        for (int l = 1; l <= max_length; ++l) {
            words_per_partner += layer;
            layer *= 3;
            if (words_per_partner > (std::uint64_t{1} << 22))
                throw resource_error("relation search: word tree exceeds the budget");
        }
    }

    Timer timer;
    const TreeAutomorphism machine = adding_machine(p, depth);
    const TreeShape shape = machine.shape();

    struct State {
        std::uint64_t partners_with_relation = 0;
        std::uint64_t total_relations = 0;
        int min_length = std::numeric_limits<int>::max();
        std::string witness;
        void merge(const State& o) {
            partners_with_relation += o.partners_with_relation;
            total_relations += o.total_relations;
            if (o.min_length < min_length) {
                min_length = o.min_length;
                witness = o.witness;
            }
        }
    };

    State merged = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& st) {
        const TreeAutomorphism partner = haar_random(shape, rng);
        const TreeAutomorphism steps[4] = {machine, inverse(machine), partner, inverse(partner)};
        std::uint64_t relations = 0;
        int shortest = std::numeric_limits<int>::max();
        std::string sample_witness;
        std::vector<int> letters;
        // depth-first walk of the reduced-word tree
        auto dfs = [&](auto&& self, const TreeAutomorphism& value, int last, int len) -> void {
            if (len == max_length) return;
            for (int step = 0; step < 4; ++step) {
                const int letter = (step < 2 ? 1 : 2) * (step % 2 == 0 ? 1 : -1);
                if (letter == -last) continue;
                const TreeAutomorphism next = compose(value, steps[step]);
                letters.push_back(letter);
                if (next.is_identity()) {
                    ++relations;
                    if (len + 1 < shortest) {
                        shortest = len + 1;
                        sample_witness = FreeWord(letters).str();
                    }
                }
                self(self, next, letter, len + 1);
                letters.pop_back();
            }
        };
        dfs(dfs, TreeAutomorphism(shape), 0, 0);
        st.total_relations += relations;
        if (relations > 0) {
            ++st.partners_with_relation;
            if (shortest < st.min_length) {
                st.min_length = shortest;
                st.witness = sample_witness;
            }
        }
    });

    ExperimentReport rep;
    rep.name = "adding_machine_partner_relations";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"p", p},
                  {"depth", depth},
                  {"max_length", max_length},
                  {"words_per_partner", words_per_partner}};
    rep.results["partners_with_relation"] = merged.partners_with_relation;
    rep.results["fraction_relation_free"] =
        1.0 - static_cast<double>(merged.partners_with_relation) / static_cast<double>(samples);
    rep.results["total_relations"] = merged.total_relations;
    if (merged.min_length == std::numeric_limits<int>::max()) {
        rep.results["min_relation_length"] = nullptr;
        rep.results["shortest_relation"] = nullptr;
    } else {
        rep.results["min_relation_length"] = merged.min_length;
        rep.results["shortest_relation"] = merged.witness;
    }
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

} // namespace treegroup
