#include "treegroup/grouplin.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "treegroup/errors.hpp"
#include "treegroup/orbit_tree.hpp"
#include "treegroup/stochastic.hpp"

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

// The chain machinery is specific to the cyclic-prime label group: every
// level quotient is then an elementary Abelian p-group whose vectors are
// read straight off the label rows.
void require_chain_shape(const TreeShape& shape) {
    if (!shape.group()) throw domain_error("chain: shape has no label group");
    if (shape.group()->kind() != PermGroupKind::cyclic_p || !is_prime(shape.degree()))
        throw domain_error("chain: label group must be cyclic of prime order");
    if (shape.label_count() > 1100)
        throw resource_error("chain: depth budget exceeded (more than 1100 labeled vertices)");
}

int mod_inverse(int c, int p) {
    for (int t = 1; t < p; ++t)
        if (t * c % p == 1) return t;
    throw domain_error("chain: label has no inverse (group not of prime order?)");
}

std::vector<StabilizerChain::Entry>::const_iterator find_pivot(
    const std::vector<StabilizerChain::Entry>& layer, std::size_t pos) {
    auto it = std::lower_bound(layer.begin(), layer.end(), pos,
                               [](const StabilizerChain::Entry& e, std::size_t v) {
                                   return e.pivot < v;
                               });
    if (it != layer.end() && it->pivot == pos) return it;
    return layer.end();
}

// Reduction against the last layer never composes: every participant acts
// trivially on all labeled vertices, so rows subtract as F_p vectors.
bool last_layer_reduce(const StabilizerChain& chain, TreeAutomorphism& g) {
    const int l = chain.depth() - 1;
    const auto& layer = chain.layers[static_cast<std::size_t>(l)];
    const std::size_t off = chain.shape.level_offset(l);
    const std::size_t sz = chain.shape.level_size(l);
    const int p = chain.prime;
    std::vector<std::uint8_t> labels(g.labels());
    std::size_t pos = 0;
    std::size_t li = 0;
    while (true) {
        while (pos < sz && labels[off + pos] == 0) ++pos;
        if (pos >= sz) {
            g = TreeAutomorphism(chain.shape);
            return true;
        }
        while (li < layer.size() && layer[li].pivot < pos) ++li;
        if (li >= layer.size() || layer[li].pivot != pos) {
            g = TreeAutomorphism(chain.shape, std::move(labels));
            return false;
        }
        const int c = labels[off + pos];
        const auto& wl = layer[li].witness.labels();
        for (std::size_t i = pos; i < sz; ++i) {
            const int v = labels[off + i] + (p - c * wl[off + i] % p);
            labels[off + i] = static_cast<std::uint8_t>(v % p);
        }
    }
}

// Multiply basis inverses onto g until its leading row is gone or hits a
// pivot-free position. True when g reached the identity.
bool chain_reduce(const StabilizerChain& chain, TreeAutomorphism& g) {
    const int depth = chain.depth();
    while (!g.is_identity()) {
        const int l = g.first_active_level();
        if (l == depth - 1) return last_layer_reduce(chain, g);
        const auto& layer = chain.layers[static_cast<std::size_t>(l)];
        const std::size_t off = chain.shape.level_offset(l);
        const std::size_t sz = chain.shape.level_size(l);
        std::size_t pos = 0;
        while (true) {
            const auto& lab = g.labels();
            while (pos < sz && lab[off + pos] == 0) ++pos;
            if (pos >= sz) break;
            auto it = find_pivot(layer, pos);
            if (it == layer.end()) return false;
            g = compose(g, it->inverse_powers[static_cast<std::size_t>(lab[off + pos]) - 1]);
        }
    }
    return true;
}

// Closure worklist. Every witness lies in the group generated by the
// conjugators, which is what makes conjugation closure by the conjugators
// alone extend to conjugation by arbitrary basis elements.
class ChainBuilder {
public:
    ChainBuilder(const TreeShape& shape, std::vector<TreeAutomorphism> conjugators)
        : conjugators_(std::move(conjugators)) {
        chain_.shape = shape;
        chain_.prime = shape.degree();
        chain_.layers.assign(static_cast<std::size_t>(shape.depth()), {});
        strong_cap_ = 20LL * shape.depth();
        for (int l = 0; l < shape.depth(); ++l) strong_cap_ *= shape.degree();
    }

    void seed(const TreeAutomorphism& g) { work_.push_back(g); }

    StabilizerChain run() {
        while (!work_.empty()) {
            TreeAutomorphism g = std::move(work_.front());
            work_.pop_front();
            if (!chain_reduce(chain_, g)) insert(std::move(g));
        }
        return std::move(chain_);
    }

private:
    void insert(TreeAutomorphism g) {
        const int l = g.first_active_level();
        const std::size_t off = chain_.shape.level_offset(l);
        const int p = chain_.prime;
        std::size_t pos = 0;
        while (g.labels()[off + pos] == 0) ++pos;
        const int t = mod_inverse(g.labels()[off + pos], p);
        if (t != 1) g = power(g, t);

        StabilizerChain::Entry entry;
        entry.level = l;
        entry.pivot = pos;
        entry.witness = g;
        entry.inverse_powers.reserve(static_cast<std::size_t>(p) - 1);
        entry.inverse_powers.push_back(inverse(g));
        for (int c = 2; c < p; ++c)
            entry.inverse_powers.push_back(
                compose(entry.inverse_powers.back(), entry.inverse_powers.front()));

        auto& layer = chain_.layers[static_cast<std::size_t>(l)];
        auto it = std::lower_bound(layer.begin(), layer.end(), pos,
                                   [](const StabilizerChain::Entry& e, std::size_t v) {
                                       return e.pivot < v;
                                   });
        layer.insert(it, std::move(entry));
        if (++total_ > strong_cap_)
            throw resource_error("chain: strong generator budget exceeded");

        work_.push_back(power(g, p));
        for (const auto& cj : conjugators_)
            if (!cj.is_identity()) work_.push_back(commutator(g, cj));
        // Same-level pairs keep ordered products reorderable; the last
        // level is elementary Abelian inside the full group already.
        if (l < chain_.depth() - 1)
            for (const auto& other : layer)
                if (other.pivot != pos) work_.push_back(commutator(g, other.witness));
    }

    StabilizerChain chain_;
    std::vector<TreeAutomorphism> conjugators_;
    std::deque<TreeAutomorphism> work_;
    std::int64_t strong_cap_ = 0;
    std::int64_t total_ = 0;
};

void require_common_shape(const std::vector<TreeAutomorphism>& gens) {
    if (gens.empty()) throw domain_error("chain: no generators");
    for (const auto& g : gens)
        if (!g.shape().same(gens.front().shape()))
            throw domain_error("chain: generators live on different shapes");
}

StabilizerChain build_chain_internal(const std::vector<TreeAutomorphism>& seeds,
                                     const std::vector<TreeAutomorphism>& conjugators,
                                     const TreeShape& shape) {
    require_chain_shape(shape);
    ChainBuilder builder(shape, conjugators);
    for (const auto& g : seeds) builder.seed(g);
    return builder.run();
}

std::vector<TreeAutomorphism> at_depth(const std::vector<TreeAutomorphism>& gens, int n) {
    if (n < 0) throw domain_error("chain: negative depth");
    require_common_shape(gens);
    std::vector<TreeAutomorphism> out;
    out.reserve(gens.size());
    for (const auto& g : gens) {
        if (g.depth() > n)
            out.push_back(truncate(g, n));
        else if (g.depth() < n)
            out.push_back(embed(g, n));
        else
            out.push_back(g);
    }
    return out;
}

std::int64_t ipow(std::int64_t base, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::vector<TreeAutomorphism> pairwise_commutators(const std::vector<TreeAutomorphism>& gens) {
    std::vector<TreeAutomorphism> out;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            out.push_back(commutator(gens[i], gens[j]));
    return out;
}

} // namespace

int StabilizerChain::kernel_exponent(int level) const {
    if (level < 0 || level > depth()) throw domain_error("chain: level out of range");
    int e = 0;
    for (std::size_t l = static_cast<std::size_t>(level); l < layers.size(); ++l)
        e += static_cast<int>(layers[l].size());
    return e;
}

bool StabilizerChain::contains(const TreeAutomorphism& g) const {
    if (!g.shape().same(shape)) throw domain_error("chain: element lives on a different shape");
    TreeAutomorphism h = g;
    return chain_reduce(*this, h);
}

std::vector<TreeAutomorphism> StabilizerChain::strong_generators() const {
    std::vector<TreeAutomorphism> out;
    for (const auto& layer : layers)
        for (const auto& e : layer) out.push_back(e.witness);
    return out;
}

StabilizerChain build_chain(const std::vector<TreeAutomorphism>& gens) {
    return build_chain(gens, {});
}

StabilizerChain build_chain(const std::vector<TreeAutomorphism>& gens,
                            const std::vector<TreeAutomorphism>& extra_conjugators) {
    require_common_shape(gens);
    std::vector<TreeAutomorphism> conjugators = gens;
    for (const auto& x : extra_conjugators) {
        if (!x.shape().same(gens.front().shape()))
            throw domain_error("chain: conjugators live on a different shape");
        conjugators.push_back(x);
    }
    return build_chain_internal(gens, conjugators, gens.front().shape());
}

DensitySequence density_sequence(const std::vector<TreeAutomorphism>& gens, int n) {
    auto ad = at_depth(gens, n);
    DensitySequence seq;
    seq.prime = ad.front().degree();
    if (n == 0) {
        seq.image_exponents = {0};
        return seq;
    }
    StabilizerChain chain = build_chain(ad);
    const int e0 = chain.order_exponent();
    seq.image_exponents.reserve(static_cast<std::size_t>(n) + 1);
    for (int l = 0; l <= n; ++l)
        seq.image_exponents.push_back(e0 - chain.kernel_exponent(l));
    for (int l = 1; l <= n; ++l) {
        const Rational gamma(static_cast<std::int64_t>(seq.image_exponents[static_cast<std::size_t>(l)]) *
                                 (seq.prime - 1),
                             ipow(seq.prime, l) - 1);
        seq.exact.push_back(gamma);
        seq.values.push_back(gamma.to_double());
    }
    return seq;
}

int boundary_slice_dim(const std::vector<TreeAutomorphism>& gens, int n) {
    if (n == 0) return 0;
    StabilizerChain chain = build_chain(at_depth(gens, n));
    return chain.kernel_exponent(n - 1);
}

bool SlicePolynomial::is_zero() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](std::uint8_t c) { return c == 0; });
}

std::size_t weight(const SlicePolynomial& f) {
    if (!is_prime(f.prime)) throw domain_error("slice polynomial: prime required");
    const std::size_t n = f.coeffs.size();
    if (n == 0) return 0;
    if (f.is_zero()) return n;
    std::vector<std::uint8_t> a = f.coeffs;
    const int p = f.prime;
    std::size_t count = 0;
    while (true) {
        int sum = 0;
        for (std::uint8_t c : a) sum = (sum + c) % p;
        if (sum != 0) return count;
        // exact synthetic division by (x - 1): quotient coefficients are
        // the partial sums of the original ones from the top down
        int carry = 0;
        std::uint8_t original = a[n - 1];
        a[n - 1] = 0;
        for (std::size_t i = n; i-- > 1;) {
            carry = (carry + original) % p;
            original = a[i - 1];
            a[i - 1] = static_cast<std::uint8_t>(carry);
        }
        ++count;
    }
}

SlicePolynomial multiply_by_y(const SlicePolynomial& f) {
    const std::size_t n = f.coeffs.size();
    SlicePolynomial out;
    out.prime = f.prime;
    out.coeffs.resize(n);
    const int p = f.prime;
    for (std::size_t i = 0; i < n; ++i) {
        const int shifted = f.coeffs[(i + n - 1) % n];
        out.coeffs[i] = static_cast<std::uint8_t>((shifted + p - f.coeffs[i]) % p);
    }
    return out;
}

SlicePolynomial add(const SlicePolynomial& f, const SlicePolynomial& g) {
    if (f.prime != g.prime || f.coeffs.size() != g.coeffs.size())
        throw domain_error("slice polynomial: mismatched ring");
    SlicePolynomial out;
    out.prime = f.prime;
    out.coeffs.resize(f.coeffs.size());
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        out.coeffs[i] = static_cast<std::uint8_t>((f.coeffs[i] + g.coeffs[i]) % f.prime);
    return out;
}

std::vector<SlicePolynomial> slice_basis(const StabilizerChain& chain) {
    std::vector<SlicePolynomial> out;
    if (chain.depth() == 0) return out;
    const int l = chain.depth() - 1;
    const std::size_t off = chain.shape.level_offset(l);
    const std::size_t sz = chain.shape.level_size(l);
    for (const auto& e : chain.layers[static_cast<std::size_t>(l)]) {
        SlicePolynomial poly;
        poly.prime = chain.prime;
        poly.coeffs.resize(sz);
        for (std::size_t local = 0; local < sz; ++local)
            poly.coeffs[chain.shape.ray_counter(l, local)] = e.witness.labels()[off + local];
        out.push_back(std::move(poly));
    }
    return out;
}

std::pair<TreeAutomorphism, TreeAutomorphism> polihamu_pair(int n, int k, int p) {
    if (!is_prime(p)) throw domain_error("slice pair: p must be prime");
    if (n < 1) throw domain_error("slice pair: depth must be at least 1");
    if (k < 0 || k >= n) throw domain_error("slice pair: level must satisfy 0 <= k < n");
    TreeShape shape(PermGroup::cyclic(p), n);
    require_chain_shape(shape);

    TreeAutomorphism s(shape);
    {
        std::vector<std::uint8_t> labels(shape.label_count(), 0);
        for (int l = 0; l < n; ++l)
            labels[shape.global_index(l, shape.level_size(l) - 1)] = 1;
        s = TreeAutomorphism(shape, std::move(labels));
    }

    // Same action as s down to level k; below that a single generator label
    // at the last-level vertex whose ray counter is zero.
    std::vector<std::uint8_t> labels(shape.label_count(), 0);
    for (int l = 0; l < k; ++l)
        labels[shape.global_index(l, shape.level_size(l) - 1)] = 1;
    labels[shape.global_index(n - 1, shape.local_from_ray_counter(n - 1, 0))] = 1;
    TreeAutomorphism g(shape, std::move(labels));
    return {s, g};
}

StabilizerChain derived_subgroup_chain(const std::vector<TreeAutomorphism>& gens, int n) {
    auto ad = at_depth(gens, n);
    return build_chain_internal(pairwise_commutators(ad), ad, ad.front().shape());
}

double commutator_density(const std::vector<TreeAutomorphism>& gens) {
    require_common_shape(gens);
    const int n = gens.front().depth();
    StabilizerChain whole = build_chain(gens);
    StabilizerChain derived = derived_subgroup_chain(gens, n);
    return static_cast<double>(whole.order_exponent() - derived.order_exponent());
}

SolvableReport solvable_sum_check(const std::vector<TreeAutomorphism>& gens, int n) {
    auto ad = at_depth(gens, n);
    const int p = ad.front().degree();
    DensitySequence seq = density_sequence(ad, n);

    SolvableReport rep;
    std::vector<TreeAutomorphism> current = ad;
    StabilizerChain chain = build_chain(current);
    while (chain.order_exponent() > 0) {
        if (++rep.derived_length > 20)
            throw domain_error("solvable check: derived series did not terminate within 20 steps");
        chain = derived_subgroup_chain(current, n);
        current = chain.strong_generators();
        if (current.empty()) break;
    }

    for (const auto& gamma : seq.exact) rep.partial_sum += gamma;
    rep.partial_sum_value = rep.partial_sum.to_double();
    const double c = static_cast<double>(p * p + p) / static_cast<double>(p - 1);
    rep.bound = c * rep.derived_length;
    rep.holds = rep.partial_sum_value <= rep.bound + 1e-12;
    return rep;
}

AbelianReport abelian_bound_check(const std::vector<TreeAutomorphism>& gens, int n) {
    auto ad = at_depth(gens, n);
    for (std::size_t i = 0; i < ad.size(); ++i)
        for (std::size_t j = i + 1; j < ad.size(); ++j)
            if (!commutator(ad[i], ad[j]).is_identity())
                throw domain_error("Abelian bound: generators do not commute");

    StabilizerChain chain = build_chain(ad);
    OrbitTree tree = orbit_tree_of_subgroup(ad);

    AbelianReport rep;
    rep.log_order = chain.order_exponent();
    rep.solo_nodes = static_cast<std::uint64_t>(solo_count(tree));
    rep.gap = static_cast<std::int64_t>(rep.solo_nodes) - rep.log_order;
    rep.holds = rep.gap >= 0;
    rep.equality = rep.gap == 0;
    return rep;
}

ExperimentReport random_generation_dimension_experiment(int j, int p, int n,
                                                        std::uint64_t samples,
                                                        RngConfig cfg) {
    if (j < 1) throw domain_error("random generation: need at least one generator");
    if (samples == 0) throw domain_error("random generation: need at least one sample");
    TreeShape shape(PermGroup::cyclic(p), n);
    require_chain_shape(shape);
    Timer timer;

    const std::int64_t den = (ipow(p, n) - 1) / (p - 1);

    struct State {
        std::vector<double> gammas;
        void merge(const State& o) { gammas.insert(gammas.end(), o.gammas.begin(), o.gammas.end()); }
    };
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        std::vector<TreeAutomorphism> gens;
        gens.reserve(static_cast<std::size_t>(j));
        for (int i = 0; i < j; ++i) gens.push_back(haar_random(shape, rng));
        StabilizerChain chain = build_chain(gens);
        s.gammas.push_back(static_cast<double>(chain.order_exponent()) /
                           static_cast<double>(den));
    });

    RunningStat stat;
    double lo = 1.0;
    double hi = 0.0;
    std::uint64_t above = 0;
    for (double g : st.gammas) {
        stat.add(g);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
        if (g > 0.9) ++above;
    }

    ExperimentReport rep;
    rep.name = "random_generation_dimension";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"generators", j},
                  {"prime", p},
                  {"depth", n},
                  {"guaranteed_regime", j >= 3}};
    rep.results = {{"mean_gamma", stat.mean()},
                   {"min_gamma", lo},
                   {"max_gamma", hi},
                   {"fraction_above_0_9",
                    static_cast<double>(above) / static_cast<double>(samples)},
                   {"gamma_values", st.gammas}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

} // namespace treegroup
