#include "treegroup/stochastic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "treegroup/errors.hpp"

namespace treegroup {

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace

// --------------------------------------------------------------------------
// offspring laws
// --------------------------------------------------------------------------

void OffspringLaw::finalize() {
    if (atoms.empty()) throw domain_error("offspring law: no atoms");
    Rational total(0);
    std::uint64_t den = 1;
    for (const auto& a : atoms) {
        if (!(a.prob > Rational(0)))
            throw domain_error("offspring law: probabilities must be positive");
        total += a.prob;
        const auto d = static_cast<std::uint64_t>(a.prob.den());
        den = den / std::gcd(den, d) * d;
        if (den > (std::uint64_t{1} << 40))
            throw resource_error("offspring law: denominators too large");
    }
    if (total != Rational(1))
        throw domain_error("offspring law: probabilities must sum to 1");
    weight_den_ = den;
    weights_.clear();
    for (const auto& a : atoms)
        weights_.push_back(static_cast<std::uint64_t>(a.prob.num()) *
                           (den / static_cast<std::uint64_t>(a.prob.den())));
}

OffspringLaw OffspringLaw::of_uniform_element(const PermGroup& H) {
    std::map<std::vector<int>, int> types;
    for (int e = 0; e < H.size(); ++e) {
        std::vector<int> lengths;
        for (const auto& cyc : H.cycles(e))
            lengths.push_back(static_cast<int>(cyc.size()));
        std::sort(lengths.begin(), lengths.end());
        types[lengths]++;
    }
    OffspringLaw law;
    for (const auto& [lengths, count] : types)
        law.atoms.push_back(Atom{lengths, Rational(count, H.size())});
    law.finalize();
    return law;
}

OffspringLaw OffspringLaw::rotation_walk(int p) {
    if (!is_prime(p)) throw domain_error("rotation walk: p must be prime");
    OffspringLaw law;
    law.atoms.push_back(Atom{{1}, Rational(p - 1, p)});
    law.atoms.push_back(Atom{std::vector<int>(static_cast<std::size_t>(p), 0),
                             Rational(1, p)});
    law.finalize();
    return law;
}

OffspringLaw OffspringLaw::from_atoms(std::vector<Atom> atoms) {
    OffspringLaw law;
    law.atoms = std::move(atoms);
    law.finalize();
    return law;
}

Rational OffspringLaw::mean_children() const {
    Rational mean(0);
    for (const auto& a : atoms)
        mean += a.prob * Rational(static_cast<std::int64_t>(a.values.size()));
    return mean;
}

std::size_t OffspringLaw::sample(Rng& rng) const {
    std::uint64_t u = rng.uniform_below(weight_den_);
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (u < weights_[i]) return i;
        u -= weights_[i];
    }
    return weights_.size() - 1; // unreachable: weights sum to weight_den_
}

// --------------------------------------------------------------------------
// samplers
// --------------------------------------------------------------------------

TreeAutomorphism haar_random(const TreeShape& shape, Rng& rng) {
    const auto m = static_cast<std::uint64_t>(shape.group()->size());
    std::vector<std::uint8_t> labels(shape.label_count());
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.uniform_below(m));
    return TreeAutomorphism(shape, std::move(labels));
}

OrbitTree gw_orbit_tree_sample(const OffspringLaw& law, int depth, Rng& rng,
                               std::uint64_t node_budget) {
    if (depth < 0) throw domain_error("gw sample: negative depth");
    OrbitTree tree;
    tree.depth = depth;
    tree.labeled = false;
    tree.nodes.push_back(OrbitTreeNode{1, 0, -1, {}, {}});
    std::vector<int> frontier{0};
    for (int level = 0; level < depth; ++level) {
        std::vector<int> next;
        for (int id : frontier) {
            const auto& atom = law.atoms[law.sample(rng)];
            for (int t : atom.values) {
                if (tree.nodes.size() >= node_budget)
                    throw resource_error("gw sample: node budget exceeded");
                OrbitTreeNode node;
                node.size = tree.nodes[static_cast<std::size_t>(id)].size *
                            static_cast<std::uint64_t>(t);
                node.level = level + 1;
                node.parent = id;
                const int nid = static_cast<int>(tree.nodes.size());
                tree.nodes[static_cast<std::size_t>(id)].children.push_back(nid);
                tree.nodes.push_back(std::move(node));
                next.push_back(nid);
            }
        }
        frontier = std::move(next);
    }
    return tree;
}

OrbitTree gw_orbit_tree_sample(const PermGroup& H, int depth, Rng& rng,
                               std::uint64_t node_budget) {
    return gw_orbit_tree_sample(OffspringLaw::of_uniform_element(H), depth, rng,
                                node_budget);
}

std::vector<std::uint64_t> fixed_counts_per_level(const TreeAutomorphism& g) {
    const TreeShape& sh = g.shape();
    const PermGroup& H = *sh.group();
    const int d = sh.degree();
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(sh.depth()) + 1, 0);
    std::vector<std::size_t> fixed{0};
    counts[0] = 1;
    for (int level = 0; level < sh.depth() && !fixed.empty(); ++level) {
        std::vector<std::size_t> next;
        for (std::size_t v : fixed) {
            const int h = g.label(sh.global_index(level, v));
            for (int x = 0; x < d; ++x)
                if (H.image(h, x) == x) next.push_back(sh.child_local(v, x));
        }
        counts[static_cast<std::size_t>(level) + 1] = next.size();
        fixed = std::move(next);
    }
    return counts;
}

// --------------------------------------------------------------------------
// survival of fixed vertices
// --------------------------------------------------------------------------

ExperimentReport survival_experiment(const PermGroup& H, int n,
                                     std::uint64_t samples, RngConfig cfg) {
    if (!H.is_transitive())
        throw domain_error("survival experiment: label group must be transitive");
    if (n < 0) throw domain_error("survival experiment: negative level");
    Timer timer;

    // fixed-point count per element index: one uniform draw per vertex
    std::vector<int> fix_count(static_cast<std::size_t>(H.size()));
    for (int e = 0; e < H.size(); ++e) fix_count[static_cast<std::size_t>(e)] = H.fixed_points(e);
    const auto hsize = static_cast<std::uint64_t>(H.size());

    struct State {
        std::uint64_t survived = 0;
        void merge(const State& o) { survived += o.survived; }
    };
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        std::uint64_t z = 1;
        for (int level = 0; level < n && z > 0; ++level) {
            std::uint64_t nz = 0;
            for (std::uint64_t i = 0; i < z; ++i)
                nz += static_cast<std::uint64_t>(
                    fix_count[static_cast<std::size_t>(rng.uniform_below(hsize))]);
            z = nz;
        }
        if (z > 0) s.survived++;
    });

    const double p_hat = samples ? static_cast<double>(st.survived) /
                                       static_cast<double>(samples)
                                 : 0.0;
    const double se = samples ? std::sqrt(p_hat * (1.0 - p_hat) /
                                          static_cast<double>(samples))
                              : 0.0;
    const int r = H.rank_on_pairs();

    ExperimentReport rep;
    rep.name = "survival";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"group", H.kind_name()}, {"level", n}};
    rep.results = {{"p_fix_level_n", p_hat},
                   {"stderr", se},
                   {"n_times_p", static_cast<double>(n) * p_hat},
                   {"rank_on_pairs", r},
                   {"limit_2_over_r_minus_1",
                    r > 1 ? 2.0 / static_cast<double>(r - 1) : 0.0}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

// --------------------------------------------------------------------------
// maximum of the rotation walk (order statistics)
// --------------------------------------------------------------------------

ExperimentReport turan_experiment(int p, int n, std::uint64_t samples,
                                  RngConfig cfg, std::uint64_t node_budget) {
    if (!is_prime(p)) throw domain_error("order statistics: p must be prime");
    if (n < 0) throw domain_error("order statistics: negative level");
    Timer timer;

    struct State {
        RunningStat k_stat;
        std::uint64_t aborted = 0;
        void merge(const State& o) {
            k_stat.merge(o.k_stat);
            aborted += o.aborted;
        }
    };
    const auto pu = static_cast<std::uint64_t>(p);
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        std::vector<int> disp{0};
        std::vector<int> next;
        for (int level = 0; level < n; ++level) {
            next.clear();
            for (int k : disp) {
                if (rng.bernoulli(pu - 1, pu)) {
                    next.push_back(k + 1);
                } else {
                    for (int c = 0; c < p; ++c) next.push_back(k);
                }
            }
            if (next.size() > node_budget) {
                s.aborted++;
                return;
            }
            std::swap(disp, next);
        }
        s.k_stat.add(static_cast<double>(*std::max_element(disp.begin(), disp.end())));
    });

    ExperimentReport rep;
    rep.name = "order-statistics";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"p", p}, {"level", n}, {"node_budget", node_budget}};
    rep.results = {{"mean_K", st.k_stat.mean()},
                   {"mean_K_over_n",
                    n > 0 ? st.k_stat.mean() / static_cast<double>(n) : 0.0},
                   {"var_K", st.k_stat.variance()},
                   {"stderr_mean_K", st.k_stat.stderr_of_mean()},
                   {"completed", st.k_stat.count},
                   {"aborted", st.aborted}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport brw_max_position(const OffspringLaw& law, int n,
                                  std::uint64_t samples, RngConfig cfg,
                                  std::uint64_t node_budget) {
    if (n < 0) throw domain_error("walk maximum: negative generation");
    Timer timer;

    struct State {
        RunningStat x_stat;
        std::uint64_t aborted = 0;
        std::uint64_t extinct = 0;
        void merge(const State& o) {
            x_stat.merge(o.x_stat);
            aborted += o.aborted;
            extinct += o.extinct;
        }
    };
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        std::vector<long long> disp{0};
        std::vector<long long> next;
        for (int level = 0; level < n; ++level) {
            next.clear();
            for (long long k : disp) {
                const auto& atom = law.atoms[law.sample(rng)];
                for (int off : atom.values) next.push_back(k + off);
            }
            if (next.empty()) {
                s.extinct++;
                return;
            }
            if (next.size() > node_budget) {
                s.aborted++;
                return;
            }
            std::swap(disp, next);
        }
        s.x_stat.add(static_cast<double>(*std::max_element(disp.begin(), disp.end())));
    });
    if (st.x_stat.count == 0)
        throw resource_error("walk maximum: no sample completed within budget");

    ExperimentReport rep;
    rep.name = "walk-maximum";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"generation", n}, {"node_budget", node_budget}};
    rep.results = {{"mean_X", st.x_stat.mean()},
                   {"mean_X_over_n",
                    n > 0 ? st.x_stat.mean() / static_cast<double>(n) : 0.0},
                   {"var_X", st.x_stat.variance()},
                   {"stderr_mean_X", st.x_stat.stderr_of_mean()},
                   {"completed", st.x_stat.count},
                   {"extinct", st.extinct},
                   {"aborted", st.aborted}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

// --------------------------------------------------------------------------
// transitive generation probabilities over the subgroup lattice
// --------------------------------------------------------------------------

namespace {

struct Lattice {
    std::vector<std::vector<int>> subs; // sorted element lists, by size asc
    std::vector<char> transitive;
    std::vector<double> log_ratio;          // ln(|K|/|H|)
    std::vector<Rational> ratio;            // |K|/|H|
    std::vector<std::vector<int>> proper_in; // i -> all j with subs[j] < subs[i]
    std::vector<std::vector<std::uint64_t>> orbit_lengths; // of K on X, sorted
};

Lattice build_lattice(const PermGroup& H) {
    Lattice L;
    L.subs = H.all_subgroups();
    std::sort(L.subs.begin(), L.subs.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  return a < b;
              });
    const std::size_t S = L.subs.size();
    L.transitive.resize(S);
    L.log_ratio.resize(S);
    L.ratio.resize(S);
    L.proper_in.resize(S);
    L.orbit_lengths.resize(S);
    const int d = H.degree();
    for (std::size_t i = 0; i < S; ++i) {
        const auto& K = L.subs[i];
        L.transitive[i] = H.subgroup_is_transitive(K) ? 1 : 0;
        L.ratio[i] = Rational(static_cast<std::int64_t>(K.size()), H.size());
        L.log_ratio[i] = std::log(static_cast<double>(K.size())) -
                         std::log(static_cast<double>(H.size()));
        // orbits of K on the d points
        std::vector<int> par(static_cast<std::size_t>(d));
        std::iota(par.begin(), par.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (par[static_cast<std::size_t>(x)] != x) {
                par[static_cast<std::size_t>(x)] =
                    par[static_cast<std::size_t>(par[static_cast<std::size_t>(x)])];
                x = par[static_cast<std::size_t>(x)];
            }
            return x;
        };
        for (int e : K)
            for (int x = 0; x < d; ++x) {
                const int a = find(x), b = find(H.image(e, x));
                if (a != b) par[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
        std::map<int, std::uint64_t> sizes;
        for (int x = 0; x < d; ++x) sizes[find(x)]++;
        for (const auto& [root, size] : sizes) L.orbit_lengths[i].push_back(size);
        std::sort(L.orbit_lengths[i].begin(), L.orbit_lengths[i].end());
        for (std::size_t j = 0; j < i; ++j)
            if (L.subs[j].size() < K.size() &&
                std::includes(K.begin(), K.end(), L.subs[j].begin(), L.subs[j].end()))
                L.proper_in[i].push_back(static_cast<int>(j));
    }
    return L;
}

// P(the subgroup generated by m iid uniform elements equals subs[i]), for
// every i, with m allowed to be huge (double). P(contained in K) is
// (|K|/|H|)^m; subtracting the proper sublattice gives equality.
std::vector<double> generation_pmf(const Lattice& L, double m) {
    std::vector<double> p_eq(L.subs.size());
    for (std::size_t i = 0; i < L.subs.size(); ++i) {
        double v = std::exp(m * L.log_ratio[i]);
        for (int j : L.proper_in[i]) v -= p_eq[static_cast<std::size_t>(j)];
        p_eq[i] = std::max(0.0, v);
    }
    return p_eq;
}

double q_from_lattice(const Lattice& L, double m) {
    const auto pmf = generation_pmf(L, m);
    double q = 0.0;
    for (std::size_t i = 0; i < L.subs.size(); ++i)
        if (L.transitive[i]) q += pmf[i];
    return std::min(1.0, q);
}

Rational pow_rational(Rational base, int e) {
    Rational out(1);
    while (e > 0) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

} // namespace

double q_transitive(const PermGroup& H, int m) {
    if (m < 0) throw domain_error("q_transitive: negative sample count");
    return q_from_lattice(build_lattice(H), static_cast<double>(m));
}

Rational q_transitive_exact(const PermGroup& H, int m) {
    if (m < 0) throw domain_error("q_transitive: negative sample count");
    const Lattice L = build_lattice(H);
    std::vector<Rational> p_eq(L.subs.size());
    Rational q(0);
    for (std::size_t i = 0; i < L.subs.size(); ++i) {
        Rational v = pow_rational(L.ratio[i], m);
        for (int j : L.proper_in[i]) v -= p_eq[static_cast<std::size_t>(j)];
        p_eq[i] = v;
        if (L.transitive[i]) q += v;
    }
    return q;
}

double transitivity_product(const PermGroup& H, int j, int n) {
    if (j < 1) throw domain_error("transitivity product: need j >= 1");
    if (n < 0) throw domain_error("transitivity product: negative level");
    const Lattice L = build_lattice(H);
    const double d = static_cast<double>(H.degree());
    double prod = 1.0;
    double width = 1.0; // d^level
    for (int level = 0; level < n; ++level) {
        const double m = 1.0 + static_cast<double>(j - 1) * width;
        prod *= q_from_lattice(L, m);
        width *= d;
    }
    return prod;
}

ExperimentReport transitivity_experiment(const PermGroupPtr& H, int j, int n,
                                         std::uint64_t samples, RngConfig cfg) {
    if (j < 1) throw domain_error("transitivity experiment: need j >= 1");
    if (n < 0) throw domain_error("transitivity experiment: negative level");
    Timer timer;
    const TreeShape shape(H, n);
    const std::size_t width = shape.leaf_count();
    if (width > (std::size_t{1} << 24))
        throw resource_error("transitivity experiment: level too wide");

    struct State {
        std::uint64_t transitive = 0;
        void merge(const State& o) { transitive += o.transitive; }
    };
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        std::vector<TreeAutomorphism> gens;
        gens.reserve(static_cast<std::size_t>(j));
        for (int i = 0; i < j; ++i) gens.push_back(haar_random(shape, rng));
        std::vector<int> par(width);
        std::iota(par.begin(), par.end(), 0);
        auto find = [&](int x) {
            while (par[static_cast<std::size_t>(x)] != x) {
                par[static_cast<std::size_t>(x)] =
                    par[static_cast<std::size_t>(par[static_cast<std::size_t>(x)])];
                x = par[static_cast<std::size_t>(x)];
            }
            return x;
        };
        std::size_t components = width;
        for (const auto& g : gens) {
            for (std::size_t v = 0; v < width && components > 1; ++v) {
                const int a = find(static_cast<int>(v));
                const int b = find(static_cast<int>(apply_local(g, n, v)));
                if (a != b) {
                    par[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
                    --components;
                }
            }
        }
        if (components == 1) s.transitive++;
    });

    const double p_hat = samples ? static_cast<double>(st.transitive) /
                                       static_cast<double>(samples)
                                 : 0.0;
    const double exact = transitivity_product(*H, j, n);
    ExperimentReport rep;
    rep.name = "transitivity";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"group", H->kind_name()}, {"generators", j}, {"level", n}};
    rep.results = {{"p_transitive", p_hat},
                   {"stderr", samples ? std::sqrt(p_hat * (1.0 - p_hat) /
                                                  static_cast<double>(samples))
                                      : 0.0},
                   {"exact_product", exact},
                   {"abs_error", std::abs(p_hat - exact)}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

// --------------------------------------------------------------------------
// multi-type orbit process for j generators
// --------------------------------------------------------------------------

namespace {

// Samples the child orbit lengths of an orbit of length k under j uniform
// generators: the orbits of (j-1)k+1 fresh uniform elements of H on X, each
// scaled by k. The rotation group admits an exact two-outcome shortcut; the
// general case samples which subgroup those elements generate.
class ChildSampler {
public:
    ChildSampler(const PermGroup& H, int j) : j_(j) {
        if (H.kind() == PermGroupKind::cyclic_p) {
            p_ = static_cast<std::uint64_t>(H.degree());
        } else {
            lattice_ = build_lattice(H);
        }
    }

    // appends child sizes (k * child orbit length) to out; safe to call from
    // several threads at once
    void sample_children(std::uint64_t k, Rng& rng,
                         std::vector<std::uint64_t>& out) {
        if (p_ != 0) {
            // all (j-1)k+1 uniform rotations trivial <=> a run of that many
            // 1/p-successes; sampled exactly without forming the count
            const std::uint64_t m =
                (k > (std::uint64_t{1} << 62))
                    ? ~std::uint64_t{0}
                    : 1 + static_cast<std::uint64_t>(j_ - 1) * k;
            bool all_trivial = true;
            for (std::uint64_t i = 0; i < m; ++i) {
                if (!rng.bernoulli(1, p_)) {
                    all_trivial = false;
                    break;
                }
            }
            if (all_trivial) {
                for (std::uint64_t c = 0; c < p_; ++c) out.push_back(k);
            } else {
                out.push_back(k * p_);
            }
            return;
        }
        const double m_real =
            1.0 + static_cast<double>(j_ - 1) * static_cast<double>(k);
        const std::vector<double> pmf = pmf_for(m_real);
        double u = rng.unit();
        std::size_t pick = pmf.size() - 1;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (u < pmf[i]) {
                pick = i;
                break;
            }
            u -= pmf[i];
        }
        for (std::uint64_t t : lattice_.orbit_lengths[pick]) out.push_back(k * t);
    }

private:
    std::vector<double> pmf_for(double m) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(m);
            if (it != cache_.end()) return it->second;
        }
        std::vector<double> pmf = generation_pmf(lattice_, m);
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(m, std::move(pmf)).first->second;
    }

    int j_;
    std::uint64_t p_ = 0; // nonzero for the rotation fast path
    Lattice lattice_;
    std::mutex mutex_;
    std::map<double, std::vector<double>> cache_;
};

} // namespace

OrbitTree multitype_gw_sample(const PermGroup& H, int j, int depth, Rng& rng,
                              std::uint64_t node_budget) {
    if (j < 1) throw domain_error("multi-type sample: need j >= 1");
    if (depth < 0) throw domain_error("multi-type sample: negative depth");
    ChildSampler sampler(H, j);
    OrbitTree tree;
    tree.depth = depth;
    tree.labeled = false;
    tree.nodes.push_back(OrbitTreeNode{1, 0, -1, {}, {}});
    std::vector<int> frontier{0};
    std::vector<std::uint64_t> child_sizes;
    for (int level = 0; level < depth; ++level) {
        std::vector<int> next;
        for (int id : frontier) {
            child_sizes.clear();
            sampler.sample_children(tree.nodes[static_cast<std::size_t>(id)].size,
                                    rng, child_sizes);
            for (std::uint64_t size : child_sizes) {
                if (tree.nodes.size() >= node_budget)
                    throw resource_error("multi-type sample: node budget exceeded");
                OrbitTreeNode node;
                node.size = size;
                node.level = level + 1;
                node.parent = id;
                const int nid = static_cast<int>(tree.nodes.size());
                tree.nodes[static_cast<std::size_t>(id)].children.push_back(nid);
                tree.nodes.push_back(std::move(node));
                next.push_back(nid);
            }
        }
        frontier = std::move(next);
    }
    return tree;
}

ExperimentReport ray_boundedness_experiment(const PermGroup& H, int j,
                                            int depth, std::uint64_t samples,
                                            RngConfig cfg) {
    if (j < 2) throw domain_error("ray boundedness: need j >= 2");
    if (depth < 1) throw domain_error("ray boundedness: need depth >= 1");
    Timer timer;
    constexpr std::uint64_t kOrbitBudget = 10'000'000;

    struct State {
        std::vector<double> count_sums;
        std::uint64_t plateau = 0;
        std::uint64_t single = 0;
        std::uint64_t aborted = 0;
        std::uint64_t completed = 0;
        void merge(const State& o) {
            if (count_sums.size() < o.count_sums.size())
                count_sums.resize(o.count_sums.size(), 0.0);
            for (std::size_t i = 0; i < o.count_sums.size(); ++i)
                count_sums[i] += o.count_sums[i];
            plateau += o.plateau;
            single += o.single;
            aborted += o.aborted;
            completed += o.completed;
        }
    };
    ChildSampler sampler(H, j);
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        if (s.count_sums.empty())
            s.count_sums.assign(static_cast<std::size_t>(depth) + 1, 0.0);
        std::vector<std::uint64_t> types{1};
        std::vector<std::uint64_t> counts{1};
        std::vector<std::uint64_t> next;
        for (int level = 0; level < depth; ++level) {
            next.clear();
            for (std::uint64_t k : types) sampler.sample_children(k, rng, next);
            if (next.size() > kOrbitBudget) {
                s.aborted++;
                return;
            }
            std::swap(types, next);
            counts.push_back(types.size());
        }
        for (std::size_t i = 0; i < counts.size(); ++i)
            s.count_sums[i] += static_cast<double>(counts[i]);
        const std::size_t lo =
            static_cast<std::size_t>(depth) - static_cast<std::size_t>(depth) / 2;
        bool flat = true;
        for (std::size_t i = lo; i <= static_cast<std::size_t>(depth); ++i)
            if (counts[i] != counts[lo]) flat = false;
        if (flat) s.plateau++;
        if (types.size() == 1) s.single++;
        s.completed++;
    });

    std::vector<double> mean_counts(static_cast<std::size_t>(depth) + 1, 0.0);
    if (st.completed)
        for (std::size_t i = 0; i < mean_counts.size(); ++i)
            mean_counts[i] = st.count_sums[i] / static_cast<double>(st.completed);
    ExperimentReport rep;
    rep.name = "ray-boundedness";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"group", H.kind_name()}, {"generators", j}, {"depth", depth}};
    rep.results = {{"mean_orbit_count", mean_counts},
                   {"plateau_fraction",
                    st.completed ? static_cast<double>(st.plateau) /
                                       static_cast<double>(st.completed)
                                 : 0.0},
                   {"single_orbit_fraction",
                    st.completed ? static_cast<double>(st.single) /
                                       static_cast<double>(st.completed)
                                 : 0.0},
                   {"completed", st.completed},
                   {"aborted", st.aborted}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

// --------------------------------------------------------------------------
// fixed points of word values
// --------------------------------------------------------------------------

std::vector<int> reduce_word(const std::vector<int>& word) {
    std::vector<int> out;
    for (int letter : word) {
        if (letter == 0) throw domain_error("word: letter 0 is not allowed");
        if (!out.empty() && out.back() == -letter)
            out.pop_back();
        else
            out.push_back(letter);
    }
    return out;
}

ExperimentReport word_fixed_point_experiment(const std::vector<int>& word,
                                             const PermGroupPtr& H, int depth,
                                             std::uint64_t samples,
                                             RngConfig cfg) {
    const std::vector<int> w = reduce_word(word);
    if (w.empty())
        throw domain_error("word experiment: word reduces to the identity");
    if (depth < 1) throw domain_error("word experiment: need depth >= 1");
    int letters = 0;
    for (int letter : w) letters = std::max(letters, std::abs(letter));
    Timer timer;
    const TreeShape shape(H, depth);

    struct State {
        std::vector<std::uint64_t> has_fixed;
        void merge(const State& o) {
            if (has_fixed.size() < o.has_fixed.size())
                has_fixed.resize(o.has_fixed.size(), 0);
            for (std::size_t i = 0; i < o.has_fixed.size(); ++i)
                has_fixed[i] += o.has_fixed[i];
        }
    };
    State st = run_samples<State>(samples, cfg, [&](std::uint64_t, Rng& rng, State& s) {
        if (s.has_fixed.empty())
            s.has_fixed.assign(static_cast<std::size_t>(depth) + 1, 0);
        std::vector<TreeAutomorphism> gens;
        gens.reserve(static_cast<std::size_t>(letters));
        for (int i = 0; i < letters; ++i) gens.push_back(haar_random(shape, rng));
        std::vector<TreeAutomorphism> invs;
        TreeAutomorphism value(shape);
        for (int letter : w) {
            if (letter > 0) {
                value = compose(value, gens[static_cast<std::size_t>(letter - 1)]);
            } else {
                if (invs.empty()) {
                    invs.reserve(gens.size());
                    for (const auto& g : gens) invs.push_back(inverse(g));
                }
                value = compose(value, invs[static_cast<std::size_t>(-letter - 1)]);
            }
        }
        const auto counts = fixed_counts_per_level(value);
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0) s.has_fixed[i]++;
    });

    std::vector<double> p_fixed(static_cast<std::size_t>(depth) + 1, 0.0);
    for (std::size_t i = 0; i < p_fixed.size(); ++i)
        p_fixed[i] = samples ? static_cast<double>(st.has_fixed[i]) /
                                   static_cast<double>(samples)
                             : 0.0;

    // log-log decay rate over the upper half of the levels
    const std::size_t lo = std::max<std::size_t>(1, static_cast<std::size_t>(depth) -
                                                        static_cast<std::size_t>(depth) / 2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (std::size_t i = lo; i <= static_cast<std::size_t>(depth); ++i) {
        if (p_fixed[i] <= 0.0) continue;
        const double x = std::log(static_cast<double>(i));
        const double y = std::log(p_fixed[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    ExperimentReport rep;
    rep.name = "word-fixed-points";
    rep.rng = cfg;
    rep.samples = samples;
    rep.params = {{"group", H->kind_name()}, {"word", w}, {"depth", depth}};
    rep.results = {{"p_fixed_per_level", p_fixed},
                   {"n_times_p_at_depth",
                    static_cast<double>(depth) * p_fixed.back()}};
    if (pts >= 2) {
        const double denom = sxx - sx * sx / pts;
        rep.results["decay_exponent"] =
            denom != 0.0 ? (sxy - sx * sy / pts) / denom : 0.0;
    } else {
        rep.results["decay_exponent"] = nullptr;
    }
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

} // namespace treegroup
