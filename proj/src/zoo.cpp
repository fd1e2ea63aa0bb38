#include "treegroup/zoo.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>

#include "treegroup/errors.hpp"

namespace treegroup {

namespace {

void require_positive_depth(int depth) {
    if (depth < 0) throw domain_error("depth must be non-negative");
}

} // namespace

TreeAutomorphism adding_machine(int p, int depth) {
    if (p < 2) throw domain_error("adding machine: degree must be at least 2");
    require_positive_depth(depth);
    TreeShape shape(PermGroup::cyclic(p), depth);
    std::vector<std::uint8_t> labels(shape.label_count(), 0);
    // A +1 on the first digit carries into the next digit exactly along the
    // all-(p-1) prefix, which is the last vertex of each level in the
    // big-endian local order.
    for (int l = 0; l < depth; ++l)
        labels[shape.global_index(l, shape.level_size(l) - 1)] = 1;
    return TreeAutomorphism(std::move(shape), std::move(labels));
}

void AutomatonElement::validate() const {
    if (!group) throw domain_error("automaton: missing label group");
    const int n = state_count();
    if (n == 0) throw domain_error("automaton: no states");
    if (static_cast<int>(transitions.size()) != n)
        throw domain_error("automaton: one transition row per state required");
    if (initial < 0 || initial >= n) throw domain_error("automaton: initial state out of range");
    const int d = group->degree();
    for (int s = 0; s < n; ++s) {
        if (outputs[s] < 0 || outputs[s] >= group->size())
            throw domain_error("automaton: output is not a label group element");
        if (static_cast<int>(transitions[s].size()) != d)
            throw domain_error("automaton: transition row width must equal the degree");
        for (int x = 0; x < d; ++x)
            if (transitions[s][x] < 0 || transitions[s][x] >= n)
                throw domain_error("automaton: transition target out of range");
    }
}

AutomatonElement AutomatonElement::adding_machine_automaton(int p) {
    if (p < 2) throw domain_error("adding machine: degree must be at least 2");
    AutomatonElement a;
    a.group = PermGroup::cyclic(p);
    a.outputs = {1, 0}; // state 0 carries (+1 rotation), state 1 idles
    a.transitions.assign(2, std::vector<int>(p, 1));
    a.transitions[0][p - 1] = 0;
    a.initial = 0;
    return a;
}

nlohmann::ordered_json AutomatonElement::to_json() const {
    validate();
    nlohmann::ordered_json j;
    j["d"] = group->degree();
    j["p_kind"] = group->kind_name();
    j["states"] = state_count();
    j["outputs"] = outputs;
    j["transitions"] = transitions;
    j["initial"] = initial;
    return j;
}

AutomatonElement AutomatonElement::from_json(const nlohmann::json& j) {
    AutomatonElement a;
    const std::string kind = j.at("p_kind").get<std::string>();
    const int d = j.at("d").get<int>();
    if (kind == "cyclic_p") a.group = PermGroup::cyclic(d);
    else if (kind == "symmetric_d") a.group = PermGroup::symmetric(d);
    else throw domain_error("automaton: unknown p_kind '" + kind + "'");
    a.outputs = j.at("outputs").get<std::vector<int>>();
    a.transitions = j.at("transitions").get<std::vector<std::vector<int>>>();
    a.initial = j.at("initial").get<int>();
    if (j.contains("states") &&
        j.at("states").get<int>() != static_cast<int>(a.outputs.size()))
        throw domain_error("automaton: state count does not match the tables");
    a.validate();
    return a;
}

TreeAutomorphism automaton_truncate(const AutomatonElement& a, int depth) {
    a.validate();
    require_positive_depth(depth);
    TreeShape shape(a.group, depth);
    std::vector<std::uint8_t> labels(shape.label_count(), 0);
    // state_of[global index] filled level by level; children of (l, j) are
    // contiguous at (l+1, j*d + x), so one pass suffices.
    std::vector<int> state_of(shape.label_count(), a.initial);
    const int d = shape.degree();
    for (int l = 0; l < depth; ++l) {
        const std::size_t off = shape.level_offset(l);
        for (std::size_t j = 0; j < shape.level_size(l); ++j) {
            const int s = state_of[off + j];
            labels[off + j] = static_cast<std::uint8_t>(a.outputs[s]);
            if (l + 1 < depth) {
                const std::size_t child_off = shape.level_offset(l + 1) + j * d;
                for (int x = 0; x < d; ++x)
                    state_of[child_off + x] = a.transitions[s][x];
            }
        }
    }
    return TreeAutomorphism(std::move(shape), std::move(labels));
}

std::vector<AutomatonElement> grigorchuk_automata() {
    // States 0..4 = a, b, c, d, identity over the binary tree.
    AutomatonElement base;
    base.group = PermGroup::cyclic(2);
    base.outputs = {1, 0, 0, 0, 0};
    base.transitions = {
        {4, 4}, // a: swap here, identity below
        {0, 2}, // b = (a, c)
        {0, 3}, // c = (a, d)
        {4, 1}, // d = (1, b)
        {4, 4}, // identity
    };
    std::vector<AutomatonElement> four;
    for (int s = 0; s < 4; ++s) {
        AutomatonElement e = base;
        e.initial = s;
        four.push_back(std::move(e));
    }
    return four;
}

std::vector<TreeAutomorphism> grigorchuk_generators(int depth) {
    std::vector<TreeAutomorphism> gens;
    for (const auto& a : grigorchuk_automata()) gens.push_back(automaton_truncate(a, depth));
    return gens;
}

void SubtreeSpec::validate() const {
    if (degree < 2) throw domain_error("subtree spec: degree must be at least 2");
    if (states.empty()) throw domain_error("subtree spec: no states");
    if (initial < 0 || initial >= static_cast<int>(states.size()))
        throw domain_error("subtree spec: initial state out of range");
    for (const auto& s : states) {
        if (static_cast<int>(s.children.size()) != degree)
            throw domain_error("subtree spec: child row width must equal the degree");
        for (int c : s.children)
            if (c < -1 || c >= static_cast<int>(states.size()))
                throw domain_error("subtree spec: child state out of range");
    }
}

bool SubtreeSpec::zero_or_full() const {
    for (const auto& s : states) {
        const int present = static_cast<int>(
            std::count_if(s.children.begin(), s.children.end(), [](int c) { return c >= 0; }));
        if (present != 0 && present != degree) return false;
    }
    return true;
}

SubtreeSpec SubtreeSpec::full_tree(int degree) {
    SubtreeSpec spec;
    spec.degree = degree;
    spec.states = {State{std::vector<int>(degree, 0)}};
    spec.validate();
    return spec;
}

SubtreeSpec SubtreeSpec::root_only(int degree) {
    SubtreeSpec spec;
    spec.degree = degree;
    spec.states = {State{std::vector<int>(degree, -1)}};
    spec.validate();
    return spec;
}

SubtreeSpec SubtreeSpec::half_tree(int degree) {
    SubtreeSpec spec;
    spec.degree = degree;
    spec.states.resize(3);
    spec.states[0].children.assign(degree, 2); // root: digit 0 lives on, rest end
    spec.states[0].children[0] = 1;
    spec.states[1].children.assign(degree, 1); // complete subtree
    spec.states[2].children.assign(degree, -1); // end
    spec.validate();
    return spec;
}

SubtreeSpec SubtreeSpec::single_ray(int degree) {
    SubtreeSpec spec;
    spec.degree = degree;
    spec.states.resize(1);
    spec.states[0].children.assign(degree, -1);
    spec.states[0].children[0] = 0;
    spec.validate();
    return spec;
}

SubtreeSpec SubtreeSpec::alternating_levels(int degree) {
    SubtreeSpec spec;
    spec.degree = degree;
    spec.states.resize(2);
    spec.states[0].children.assign(degree, 1); // even level: keep everything
    spec.states[1].children.assign(degree, -1); // odd level: keep digit 0 only
    spec.states[1].children[0] = 0;
    spec.validate();
    return spec;
}

std::vector<std::uint64_t> subtree_level_counts(const SubtreeSpec& spec, int depth) {
    spec.validate();
    require_positive_depth(depth);
    std::vector<std::uint64_t> counts;
    std::vector<std::uint64_t> per_state(spec.states.size(), 0);
    per_state[spec.initial] = 1;
    for (int l = 0;; ++l) {
        std::uint64_t total = 0;
        for (std::uint64_t c : per_state) total += c;
        counts.push_back(total);
        if (l == depth) break;
        std::vector<std::uint64_t> next(spec.states.size(), 0);
        for (std::size_t s = 0; s < spec.states.size(); ++s) {
            if (per_state[s] == 0) continue;
            for (int child : spec.states[s].children)
                if (child >= 0) next[child] += per_state[s];
        }
        per_state = std::move(next);
    }
    return counts;
}

Rational subtree_measure_at(const SubtreeSpec& spec, int n) {
    spec.validate();
    require_positive_depth(n);
    // degree^n must stay an exact int64 denominator
    std::int64_t den = 1;
    for (int i = 0; i < n; ++i) {
        if (den > (std::int64_t{1} << 62) / spec.degree)
            throw resource_error("subtree measure: level " + std::to_string(n) +
                                 " exceeds the exact-denominator budget");
        den *= spec.degree;
    }
    const auto counts = subtree_level_counts(spec, n);
    return Rational(static_cast<std::int64_t>(counts[static_cast<std::size_t>(n)]), den);
}

Rational subtree_measure_limit(const SubtreeSpec& spec) {
    spec.validate();
    const int n = static_cast<int>(spec.states.size());
    const int d = spec.degree;

    std::vector<bool> reachable(n, false);
    {
        std::vector<int> stack{spec.initial};
        reachable[spec.initial] = true;
        while (!stack.empty()) {
            const int s = stack.back();
            stack.pop_back();
            for (int c : spec.states[s].children)
                if (c >= 0 && !reachable[c]) {
                    reachable[c] = true;
                    stack.push_back(c);
                }
        }
    }

    // Greatest set of fully-branching states closed under their children:
    // from these the level density never drops.
    std::vector<bool> certain(n, false);
    for (int s = 0; s < n; ++s) {
        int present = 0;
        for (int c : spec.states[s].children) present += (c >= 0);
        certain[s] = reachable[s] && present == d;
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (!certain[s]) continue;
            for (int c : spec.states[s].children)
                if (c >= 0 && !certain[c]) {
                    certain[s] = false;
                    changed = true;
                    break;
                }
        }
    }

    // States that cannot reach a certain state contribute nothing in the
    // limit; the rest absorb with a probability solved exactly.
    std::vector<bool> reaches(certain);
    for (bool changed = true; changed;) {
        changed = false;
        for (int s = 0; s < n; ++s) {
            if (reaches[s] || !reachable[s]) continue;
            for (int c : spec.states[s].children)
                if (c >= 0 && reaches[c]) {
                    reaches[s] = true;
                    changed = true;
                    break;
                }
        }
    }

    if (certain[spec.initial]) return Rational(1);
    if (!reaches[spec.initial]) return Rational(0);

    std::vector<int> transient;
    std::vector<int> column(n, -1);
    for (int s = 0; s < n; ++s)
        if (reachable[s] && reaches[s] && !certain[s]) {
            column[s] = static_cast<int>(transient.size());
            transient.push_back(s);
        }
    const int t = static_cast<int>(transient.size());

    // Solve (I - Q) m = b over the rationals, where Q[s][u] counts children
    // of s carrying transient state u (divided by d) and b[s] counts
    // children in the certain set (divided by d).
    std::vector<std::vector<Rational>> mat(t, std::vector<Rational>(t + 1, Rational(0)));
    for (int i = 0; i < t; ++i) {
        mat[i][i] = Rational(1);
        for (int c : spec.states[transient[i]].children) {
            if (c < 0) continue;
            if (certain[c])
                mat[i][t] = mat[i][t] + Rational(1, d);
            else if (column[c] >= 0)
                mat[i][column[c]] = mat[i][column[c]] - Rational(1, d);
        }
    }
    for (int col = 0; col < t; ++col) {
        int pivot = -1;
        for (int r = col; r < t; ++r)
            if (!(mat[r][col] == Rational(0))) {
                pivot = r;
                break;
            }
        if (pivot < 0) throw domain_error("subtree measure: singular absorption system");
        std::swap(mat[col], mat[pivot]);
        const Rational inv = Rational(1) / mat[col][col];
        for (int j = col; j <= t; ++j) mat[col][j] = mat[col][j] * inv;
        for (int r = 0; r < t; ++r) {
            if (r == col || mat[r][col] == Rational(0)) continue;
            const Rational f = mat[r][col];
            for (int j = col; j <= t; ++j) mat[r][j] = mat[r][j] - f * mat[col][j];
        }
    }
    return mat[column[spec.initial]][t];
}

TreeAutomorphism subtree_stabilizer_sample(const SubtreeSpec& spec,
                                           const TreeShape& shape, Rng& rng) {
    spec.validate();
    if (!spec.zero_or_full())
        throw domain_error("subtree sampler: the spec must keep 0 or all children at every state");
    if (spec.degree != shape.degree())
        throw domain_error("subtree sampler: spec degree does not match the tree");

    const int d = shape.degree();
    const int group_size = shape.group()->size();
    const int id = shape.group()->identity();
    std::vector<std::uint8_t> labels(shape.label_count());
    // state per internal vertex, or -1 once the vertex has left the subtree
    std::vector<int> state_of(shape.label_count(), -1);
    if (shape.depth() > 0) state_of[0] = spec.initial;
    for (int l = 0; l < shape.depth(); ++l) {
        const std::size_t off = shape.level_offset(l);
        for (std::size_t j = 0; j < shape.level_size(l); ++j) {
            const int s = state_of[off + j];
            const bool branches = s >= 0 && spec.states[s].children[0] >= 0;
            labels[off + j] = branches ? static_cast<std::uint8_t>(id)
                                       : static_cast<std::uint8_t>(rng.uniform_int(group_size));
            if (l + 1 < shape.depth() && branches) {
                const std::size_t child_off = shape.level_offset(l + 1) + j * d;
                for (int x = 0; x < d; ++x)
                    state_of[child_off + x] = spec.states[s].children[x];
            }
        }
    }
    return TreeAutomorphism(shape, std::move(labels));
}

} // namespace treegroup
