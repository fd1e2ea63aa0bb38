#include "treegroup/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "treegroup/asymptotics.hpp"
#include "treegroup/errors.hpp"
#include "treegroup/experiment.hpp"
#include "treegroup/grouplin.hpp"
#include "treegroup/orbit_tree.hpp"
#include "treegroup/perm_group.hpp"
#include "treegroup/rng.hpp"
#include "treegroup/stochastic.hpp"
#include "treegroup/tree_automorphism.hpp"
#include "treegroup/words.hpp"
#include "treegroup/zoo.hpp"

namespace treegroup {
namespace {

using nlohmann::ordered_json;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// Shared option bundles and plumbing
// ---------------------------------------------------------------------------

struct IoOpts {
    std::string format = "json";
    std::string out_path;  // empty = stdout
    std::string plot_path; // empty = none
};

void add_io_flags(CLI::App* sub, IoOpts& io) {
    sub->add_option("--format", io.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--out", io.out_path,
                    "Write the report to this file instead of stdout");
    sub->add_option("--emit-plot-data", io.plot_path,
                    "Also write long-format metric,index,value CSV to this file");
}

struct RngOpts {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

void add_rng_flags(CLI::App* sub, RngOpts& r) {
    sub->add_option("--seed", r.seed, "Base RNG seed")->capture_default_str();
    sub->add_option("--stream", r.stream, "Independent RNG stream selector")
        ->capture_default_str();
}

RngConfig to_config(const RngOpts& r) { return RngConfig{r.seed, r.stream}; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path);
}

void plot_rows(std::ostream& os, const std::string& key, const ordered_json& v) {
    if (v.is_number()) {
        os << key << ",0," << v.dump() << "\n";
        return;
    }
    if (v.is_boolean()) {
        os << key << ",0," << (v.get<bool>() ? 1 : 0) << "\n";
        return;
    }
    if (v.is_array()) {
        std::size_t i = 0;
        for (const auto& item : v) {
            if (item.is_number())
                os << key << "," << i << "," << item.dump() << "\n";
            else if (item.is_boolean())
                os << key << "," << i << "," << (item.get<bool>() ? 1 : 0) << "\n";
            ++i;
        }
        return;
    }
    if (v.is_object())
        for (const auto& [k, item] : v.items()) plot_rows(os, key + "." + k, item);
}

std::string plot_csv(const ExperimentReport& rep) {
    std::ostringstream os;
    os << "metric,index,value\n";
    for (const auto& [k, v] : rep.results.items()) plot_rows(os, k, v);
    return os.str();
}

// Renames the report after its subcommand, appends the I/O part of the
// configuration to the echoed params, and writes the payload. Reports carry
// no timestamps, so rerunning the same configuration reproduces the file
// byte for byte; the elapsed time goes to the error stream only.
void emit_report(ExperimentReport rep, const std::string& sub, const IoOpts& io,
                 std::ostream& out, std::ostream& err,
                 const std::string* custom_csv = nullptr) {
    rep.name = sub;
    rep.params["format"] = io.format;
    rep.params["out"] = io.out_path.empty() ? "-" : io.out_path;
    rep.params["emit_plot_data"] =
        io.plot_path.empty() ? ordered_json(nullptr) : ordered_json(io.plot_path);
    std::string payload;
    if (io.format == "csv")
        payload = custom_csv ? *custom_csv : rep.to_csv();
    else
        payload = rep.to_json(false).dump(2) + "\n";
    if (io.out_path.empty())
        out << payload;
    else
        write_file(io.out_path, payload);
    if (!io.plot_path.empty()) write_file(io.plot_path, plot_csv(rep));
    err << "# " << sub << " finished in " << rep.elapsed_seconds << " s\n";
}

PermGroupPtr make_label_group(int p, int sym) {
    if (sym > 0) return PermGroup::symmetric(sym);
    return PermGroup::cyclic(p);
}

void echo_group_choice(ExperimentReport& rep, int p, int sym) {
    rep.params["prime"] = sym > 0 ? ordered_json(nullptr) : ordered_json(p);
    rep.params["symmetric_degree"] =
        sym > 0 ? ordered_json(sym) : ordered_json(nullptr);
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::uint64_t ipow_u64(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::vector<int> labels_as_ints(const TreeAutomorphism& g) {
    return std::vector<int>(g.labels().begin(), g.labels().end());
}

// ---------------------------------------------------------------------------
// Named elements and generator sets
// ---------------------------------------------------------------------------

TreeAutomorphism single_label_element(const TreeShape& shape, int level) {
    std::vector<std::uint8_t> labels(shape.label_count(), 0);
    labels[shape.level_offset(level)] = 1;
    return TreeAutomorphism(shape, labels);
}

// The full level-m group, embedded at the given tree depth: one generator
// per level 0..m-1, carrying a single +1 label at that level's first vertex.
std::vector<TreeAutomorphism> full_group_generators(int p, int m, int depth) {
    if (m < 1) throw domain_error("the full group needs --m >= 1 levels");
    if (m > depth)
        throw domain_error("the full group's --m must not exceed the depth");
    TreeShape shape(PermGroup::cyclic(p), depth);
    std::vector<TreeAutomorphism> gens;
    gens.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) gens.push_back(single_label_element(shape, i));
    return gens;
}

std::vector<TreeAutomorphism> named_group_generators(const std::string& name,
                                                     int p, int m, int depth) {
    if (name == "adding-machine") return {adding_machine(p, depth)};
    if (name == "grigorchuk") {
        if (p != 2)
            throw domain_error(
                "the Grigorchuk generators live on the binary tree; use --p 2");
        return grigorchuk_generators(depth);
    }
    if (name == "full") return full_group_generators(p, m, depth);
    throw domain_error("unknown group name: " + name +
                       " (known: adding-machine, grigorchuk, full)");
}

int grigorchuk_letter_index(const std::string& name) {
    if (name == "grigorchuk-a") return 0;
    if (name == "grigorchuk-b") return 1;
    if (name == "grigorchuk-c") return 2;
    if (name == "grigorchuk-d") return 3;
    return -1;
}

TreeAutomorphism named_element(const std::string& name, int p, int depth) {
    if (name == "adding-machine") return adding_machine(p, depth);
    const int idx = grigorchuk_letter_index(name);
    if (idx >= 0) {
        if (p != 2)
            throw domain_error(
                "the Grigorchuk elements live on the binary tree; use --p 2");
        return grigorchuk_generators(depth)[static_cast<std::size_t>(idx)];
    }
    throw domain_error("unknown element name: " + name +
                       " (known: adding-machine, grigorchuk-a, grigorchuk-b, "
                       "grigorchuk-c, grigorchuk-d)");
}

AutomatonElement named_automaton(const std::string& name, int p) {
    if (name == "adding-machine") return AutomatonElement::adding_machine_automaton(p);
    const int idx = grigorchuk_letter_index(name);
    if (idx >= 0) return grigorchuk_automata()[static_cast<std::size_t>(idx)];
    throw domain_error("unknown element name: " + name);
}

SubtreeSpec named_subtree(const std::string& name, int degree) {
    if (name == "full") return SubtreeSpec::full_tree(degree);
    if (name == "root-only") return SubtreeSpec::root_only(degree);
    if (name == "half") return SubtreeSpec::half_tree(degree);
    if (name == "single-ray") return SubtreeSpec::single_ray(degree);
    if (name == "alternating") return SubtreeSpec::alternating_levels(degree);
    throw domain_error("unknown subtree name: " + name +
                       " (known: full, root-only, half, single-ray, alternating)");
}

// log_p of the element's order, by repeated p-th powers.
int order_exponent_of(const TreeAutomorphism& g, int p) {
    int e = 0;
    TreeAutomorphism h = g;
    while (!h.is_identity()) {
        h = power(h, p);
        ++e;
    }
    return e;
}

ordered_json rational_json(const Rational& r) {
    return ordered_json{{"numerator", r.num()},
                        {"denominator", r.den()},
                        {"value", r.to_double()}};
}

// ---------------------------------------------------------------------------
// Subcommand options
// ---------------------------------------------------------------------------

struct AlphaOpts {
    int p = 2;
    IoOpts io;
};

struct TuranOpts {
    int p = 2;
    int n = 14;
    std::uint64_t samples = 2000;
    std::uint64_t node_budget = 10'000'000;
    RngOpts rng;
    IoOpts io;
};

struct SurvivalOpts {
    int p = 2;
    int sym = 0;
    int n = 64;
    std::uint64_t samples = 100'000;
    RngOpts rng;
    IoOpts io;
};

struct TransitivityOpts {
    int p = 2;
    int sym = 0;
    int j = 2;
    int levels = 20;
    std::uint64_t mc_samples = 0;
    int mc_depth = 4;
    RngOpts rng;
    IoOpts io;
};

struct ConjugacyOpts {
    int p = 2;
    int depth = 3;
    std::uint64_t samples = 200;
    RngOpts rng;
    IoOpts io;
};

struct DimensionOpts {
    int p = 2;
    int depth = 6;
    std::string name;
    int j = 3;
    bool j_given = false;
    int m = 3;
    std::uint64_t samples = 20;
    int max_depth = 10;
    RngOpts rng;
    IoOpts io;
};

struct SliceOpts {
    int p = 2;
    int n = 6;
    std::string name = "full";
    int j = 0;
    bool j_given = false;
    int m = 0; // 0 = use the depth
    int max_depth = 10;
    RngOpts rng;
    IoOpts io;
};

struct PolihamuOpts {
    int p = 2;
    int n = 6;
    int k = 2;
    int max_depth = 10;
    IoOpts io;
};

struct WordsOpts {
    int p = 2;
    int depth = 2;
    std::string words = "a";
    std::uint64_t budget = std::uint64_t{1} << 24;
    IoOpts io;
};

struct CensusOpts {
    int p = 2;
    int depth = 3;
    std::string word = "aa";
    int letters = 0; // 0 = largest letter used by the word
    std::uint64_t tuple_budget = std::uint64_t{1} << 24;
    std::uint64_t mc_samples = 100'000;
    RngOpts rng;
    IoOpts io;
};

struct KappaOpts {
    int p = 2;
    int level = 3;
    std::uint64_t samples = 4;
    long long vertex = -1;
    bool vertex_given = false;
    RngOpts rng;
    IoOpts io;
};

struct SidkiOpts {
    int p = 2;
    int depth = 6;
    int max_length = 4;
    std::uint64_t partners = 20;
    RngOpts rng;
    IoOpts io;
};

struct ZooOpts {
    bool list = false;
    std::string name;
    std::string subtree;
    int p = 2;
    int degree = 2;
    int depth = 4;
    IoOpts io;
};

struct SolvableOpts {
    int p = 2;
    int depth = 10;
    std::string name = "adding-machine";
    int m = 3;
    IoOpts io;
};

struct AbelianOpts {
    int p = 2;
    int depth = 4;
    std::uint64_t samples = 500;
    RngOpts rng;
    IoOpts io;
};

struct BatchOpts {
    std::string file;
    std::string out_dir;
};

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

ExperimentReport cmd_alpha(const AlphaOpts& o) {
    Timer timer;
    const AlphaResult root = alpha_turan(o.p);
    const PermGroupPtr H = PermGroup::cyclic(o.p);
    const PAdicOrbitMeasure measure = orbit_measure(*H, o.p);
    const AlphaResult mini = alpha_min(measure);
    const double a = root.alpha;
    const double residual =
        std::abs(a * std::pow(1.0 - a, 1.0 / a - 1.0) - (1.0 - 1.0 / o.p));

    ExperimentReport rep;
    rep.params = {{"prime", o.p}};
    rep.results = {{"alpha", root.alpha},
                   {"lambda_star", root.lambda_star},
                   {"root_residual", residual},
                   {"alpha_from_measure", mini.alpha},
                   {"lambda_from_measure", mini.lambda_star},
                   {"agreement", std::abs(root.alpha - mini.alpha)},
                   {"log_order_growth", log_order_growth(*H)},
                   {"alpha_discrete_1e6", alpha_discrete(o.p, 1'000'000)}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_turan(const TuranOpts& o) {
    ExperimentReport rep =
        turan_experiment(o.p, o.n, o.samples, to_config(o.rng), o.node_budget);
    const double alpha = alpha_turan(o.p).alpha;
    rep.results["alpha_reference"] = alpha;
    if (rep.results.contains("mean_K_over_n") &&
        rep.results["mean_K_over_n"].is_number()) {
        rep.results["abs_gap"] =
            std::abs(rep.results["mean_K_over_n"].get<double>() - alpha);
    }
    return rep;
}

ExperimentReport cmd_survival(const SurvivalOpts& o) {
    const PermGroupPtr H = make_label_group(o.p, o.sym);
    ExperimentReport rep = survival_experiment(*H, o.n, o.samples, to_config(o.rng));
    echo_group_choice(rep, o.p, o.sym);
    return rep;
}

ExperimentReport cmd_transitivity(const TransitivityOpts& o) {
    if (o.j < 1) throw domain_error("--j must be >= 1");
    if (o.levels < 1) throw domain_error("--levels must be >= 1");
    if (o.mc_depth < 1) throw domain_error("--mc-depth must be >= 1");
    Timer timer;
    const PermGroupPtr H = make_label_group(o.p, o.sym);

    std::vector<double> running;
    running.reserve(static_cast<std::size_t>(o.levels));
    for (int l = 1; l <= o.levels; ++l)
        running.push_back(transitivity_product(*H, o.j, l));
    std::vector<double> factors;
    factors.reserve(running.size());
    for (std::size_t i = 0; i < running.size(); ++i)
        factors.push_back(i == 0 ? running[0] : running[i] / running[i - 1]);

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.samples = o.mc_samples;
    rep.params = {{"group", H->kind_name()},
                  {"generators", o.j},
                  {"levels", o.levels},
                  {"mc_samples", o.mc_samples},
                  {"mc_depth", o.mc_depth}};
    echo_group_choice(rep, o.p, o.sym);
    rep.results = {{"exact_product", running.back()},
                   {"running_product", running},
                   {"level_factors", factors}};
    if (o.mc_samples > 0) {
        ExperimentReport mc = transitivity_experiment(H, o.j, o.mc_depth,
                                                      o.mc_samples, to_config(o.rng));
        rep.results["mc_p_transitive"] = mc.results["p_transitive"];
        rep.results["mc_stderr"] = mc.results["stderr"];
        rep.results["mc_exact_truncated"] = mc.results["exact_product"];
        rep.results["mc_abs_error"] = mc.results["abs_error"];
    } else {
        rep.results["mc_p_transitive"] = nullptr;
        rep.results["mc_stderr"] = nullptr;
        rep.results["mc_exact_truncated"] = nullptr;
        rep.results["mc_abs_error"] = nullptr;
    }
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_conjugacy(const ConjugacyOpts& o) {
    if (o.depth < 1) throw domain_error("--depth must be >= 1");
    if (o.samples < 1) throw domain_error("--samples must be >= 1");
    Timer timer;
    const TreeShape shape(PermGroup::cyclic(o.p), o.depth);

    struct St {
        std::uint64_t conjugate = 0;
        std::uint64_t self_failures = 0;
        void merge(const St& other) {
            conjugate += other.conjugate;
            self_failures += other.self_failures;
        }
    };
    const St st = run_samples<St>(
        o.samples, to_config(o.rng), [&](std::uint64_t, Rng& rng, St& s) {
            const TreeAutomorphism g = haar_random(shape, rng);
            const TreeAutomorphism h = haar_random(shape, rng);
            const TreeAutomorphism x = haar_random(shape, rng);
            if (are_conjugate(g, h)) ++s.conjugate;
            const TreeAutomorphism gx = compose(compose(inverse(x), g), x);
            if (!are_conjugate(g, gx)) ++s.self_failures;
        });

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.samples = o.samples;
    rep.params = {{"prime", o.p}, {"depth", o.depth}};
    rep.results = {{"pairs_conjugate", st.conjugate},
                   {"conjugate_fraction", static_cast<double>(st.conjugate) /
                                              static_cast<double>(o.samples)},
                   {"self_conjugacy_failures", st.self_failures}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_dimension(const DimensionOpts& o,
                               std::optional<std::string>& custom_csv) {
    if (o.depth < 1) throw domain_error("--depth must be >= 1");
    if (o.depth > o.max_depth)
        throw resource_error("depth " + std::to_string(o.depth) +
                             " exceeds the --max-depth budget of " +
                             std::to_string(o.max_depth));
    if (o.name.empty() && !o.j_given)
        throw domain_error("dimension needs a group: pass --name or --j");

    if (!o.name.empty()) {
        Timer timer;
        const std::vector<TreeAutomorphism> gens =
            named_group_generators(o.name, o.p, o.m, o.depth);
        const DensitySequence seq = density_sequence(gens, o.depth);

        std::vector<int> levels;
        std::vector<std::int64_t> nums, dens;
        for (int l = 1; l <= o.depth; ++l) {
            levels.push_back(l);
            nums.push_back(seq.exact[static_cast<std::size_t>(l - 1)].num());
            dens.push_back(seq.exact[static_cast<std::size_t>(l - 1)].den());
        }

        ExperimentReport rep;
        rep.params = {{"mode", "exact"}, {"prime", o.p},     {"depth", o.depth},
                      {"name", o.name},  {"m", o.m},         {"generators", nullptr},
                      {"max_depth", o.max_depth}};
        rep.results = {{"levels", levels},
                       {"numerators", nums},
                       {"denominators", dens},
                       {"values", seq.values},
                       {"image_exponents", seq.image_exponents},
                       {"gamma_final", seq.values.back()}};
        rep.elapsed_seconds = timer.seconds();

        std::ostringstream csv;
        csv << "level,numerator,denominator,value\n";
        for (int l = 1; l <= o.depth; ++l) {
            const Rational& r = seq.exact[static_cast<std::size_t>(l - 1)];
            csv << l << "," << r.num() << "," << r.den() << ","
                << seq.values[static_cast<std::size_t>(l - 1)] << "\n";
        }
        custom_csv = csv.str();
        return rep;
    }

    if (o.j < 1) throw domain_error("--j must be >= 1");
    ExperimentReport rep = random_generation_dimension_experiment(
        o.j, o.p, o.depth, o.samples, to_config(o.rng));
    ordered_json params = {{"mode", "sampled"}};
    for (const auto& [k, v] : rep.params.items()) params[k] = v;
    params["name"] = nullptr;
    params["max_depth"] = o.max_depth;
    rep.params = std::move(params);
    return rep;
}

ExperimentReport cmd_slice(const SliceOpts& o) {
    if (o.n < 1) throw domain_error("--n must be >= 1");
    if (o.n > o.max_depth)
        throw resource_error("depth " + std::to_string(o.n) +
                             " exceeds the --max-depth budget of " +
                             std::to_string(o.max_depth));
    Timer timer;
    const int m_eff = o.m > 0 ? o.m : o.n;

    std::vector<TreeAutomorphism> gens;
    if (o.j_given) {
        if (o.j < 1) throw domain_error("--j must be >= 1");
        const TreeShape shape(PermGroup::cyclic(o.p), o.n);
        const RngConfig cfg = to_config(o.rng);
        for (int i = 0; i < o.j; ++i) {
            Rng rng(cfg, static_cast<std::uint64_t>(i));
            gens.push_back(haar_random(shape, rng));
        }
    } else {
        gens = named_group_generators(o.name, o.p, m_eff, o.n);
    }

    const StabilizerChain chain = build_chain(gens);
    const int dim = chain.kernel_exponent(o.n - 1);
    std::vector<std::uint64_t> weights;
    for (const SlicePolynomial& f : slice_basis(chain))
        weights.push_back(static_cast<std::uint64_t>(weight(f)));
    std::sort(weights.begin(), weights.end());

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.params = {{"prime", o.p},
                  {"depth", o.n},
                  {"name", o.j_given ? ordered_json(nullptr) : ordered_json(o.name)},
                  {"m", o.j_given ? ordered_json(nullptr) : ordered_json(m_eff)},
                  {"generators", o.j_given ? ordered_json(o.j) : ordered_json(nullptr)},
                  {"max_depth", o.max_depth}};
    rep.results = {{"slice_dim", dim},
                   {"order_exponent", chain.order_exponent()},
                   {"basis_weights", weights}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_polihamu(const PolihamuOpts& o) {
    if (o.n < 2) throw domain_error("--n must be >= 2");
    if (o.k < 0 || o.k >= o.n) throw domain_error("--k must satisfy 0 <= k < n");
    if (o.n > o.max_depth)
        throw resource_error("depth " + std::to_string(o.n) +
                             " exceeds the --max-depth budget of " +
                             std::to_string(o.max_depth));
    if ((o.n - 1) * std::log2(static_cast<double>(o.p)) > 62.0)
        throw resource_error("p^(n-1) does not fit in 64 bits");
    Timer timer;

    const auto [s, g] = polihamu_pair(o.n, o.k, o.p);
    const std::uint64_t pk = ipow_u64(static_cast<std::uint64_t>(o.p), o.k);
    const std::vector<TreeAutomorphism> gens = {
        s, power(g, static_cast<long long>(pk))};
    const int dim = boundary_slice_dim(gens, o.n);
    const std::uint64_t formula =
        ipow_u64(static_cast<std::uint64_t>(o.p), o.n - 1) - pk + 1;

    ExperimentReport rep;
    rep.params = {{"prime", o.p}, {"n", o.n}, {"k", o.k}, {"max_depth", o.max_depth}};
    rep.results = {{"slice_dim", dim},
                   {"formula_value", formula},
                   {"matches", static_cast<std::uint64_t>(dim) == formula}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_words(const WordsOpts& o) {
    if (o.depth < 1) throw domain_error("--depth must be >= 1");
    Timer timer;

    std::vector<FreeWord> words;
    std::vector<std::string> word_strs;
    for (const std::string& part : split_csv(o.words)) {
        FreeWord w = FreeWord::parse(part);
        word_strs.push_back(w.str());
        words.push_back(std::move(w));
    }
    if (words.empty()) throw domain_error("--words must list at least one word");
    int free_letters = 0;
    for (const FreeWord& w : words) free_letters = std::max(free_letters, w.max_index());
    if (free_letters == 0)
        throw domain_error("the word system must use at least one letter");

    const TreeShape shape(PermGroup::cyclic(o.p), o.depth);
    const std::vector<TreeAutomorphism> elements = enumerate_group(shape, o.budget);
    const EvenCoverReport r =
        even_cover_check(words, elements, free_letters, {}, o.budget);

    ExperimentReport rep;
    rep.params = {{"prime", o.p},
                  {"depth", o.depth},
                  {"words", word_strs},
                  {"free_letters", free_letters},
                  {"budget", o.budget}};
    rep.results = {{"even", r.even},
                   {"group_order", r.group_order},
                   {"domain_tuples", r.domain_tuples},
                   {"expected_fiber", r.expected_fiber},
                   {"images_seen", r.images_seen}};
    if (r.even) {
        rep.results["witness"] = nullptr;
    } else {
        ordered_json imgs = ordered_json::array();
        for (const TreeAutomorphism& t : r.witness_image)
            imgs.push_back(labels_as_ints(t));
        rep.results["witness"] =
            ordered_json{{"fiber_size", r.witness_fiber}, {"image_portraits", imgs}};
    }
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_census(const CensusOpts& o) {
    Timer timer;
    const FreeWord w = FreeWord::parse(o.word);
    const int letters = o.letters > 0 ? o.letters : std::max(1, w.max_index());
    const KernelCensusReport r =
        kernel_census(w, letters, o.p, o.depth, o.tuple_budget, o.mc_samples,
                      to_config(o.rng));

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.samples = r.inspected;
    rep.params = {{"word", w.str()},
                  {"letters", letters},
                  {"prime", o.p},
                  {"depth", o.depth},
                  {"tuple_budget", o.tuple_budget},
                  {"mc_samples", o.mc_samples}};
    rep.results = {{"mode", r.mode},
                   {"inspected", r.inspected},
                   {"hits", r.hits},
                   {"log2_kernel", r.log2_kernel},
                   {"log2_domain", r.log2_domain},
                   {"ratio", r.ratio},
                   {"ratio_ci_low", r.ratio_ci_low},
                   {"ratio_ci_high", r.ratio_ci_high}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_kappa(const KappaOpts& o) {
    if (o.level < 0) throw domain_error("--level must be >= 0");
    if (o.samples < 1) throw domain_error("--samples must be >= 1");
    Timer timer;
    const int depth = std::max(o.level, 1);
    const TreeShape shape(PermGroup::cyclic(o.p), depth);
    if (o.vertex_given &&
        (o.vertex < 0 ||
         o.vertex >= static_cast<long long>(shape.level_size(o.level))))
        throw domain_error("--vertex is outside the level");

    struct St {
        std::vector<std::uint64_t> kappas;
        std::vector<std::uint64_t> vertices;
        std::vector<std::string> witnesses;
        std::uint64_t third_fixed = 0;
        void merge(const St& other) {
            kappas.insert(kappas.end(), other.kappas.begin(), other.kappas.end());
            vertices.insert(vertices.end(), other.vertices.begin(),
                            other.vertices.end());
            witnesses.insert(witnesses.end(), other.witnesses.begin(),
                             other.witnesses.end());
            third_fixed += other.third_fixed;
        }
    };
    const St st = run_samples<St>(
        o.samples, to_config(o.rng), [&](std::uint64_t, Rng& rng, St& s) {
            const TreeAutomorphism g1 = haar_random(shape, rng);
            const TreeAutomorphism g2 = haar_random(shape, rng);
            const TreeAutomorphism g3 = haar_random(shape, rng);
            const KappaResult r =
                o.vertex_given
                    ? kappa(g1, g2, g3, o.level,
                            static_cast<std::size_t>(o.vertex))
                    : kappa_min(g1, g2, g3, o.level);
            s.kappas.push_back(r.kappa);
            s.vertices.push_back(static_cast<std::uint64_t>(r.vertex));
            s.witnesses.push_back(r.witness.str());
            if (r.third_has_fixed_point) ++s.third_fixed;
        });

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.samples = o.samples;
    rep.params = {{"prime", o.p},
                  {"level", o.level},
                  {"vertex", o.vertex_given ? ordered_json(o.vertex)
                                            : ordered_json(nullptr)}};
    rep.results = {
        {"kappa_values", st.kappas},
        {"vertices", st.vertices},
        {"witnesses", st.witnesses},
        {"third_fixed_point_count", st.third_fixed},
        {"kappa_overall_min",
         *std::min_element(st.kappas.begin(), st.kappas.end())},
        {"kappa_overall_max",
         *std::max_element(st.kappas.begin(), st.kappas.end())}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_sidki(const SidkiOpts& o) {
    return adding_machine_partner_relations(o.p, o.depth, o.max_length, o.partners,
                                            to_config(o.rng));
}

ExperimentReport cmd_zoo(const ZooOpts& o) {
    const int choices = (o.list ? 1 : 0) + (o.name.empty() ? 0 : 1) +
                        (o.subtree.empty() ? 0 : 1);
    if (choices != 1)
        throw domain_error("zoo needs exactly one of --list, --name, --subtree");
    Timer timer;

    ExperimentReport rep;
    rep.params = {{"list", o.list},
                  {"name", o.name.empty() ? ordered_json(nullptr) : ordered_json(o.name)},
                  {"subtree", o.subtree.empty() ? ordered_json(nullptr)
                                                : ordered_json(o.subtree)},
                  {"prime", o.p},
                  {"degree", o.degree},
                  {"depth", o.depth}};

    if (o.list) {
        rep.results = {
            {"elements",
             {"adding-machine", "grigorchuk-a", "grigorchuk-b", "grigorchuk-c",
              "grigorchuk-d"}},
            {"groups", {"adding-machine", "grigorchuk", "full"}},
            {"subtrees", {"full", "root-only", "half", "single-ray", "alternating"}}};
    } else if (!o.name.empty()) {
        if (o.depth < 1) throw domain_error("--depth must be >= 1");
        const TreeAutomorphism g = named_element(o.name, o.p, o.depth);
        const AutomatonElement a = named_automaton(o.name, o.p);
        const int p = g.shape().group()->degree();
        rep.results = {{"label_group", g.shape().group()->kind_name()},
                       {"degree", g.degree()},
                       {"depth", g.depth()},
                       {"labels", labels_as_ints(g)},
                       {"fixed_per_level", fixed_counts_per_level(g)},
                       {"order_exponent", order_exponent_of(g, p)},
                       {"automaton", a.to_json()}};
    } else {
        if (o.depth < 0) throw domain_error("--depth must be >= 0");
        const SubtreeSpec spec = named_subtree(o.subtree, o.degree);
        rep.results = {{"level_counts", subtree_level_counts(spec, o.depth)},
                       {"measure_at_depth",
                        rational_json(subtree_measure_at(spec, o.depth))},
                       {"measure_limit", rational_json(subtree_measure_limit(spec))},
                       {"zero_or_full", spec.zero_or_full()}};
    }
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_solvable(const SolvableOpts& o) {
    if (o.depth < 1) throw domain_error("--depth must be >= 1");
    Timer timer;
    const std::vector<TreeAutomorphism> gens =
        named_group_generators(o.name, o.p, o.m, o.depth);
    const SolvableReport r = solvable_sum_check(gens, o.depth);

    ExperimentReport rep;
    rep.params = {{"prime", o.p}, {"depth", o.depth}, {"name", o.name}, {"m", o.m}};
    rep.results = {{"derived_length", r.derived_length},
                   {"density_sum", rational_json(r.partial_sum)},
                   {"bound_constant",
                    static_cast<double>(o.p * o.p + o.p) / (o.p - 1)},
                   {"bound", r.bound},
                   {"holds", r.holds}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

ExperimentReport cmd_abelian(const AbelianOpts& o) {
    if (o.depth < 1) throw domain_error("--depth must be >= 1");
    if (o.samples < 1) throw domain_error("--samples must be >= 1");
    Timer timer;
    const TreeShape shape(PermGroup::cyclic(o.p), o.depth);

    struct St {
        std::uint64_t violations = 0;
        std::uint64_t equalities = 0;
        std::int64_t min_gap = std::numeric_limits<std::int64_t>::max();
        std::int64_t max_gap = std::numeric_limits<std::int64_t>::min();
        void merge(const St& other) {
            violations += other.violations;
            equalities += other.equalities;
            min_gap = std::min(min_gap, other.min_gap);
            max_gap = std::max(max_gap, other.max_gap);
        }
    };
    const St st = run_samples<St>(
        o.samples, to_config(o.rng), [&](std::uint64_t, Rng& rng, St& s) {
            const TreeAutomorphism g = haar_random(shape, rng);
            const AbelianReport a = abelian_bound_check({g}, o.depth);
            if (!a.holds) ++s.violations;
            if (a.equality) ++s.equalities;
            s.min_gap = std::min(s.min_gap, a.gap);
            s.max_gap = std::max(s.max_gap, a.gap);
        });

    const AbelianReport machine =
        abelian_bound_check({adding_machine(o.p, o.depth)}, o.depth);

    ExperimentReport rep;
    rep.rng = to_config(o.rng);
    rep.samples = o.samples;
    rep.params = {{"prime", o.p}, {"depth", o.depth}};
    rep.results = {{"holds_all", st.violations == 0},
                   {"violations", st.violations},
                   {"equality_count", st.equalities},
                   {"min_gap", st.min_gap},
                   {"max_gap", st.max_gap},
                   {"machine",
                    ordered_json{{"log_order", machine.log_order},
                                 {"solo_nodes", machine.solo_nodes},
                                 {"gap", machine.gap},
                                 {"holds", machine.holds},
                                 {"equality", machine.equality}}}};
    rep.elapsed_seconds = timer.seconds();
    return rep;
}

bool valid_run_name(const std::string& name) {
    if (name.empty()) return false;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (!ok) return false;
    }
    return name[0] != '.';
}

std::string report_extension(const std::vector<std::string>& argv) {
    for (std::size_t i = 0; i < argv.size(); ++i) {
        if (argv[i] == "--format" && i + 1 < argv.size())
            return argv[i + 1] == "csv" ? "csv" : "json";
        if (argv[i].rfind("--format=", 0) == 0)
            return argv[i].substr(9) == "csv" ? "csv" : "json";
    }
    return "json";
}

int cmd_batch(const BatchOpts& o, std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    std::ifstream in(o.file);
    if (!in) throw domain_error("cannot open batch file: " + o.file);
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + o.out_dir +
                                 ": " + ec.message());

    ordered_json runs = ordered_json::array();
    std::uint64_t failed = 0;
    std::uint64_t index = 0;
    std::set<std::string> used_names;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        ++index;

        std::string name = "run-" + std::to_string(index);
        std::vector<std::string> argv;
        std::string error;

        const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            error = "line is not a JSON object";
        } else {
            if (j.contains("name")) {
                if (j["name"].is_string())
                    name = j["name"].get<std::string>();
                else
                    error = "\"name\" must be a string";
            }
            if (error.empty() && !valid_run_name(name))
                error = "run name must match [A-Za-z0-9._-]+ and not start with '.'";
            if (error.empty() && !used_names.insert(name).second)
                error = "duplicate run name";
            if (error.empty()) {
                if (!j.contains("argv") || !j["argv"].is_array() || j["argv"].empty())
                    error = "\"argv\" must be a non-empty array";
                else
                    for (const auto& a : j["argv"]) {
                        if (!a.is_string()) {
                            error = "\"argv\" entries must be strings";
                            break;
                        }
                        argv.push_back(a.get<std::string>());
                    }
            }
            if (error.empty() && argv.front() == "batch")
                error = "nested batch runs are not supported";
        }

        ordered_json entry;
        entry["name"] = name;
        entry["argv"] = argv;
        if (!error.empty()) {
            entry["exit_code"] = nullptr;
            entry["report"] = nullptr;
            entry["error"] = error;
            entry["status"] = "failed";
            ++failed;
        } else {
            const std::string rel = name + "." + report_extension(argv);
            std::vector<std::string> child = argv;
            child.push_back("--out");
            child.push_back((fs::path(o.out_dir) / rel).string());
            const int code = run_cli(child, out, err);
            entry["exit_code"] = code;
            entry["report"] = code == 0 ? ordered_json(rel) : ordered_json(nullptr);
            entry["error"] = nullptr;
            entry["status"] = code == 0 ? "ok" : "failed";
            if (code != 0) ++failed;
        }
        runs.push_back(std::move(entry));
    }

    ordered_json manifest;
    manifest["runs"] = runs;
    manifest["total"] = runs.size();
    manifest["failed"] = failed;
    const fs::path manifest_path = fs::path(o.out_dir) / "manifest.json";
    write_file(manifest_path.string(), manifest.dump(2) + "\n");
    err << "# batch: " << runs.size() << " run(s), " << failed
        << " failed; manifest at " << manifest_path.string() << "\n";
    return failed == 0 ? 0 : 1;
}

} // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{
        "Exact and sampled experiments on automorphism groups of rooted d-ary "
        "trees (iterated wreath powers of a permutation group)",
        "treegroup"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "treegroup 1.0.0");

    AlphaOpts alpha_o;
    CLI::App* s_alpha = app.add_subcommand(
        "alpha", "Displacement rate of the orbit-valuation walk: root equation "
                 "vs. measure minimization");
    s_alpha->add_option("--p", alpha_o.p, "Prime label-group order")
        ->capture_default_str();
    add_io_flags(s_alpha, alpha_o.io);

    TuranOpts turan_o;
    CLI::App* s_turan = app.add_subcommand(
        "turan", "Sampled log-order of a uniform element at depth n against the "
                 "displacement rate");
    s_turan->add_option("--p", turan_o.p, "Prime label-group order")
        ->capture_default_str();
    s_turan->add_option("--n", turan_o.n, "Tree depth")->capture_default_str();
    s_turan->add_option("--samples", turan_o.samples, "Sample count")
        ->capture_default_str();
    s_turan->add_option("--node-budget", turan_o.node_budget,
                        "Abort a sample past this many orbit-tree nodes")
        ->capture_default_str();
    add_rng_flags(s_turan, turan_o.rng);
    add_io_flags(s_turan, turan_o.io);

    SurvivalOpts surv_o;
    CLI::App* s_surv = app.add_subcommand(
        "survival", "Probability that a uniform element fixes a depth-n vertex, "
                    "times n, against its limit");
    s_surv->add_option("--p", surv_o.p, "Prime label-group order")
        ->capture_default_str();
    CLI::Option* surv_sym =
        s_surv->add_option("--symmetric", surv_o.sym,
                           "Use the full symmetric group of this degree instead");
    s_surv->get_option("--p")->excludes(surv_sym);
    s_surv->add_option("--n", surv_o.n, "Level whose fixed vertices are counted")
        ->capture_default_str();
    s_surv->add_option("--samples", surv_o.samples, "Sample count")
        ->capture_default_str();
    add_rng_flags(s_surv, surv_o.rng);
    add_io_flags(s_surv, surv_o.io);

    TransitivityOpts trans_o;
    CLI::App* s_trans = app.add_subcommand(
        "transitivity", "Probability that j uniform elements act transitively on "
                        "every level: exact product and Monte Carlo");
    s_trans->add_option("--p", trans_o.p, "Prime label-group order")
        ->capture_default_str();
    CLI::Option* trans_sym =
        s_trans->add_option("--symmetric", trans_o.sym,
                            "Use the full symmetric group of this degree instead");
    s_trans->get_option("--p")->excludes(trans_sym);
    s_trans->add_option("--j", trans_o.j, "Number of independent uniform elements")
        ->capture_default_str();
    s_trans->add_option("--levels", trans_o.levels, "Levels in the exact product")
        ->capture_default_str();
    s_trans->add_option("--mc-samples", trans_o.mc_samples,
                        "Monte Carlo trials (0 = exact only)")
        ->capture_default_str();
    s_trans->add_option("--mc-depth", trans_o.mc_depth,
                        "Truncation depth for the Monte Carlo check")
        ->capture_default_str();
    add_rng_flags(s_trans, trans_o.rng);
    add_io_flags(s_trans, trans_o.io);

    ConjugacyOpts conj_o;
    CLI::App* s_conj = app.add_subcommand(
        "conjugacy", "Conjugacy of uniform element pairs via labeled orbit "
                     "trees, with a self-conjugacy sanity check");
    s_conj->add_option("--p", conj_o.p, "Prime label-group order")
        ->capture_default_str();
    s_conj->add_option("--depth", conj_o.depth, "Tree depth")->capture_default_str();
    s_conj->add_option("--samples", conj_o.samples, "Sampled pairs")
        ->capture_default_str();
    add_rng_flags(s_conj, conj_o.rng);
    add_io_flags(s_conj, conj_o.io);

    DimensionOpts dim_o;
    CLI::App* s_dim = app.add_subcommand(
        "dimension", "Per-level density of a subgroup: exact for a named group, "
                     "sampled for random generators");
    s_dim->add_option("--p", dim_o.p, "Prime label-group order")
        ->capture_default_str();
    s_dim->add_option("--depth", dim_o.depth, "Tree depth")->capture_default_str();
    CLI::Option* dim_name = s_dim->add_option(
        "--name", dim_o.name, "Named group: adding-machine, grigorchuk, full");
    CLI::Option* dim_j = s_dim->add_option(
        "--j", dim_o.j, "Sample this many uniform generators instead");
    dim_name->excludes(dim_j);
    s_dim->add_option("--m", dim_o.m, "Levels of the embedded full group")
        ->capture_default_str();
    s_dim->add_option("--samples", dim_o.samples, "Sample count (with --j)")
        ->capture_default_str();
    s_dim->add_option("--max-depth", dim_o.max_depth, "Depth budget")
        ->capture_default_str();
    add_rng_flags(s_dim, dim_o.rng);
    add_io_flags(s_dim, dim_o.io);

    SliceOpts slice_o;
    CLI::App* s_slice = app.add_subcommand(
        "slice", "Dimension and weight profile of a subgroup's last-level "
                 "stabilizer slice");
    s_slice->add_option("--p", slice_o.p, "Prime label-group order")
        ->capture_default_str();
    s_slice->add_option("--n", slice_o.n, "Tree depth")->capture_default_str();
    CLI::Option* slice_name = s_slice->add_option(
        "--name", slice_o.name, "Named group: adding-machine, grigorchuk, full");
    CLI::Option* slice_j = s_slice->add_option(
        "--j", slice_o.j, "Sample this many uniform generators instead");
    slice_name->excludes(slice_j);
    s_slice->add_option("--m", slice_o.m,
                        "Levels of the embedded full group (0 = depth)")
        ->capture_default_str();
    s_slice->add_option("--max-depth", slice_o.max_depth, "Depth budget")
        ->capture_default_str();
    add_rng_flags(s_slice, slice_o.rng);
    add_io_flags(s_slice, slice_o.io);

    PolihamuOpts poli_o;
    CLI::App* s_poli = app.add_subcommand(
        "polihamu", "Slice dimension of the two-generator pair twisted at level "
                    "k, against its closed formula");
    s_poli->add_option("--p", poli_o.p, "Prime label-group order")
        ->capture_default_str();
    s_poli->add_option("--n", poli_o.n, "Tree depth")->capture_default_str();
    s_poli->add_option("--k", poli_o.k, "Twisting level")->capture_default_str();
    s_poli->add_option("--max-depth", poli_o.max_depth, "Depth budget")
        ->capture_default_str();
    add_io_flags(s_poli, poli_o.io);

    WordsOpts words_o;
    CLI::App* s_words = app.add_subcommand(
        "words", "Exhaustive even-cover check of a word system's fiber product "
                 "over the full depth-n group");
    s_words->add_option("--p", words_o.p, "Prime label-group order")
        ->capture_default_str();
    s_words->add_option("--depth", words_o.depth, "Tree depth of the enumerated group")
        ->capture_default_str();
    s_words->add_option("--words", words_o.words,
                        "Comma-separated words; letters a..z, capitals invert")
        ->capture_default_str();
    s_words->add_option("--budget", words_o.budget,
                        "Cap on enumerated elements and argument tuples")
        ->capture_default_str();
    add_io_flags(s_words, words_o.io);

    CensusOpts census_o;
    CLI::App* s_census = app.add_subcommand(
        "kernel-census", "Count of generator tuples a word collapses to the "
                         "identity: exhaustive or sampled");
    s_census->add_option("--p", census_o.p, "Prime label-group order")
        ->capture_default_str();
    s_census->add_option("--depth", census_o.depth, "Tree depth")
        ->capture_default_str();
    s_census->add_option("--word", census_o.word,
                         "Word; letters a..z, capitals invert")
        ->capture_default_str();
    s_census->add_option("--letters", census_o.letters,
                         "Tuple arity (default: largest letter used)");
    s_census->add_option("--tuple-budget", census_o.tuple_budget,
                         "Exhaustive enumeration cap before sampling kicks in")
        ->capture_default_str();
    s_census->add_option("--mc-samples", census_o.mc_samples,
                         "Sample count in Monte Carlo mode")
        ->capture_default_str();
    add_rng_flags(s_census, census_o.rng);
    add_io_flags(s_census, census_o.io);

    KappaOpts kappa_o;
    CLI::App* s_kappa = app.add_subcommand(
        "kappa", "Minimal twisting power: smallest p-power of the third "
                 "generator admitting a stabilizer word with nonzero exponent");
    s_kappa->add_option("--p", kappa_o.p, "Prime label-group order")
        ->capture_default_str();
    s_kappa->add_option("--level", kappa_o.level, "Acted-on tree level")
        ->capture_default_str();
    s_kappa->add_option("--samples", kappa_o.samples,
                        "Uniform generator triples to draw")
        ->capture_default_str();
    CLI::Option* kappa_vertex = s_kappa->add_option(
        "--vertex", kappa_o.vertex,
        "Fix this basepoint instead of scanning the level for the minimum");
    add_rng_flags(s_kappa, kappa_o.rng);
    add_io_flags(s_kappa, kappa_o.io);

    SidkiOpts sidki_o;
    CLI::App* s_sidki = app.add_subcommand(
        "sidki", "Search for short relations between the +1 machine and uniform "
                 "random partners");
    s_sidki->add_option("--p", sidki_o.p, "Prime label-group order")
        ->capture_default_str();
    s_sidki->add_option("--depth", sidki_o.depth, "Tree depth")
        ->capture_default_str();
    s_sidki->add_option("--max-length", sidki_o.max_length,
                        "Largest reduced word length tried")
        ->capture_default_str();
    s_sidki->add_option("--partners", sidki_o.partners, "Sampled partners")
        ->capture_default_str();
    add_rng_flags(s_sidki, sidki_o.rng);
    add_io_flags(s_sidki, sidki_o.io);

    ZooOpts zoo_o;
    CLI::App* s_zoo = app.add_subcommand(
        "zoo", "Catalog of named elements, groups, and subtree specs; portraits "
               "and subtree measures");
    s_zoo->add_flag("--list", zoo_o.list, "List the catalog");
    s_zoo->add_option("--name", zoo_o.name, "Named element to print");
    s_zoo->add_option("--subtree", zoo_o.subtree, "Named subtree spec to measure");
    s_zoo->add_option("--p", zoo_o.p, "Prime label-group order")
        ->capture_default_str();
    s_zoo->add_option("--degree", zoo_o.degree, "Tree degree for subtree specs")
        ->capture_default_str();
    s_zoo->add_option("--depth", zoo_o.depth, "Truncation depth")
        ->capture_default_str();
    add_io_flags(s_zoo, zoo_o.io);

    SolvableOpts solv_o;
    CLI::App* s_solv = app.add_subcommand(
        "solvable-check", "Derived length and density partial sum of a named "
                          "group against the solvable bound");
    s_solv->add_option("--p", solv_o.p, "Prime label-group order")
        ->capture_default_str();
    s_solv->add_option("--depth", solv_o.depth, "Depth of the density sum")
        ->capture_default_str();
    s_solv->add_option("--name", solv_o.name,
                       "Named group: adding-machine, grigorchuk, full")
        ->capture_default_str();
    s_solv->add_option("--m", solv_o.m, "Levels of the embedded full group")
        ->capture_default_str();
    add_io_flags(s_solv, solv_o.io);

    AbelianOpts abel_o;
    CLI::App* s_abel = app.add_subcommand(
        "abelian-check", "Order bound for cyclic subgroups by the one-child "
                         "nodes of their orbit trees");
    s_abel->add_option("--p", abel_o.p, "Prime label-group order")
        ->capture_default_str();
    s_abel->add_option("--depth", abel_o.depth, "Tree depth")->capture_default_str();
    s_abel->add_option("--samples", abel_o.samples, "Sampled generators")
        ->capture_default_str();
    add_rng_flags(s_abel, abel_o.rng);
    add_io_flags(s_abel, abel_o.io);

    BatchOpts batch_o;
    CLI::App* s_batch = app.add_subcommand(
        "batch", "Replay a JSON-lines file of invocations into a directory of "
                 "reports plus a manifest");
    s_batch->add_option("--file", batch_o.file, "JSON-lines batch file")
        ->required();
    s_batch->add_option("--out-dir", batch_o.out_dir, "Report directory")
        ->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e, out, err);
        app.exit(e, out, err);
        return 64;
    }

    dim_o.j_given = s_dim->count("--j") > 0;
    slice_o.j_given = s_slice->count("--j") > 0;
    kappa_o.vertex_given = kappa_vertex->count() > 0;

    try {
        if (s_alpha->parsed()) {
            emit_report(cmd_alpha(alpha_o), "alpha", alpha_o.io, out, err);
        } else if (s_turan->parsed()) {
            emit_report(cmd_turan(turan_o), "turan", turan_o.io, out, err);
        } else if (s_surv->parsed()) {
            emit_report(cmd_survival(surv_o), "survival", surv_o.io, out, err);
        } else if (s_trans->parsed()) {
            emit_report(cmd_transitivity(trans_o), "transitivity", trans_o.io, out,
                        err);
        } else if (s_conj->parsed()) {
            emit_report(cmd_conjugacy(conj_o), "conjugacy", conj_o.io, out, err);
        } else if (s_dim->parsed()) {
            std::optional<std::string> custom_csv;
            ExperimentReport rep = cmd_dimension(dim_o, custom_csv);
            emit_report(std::move(rep), "dimension", dim_o.io, out, err,
                        custom_csv ? &*custom_csv : nullptr);
        } else if (s_slice->parsed()) {
            emit_report(cmd_slice(slice_o), "slice", slice_o.io, out, err);
        } else if (s_poli->parsed()) {
            emit_report(cmd_polihamu(poli_o), "polihamu", poli_o.io, out, err);
        } else if (s_words->parsed()) {
            emit_report(cmd_words(words_o), "words", words_o.io, out, err);
        } else if (s_census->parsed()) {
            emit_report(cmd_census(census_o), "kernel-census", census_o.io, out,
                        err);
        } else if (s_kappa->parsed()) {
            emit_report(cmd_kappa(kappa_o), "kappa", kappa_o.io, out, err);
        } else if (s_sidki->parsed()) {
            emit_report(cmd_sidki(sidki_o), "sidki", sidki_o.io, out, err);
        } else if (s_zoo->parsed()) {
            emit_report(cmd_zoo(zoo_o), "zoo", zoo_o.io, out, err);
        } else if (s_solv->parsed()) {
            emit_report(cmd_solvable(solv_o), "solvable-check", solv_o.io, out,
                        err);
        } else if (s_abel->parsed()) {
            emit_report(cmd_abelian(abel_o), "abelian-check", abel_o.io, out, err);
        } else if (s_batch->parsed()) {
            return cmd_batch(batch_o, out, err);
        }
        return 0;
    } catch (const domain_error& e) {
        err << "precondition error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        err << "resource budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace treegroup
