#include "hgp/synth.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <omp.h>

#include "hgp/detector.hpp"
#include "hgp/error.hpp"
#include "hgp/model_io.hpp"

namespace hgp {

using nlohmann::json;

namespace {

constexpr std::size_t kInfHeight = std::numeric_limits<std::size_t>::max();

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(rng());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

std::int64_t uniform(std::mt19937_64& rng, const IntRange& r) { return uniform(rng, r.lo, r.hi); }

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(n) - 1));
}

void check_range(const IntRange& r, const char* name, std::int64_t min_lo) {
    if (r.lo > r.hi) throw GenerationError(std::string(name) + ": empty range");
    if (r.lo < min_lo) {
        throw GenerationError(std::string(name) + ": lower bound below " + std::to_string(min_lo));
    }
}

/// Shortest derivation height of each category, kInfHeight when it cannot
/// terminate.
std::map<std::string, std::size_t> category_heights(const DepGrammar& g) {
    std::map<std::string, std::size_t> h;
    for (const auto& c : g.categories) h[c.name] = kInfHeight;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& c : g.categories) {
            for (const auto& r : g.rules_of(c.name)) {
                std::size_t v = 1;
                for (const auto* side : {&r.left, &r.right}) {
                    for (const auto& d : *side) {
                        v = h.at(d) == kInfHeight ? kInfHeight : std::max(v, h.at(d) + 1);
                    }
                    if (v == kInfHeight) break;
                }
                if (v < h[c.name]) {
                    h[c.name] = v;
                    changed = true;
                }
            }
        }
    }
    return h;
}

struct DNode {
    std::string category;
    bool mg = true;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    Interval interval;
};

class Deriver {
public:
    Deriver(const DepGrammar& g, const GenParams& p, std::mt19937_64& rng)
        : g_(g), p_(p), rng_(rng), heights_(category_heights(g)) {}

    std::size_t height(const std::string& c) const { return heights_.at(c); }

    /// Samples a derivation; false when it grows past `cap` nodes.
    bool derive(const std::string& root, std::size_t cap, std::vector<DNode>& out) {
        out.clear();
        return expand(root, 0, cap, out);
    }

private:
    std::size_t rule_height(const DepRule& r) const {
        std::size_t v = 1;
        for (const auto* side : {&r.left, &r.right}) {
            for (const auto& d : *side) {
                if (heights_.at(d) == kInfHeight) return kInfHeight;
                v = std::max(v, heights_.at(d) + 1);
            }
        }
        return v;
    }

    bool expand(const std::string& cat, std::size_t depth, std::size_t cap, std::vector<DNode>& out) {
        if (out.size() >= cap) return false;
        const auto rules = g_.rules_of(cat);
        std::vector<std::size_t> allowed;
        if (depth >= p_.max_depth) {
            for (std::size_t k = 0; k < rules.size(); ++k) {
                if (rules[k].size() == 0) allowed.push_back(k);
            }
            if (allowed.empty()) {
                std::size_t best = kInfHeight;
                for (const auto& r : rules) best = std::min(best, rule_height(r));
                for (std::size_t k = 0; k < rules.size(); ++k) {
                    if (rule_height(rules[k]) == best) allowed.push_back(k);
                }
            }
        } else {
            for (std::size_t k = 0; k < rules.size(); ++k) {
                if (rule_height(rules[k]) != kInfHeight) allowed.push_back(k);
            }
        }
        const DepRule& rule = rules[allowed[pick(rng_, allowed.size())]];
        const std::size_t self = out.size();
        out.push_back({cat, g_.category(cat)->channel == Channel::MG, {}, {}, Interval{}});
        for (const auto& d : rule.left) {
            const std::size_t child = out.size();
            if (!expand(d, depth + 1, cap, out)) return false;
            out[self].left.push_back(child);
        }
        for (const auto& d : rule.right) {
            const std::size_t child = out.size();
            if (!expand(d, depth + 1, cap, out)) return false;
            out[self].right.push_back(child);
        }
        return true;
    }

    const DepGrammar& g_;
    const GenParams& p_;
    std::mt19937_64& rng_;
    std::map<std::string, std::size_t> heights_;
};

void sequence(const std::vector<DNode>& nodes, std::size_t i, std::vector<std::size_t>& seq) {
    const DNode& n = nodes[i];
    if (!n.mg) {
        for (auto d : n.right) sequence(nodes, d, seq);
        return;
    }
    for (auto d : n.left) sequence(nodes, d, seq);
    seq.push_back(i);
    for (auto d : n.right) sequence(nodes, d, seq);
}

void layout(std::vector<DNode>& nodes, const GenParams& p, std::mt19937_64& rng) {
    std::vector<std::size_t> seq;
    sequence(nodes, 0, seq);
    TimeMs t = 0;
    for (auto i : seq) {
        const TimeMs start = t + uniform(rng, p.gap);
        const TimeMs end = start + uniform(rng, p.mg_duration);
        nodes[i].interval = Interval(start, end);
        t = end;
    }
    // Each NMG chain hangs off an MG governor and ends at an MG dependent.
    for (std::size_t gi = 0; gi < nodes.size(); ++gi) {
        if (!nodes[gi].mg) continue;
        for (const auto* side : {&nodes[gi].left, &nodes[gi].right}) {
            for (auto d : *side) {
                if (nodes[d].mg) continue;
                std::vector<std::size_t> chain;
                std::size_t y = d;
                while (!nodes[y].mg) {
                    chain.push_back(y);
                    y = nodes[y].right.front();
                }
                const Interval gov = nodes[gi].interval;
                const Interval dep = nodes[y].interval;
                TimeMs start = uniform(rng, gov.start(), gov.end() - 1);
                TimeMs end = start + uniform(rng, p.nmg_duration);
                if (dep.start() >= gov.end()) {
                    if (end <= dep.start()) end = uniform(rng, dep.start() + 1, dep.end());
                } else {
                    start = uniform(rng, dep.start(), dep.end() - 1);
                }
                for (auto c : chain) nodes[c].interval = Interval(start, end);
            }
        }
    }
}

GroundTruthPhrase to_phrase(const DepGrammar& g, const std::vector<DNode>& nodes) {
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return nodes[a].interval < nodes[b].interval; });
    std::vector<std::string> ids(nodes.size());
    GroundTruthPhrase t;
    t.root_category = nodes[0].category;
    std::vector<Interval> all;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const DNode& n = nodes[order[k]];
        ids[order[k]] = "o" + std::to_string(k);
        Occurrence o;
        o.id = ids[order[k]];
        o.unit = g.terminal(n.category);
        o.attrs.interval = n.interval;
        o.source = o.id;
        t.occurrences.occurrences.push_back(std::move(o));
        all.push_back(n.interval);
    }
    t.occurrences.span = infer_parent_interval(all);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const int n_left = static_cast<int>(nodes[i].left.size());
        for (int k = 0; k < n_left; ++k) {
            t.edges.push_back({ids[i], ids[nodes[i].left[k]], dep_role(k - n_left)});
        }
        for (std::size_t k = 0; k < nodes[i].right.size(); ++k) {
            t.edges.push_back({ids[i], ids[nodes[i].right[k]], dep_role(static_cast<int>(k) + 1)});
        }
    }
    std::sort(t.edges.begin(), t.edges.end());
    return t;
}

json range_json(const IntRange& r) { return json::array({r.lo, r.hi}); }

IntRange range_from(const json& j, const char* key, IntRange dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw LoadError(std::string(key) + ": expected [lo, hi]");
    return {v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
}

}  // namespace

void validate_params(const GenParams& p) {
    if (p.n_categories == 0) throw GenerationError("n_categories: must be positive");
    check_range(p.rules_per_category, "rules_per_category", 1);
    check_range(p.mg_dependents, "mg_dependents", 0);
    if (p.nmg_dependents != 1) {
        throw GenerationError("nmg_dependents: non-manual rules take exactly one dependent");
    }
    if (!(p.mg_fraction > 0.0 && p.mg_fraction < 1.0)) {
        throw GenerationError("mg_fraction: must lie strictly between 0 and 1");
    }
    check_range(p.mg_duration, "mg_duration", 1);
    check_range(p.gap, "gap", 0);
    check_range(p.nmg_duration, "nmg_duration", 1);
    check_range(p.phrase_size, "phrase_size", 1);
    if (p.max_attempts == 0) throw GenerationError("max_attempts: must be positive");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

DepGrammar generate_grammar(const GenParams& params) {
    validate_params(params);
    std::mt19937_64 rng(params.seed);
    DepGrammar g;
    for (std::size_t i = 0; i < params.n_categories; ++i) {
        const bool mg = unit_real(rng) < params.mg_fraction;
        g.categories.push_back({"C" + std::to_string(i), mg ? Channel::MG : Channel::NMG});
    }
    if (std::none_of(g.categories.begin(), g.categories.end(),
                     [](const Category& c) { return c.channel == Channel::MG; })) {
        g.categories.front().channel = Channel::MG;
    }
    auto any_category = [&] { return g.categories[pick(rng, g.categories.size())].name; };
    for (const auto& c : g.categories) {
        auto& rules = g.rules[c.name];
        const auto n_rules = uniform(rng, params.rules_per_category);
        for (std::int64_t k = 0; k < n_rules; ++k) {
            DepRule r;
            if (c.channel == Channel::NMG) {
                r.right.push_back(any_category());
            } else {
                const auto n = uniform(rng, params.mg_dependents);
                const auto star = uniform(rng, 0, n);
                for (std::int64_t d = 0; d < n; ++d) (d < star ? r.left : r.right).push_back(any_category());
            }
            rules.push_back(std::move(r));
        }
    }
    return g;
}

GroundTruthPhrase generate_phrase(const DepGrammar& g, const std::string& root_category,
                                  const GenParams& params, std::uint64_t seed) {
    validate_params(params);
    validate_dep_grammar(g);
    const Category* root = g.category(root_category);
    if (!root) throw GenerationError("unknown root category " + root_category);
    if (root->channel != Channel::MG) {
        throw GenerationError("root category " + root_category + " is not manual");
    }
    std::mt19937_64 rng(seed);
    Deriver deriver(g, params, rng);
    if (deriver.height(root_category) == kInfHeight) {
        throw GenerationError("category " + root_category + " has no terminating derivation");
    }
    IntRange want = params.phrase_size;
    if (params.size_mode == SizeMode::Uniform) {
        const auto target = uniform(rng, want);
        want = {target, target};
    }
    std::vector<DNode> nodes;
    for (std::size_t attempt = 0; attempt < params.max_attempts; ++attempt) {
        if (!deriver.derive(root_category, static_cast<std::size_t>(want.hi) + 1, nodes)) continue;
        const auto n = static_cast<std::int64_t>(nodes.size());
        if (n < want.lo || n > want.hi) continue;
        layout(nodes, params, rng);
        return to_phrase(g, nodes);
    }
    throw GenerationError("no phrase of size " + std::to_string(want.lo) + ".." +
                          std::to_string(want.hi) + " rooted at category " + root_category +
                          " after " + std::to_string(params.max_attempts) + " attempts");
}

GroundTruthPhrase generate_phrase(const DepGrammar& g, const GenParams& params, std::uint64_t seed) {
    const auto heights = category_heights(g);
    std::vector<std::string> roots;
    for (const auto& c : g.categories) {
        if (c.channel == Channel::MG && heights.at(c.name) != kInfHeight) roots.push_back(c.name);
    }
    if (roots.empty()) throw GenerationError("no manual category with a terminating derivation");
    std::mt19937_64 rng(derive_seed(seed, 0));
    return generate_phrase(g, roots[pick(rng, roots.size())], params, derive_seed(seed, 1));
}

json truth_to_json(const GroundTruthPhrase& t) {
    json edges = json::array();
    for (const auto& e : t.edges) edges.push_back({{"head_id", e.head_id}, {"dep_id", e.dep_id}, {"role", e.role}});
    json occs = json::array();
    for (const auto& o : t.occurrences.occurrences) occs.push_back(o.id);
    return json{{"grammar_id", t.grammar_id},
                {"root_category", t.root_category},
                {"size", t.size()},
                {"occurrences", occs},
                {"edges", edges}};
}

GroundTruthPhrase truth_from_json(const json& j) {
    GroundTruthPhrase t;
    try {
        t.grammar_id = j.value("grammar_id", "");
        t.root_category = j.value("root_category", "");
        for (const auto& e : j.at("edges")) {
            t.edges.push_back({e.at("head_id").get<std::string>(), e.at("dep_id").get<std::string>(),
                               e.at("role").get<std::string>()});
        }
        if (j.contains("occurrences")) {
            for (const auto& id : j.at("occurrences")) {
                Occurrence o;
                o.id = id.get<std::string>();
                t.occurrences.occurrences.push_back(std::move(o));
            }
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("truth: ") + e.what());
    }
    std::sort(t.edges.begin(), t.edges.end());
    return t;
}

GroundTruthPhrase load_truth(const std::filesystem::path& truth, const std::filesystem::path& phrase) {
    GroundTruthPhrase t;
    try {
        t = truth_from_json(read_json_file(truth));
    } catch (const LoadError& e) {
        throw LoadError(truth.string() + ": " + e.what());
    }
    t.occurrences = load_annotation(phrase);
    return t;
}

void save_truth(const GroundTruthPhrase& t, const std::filesystem::path& path) {
    write_text_file(path, truth_to_json(t).dump(2) + "\n");
}

json params_to_json(const GenParams& p) {
    return json{{"n_categories", p.n_categories},
                {"rules_per_category", range_json(p.rules_per_category)},
                {"mg_dependents", range_json(p.mg_dependents)},
                {"nmg_dependents", p.nmg_dependents},
                {"mg_fraction", p.mg_fraction},
                {"max_depth", p.max_depth},
                {"mg_duration", range_json(p.mg_duration)},
                {"gap", range_json(p.gap)},
                {"nmg_duration", range_json(p.nmg_duration)},
                {"phrase_size", range_json(p.phrase_size)},
                {"size_mode", p.size_mode == SizeMode::Uniform ? "uniform" : "natural"},
                {"max_attempts", p.max_attempts},
                {"seed", p.seed}};
}

GenParams params_from_json(const json& j) {
    GenParams p;
    try {
        p.n_categories = j.value("n_categories", p.n_categories);
        p.rules_per_category = range_from(j, "rules_per_category", p.rules_per_category);
        p.mg_dependents = range_from(j, "mg_dependents", p.mg_dependents);
        p.nmg_dependents = j.value("nmg_dependents", p.nmg_dependents);
        p.mg_fraction = j.value("mg_fraction", p.mg_fraction);
        p.max_depth = j.value("max_depth", p.max_depth);
        p.mg_duration = range_from(j, "mg_duration", p.mg_duration);
        p.gap = range_from(j, "gap", p.gap);
        p.nmg_duration = range_from(j, "nmg_duration", p.nmg_duration);
        p.phrase_size = range_from(j, "phrase_size", p.phrase_size);
        const std::string mode = j.value("size_mode", "natural");
        if (mode == "uniform") {
            p.size_mode = SizeMode::Uniform;
        } else if (mode == "natural") {
            p.size_mode = SizeMode::Natural;
        } else {
            throw LoadError("size_mode: expected \"natural\" or \"uniform\"");
        }
        p.max_attempts = j.value("max_attempts", p.max_attempts);
        p.seed = j.value("seed", p.seed);
    } catch (const json::exception& e) {
        throw LoadError(std::string("params: ") + e.what());
    }
    return p;
}

CorpusManifest generate_corpus(const GenParams& params, std::size_t n_grammars,
                               std::size_t phrases_per_grammar, const std::filesystem::path& dir,
                               int jobs) {
    validate_params(params);
    CorpusManifest m;
    m.params = params;
    m.n_grammars = n_grammars;
    m.phrases_per_grammar = phrases_per_grammar;
    m.entries.resize(n_grammars * phrases_per_grammar);

    constexpr std::size_t kGrammarRedraws = 64;
    for (const char* sub : {"grammars", "phrases", "truth"}) {
        std::error_code ec;
        std::filesystem::create_directories(dir / sub, ec);
        if (ec) throw LoadError((dir / sub).string() + ": " + ec.message());
    }
    std::vector<std::string> errors(n_grammars);
    const int threads = jobs > 0 ? jobs : 0;
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
    for (std::size_t i = 0; i < n_grammars; ++i) {
        char gid[32];
        std::snprintf(gid, sizeof gid, "g%05zu", i);
        const std::uint64_t base = derive_seed(params.seed, i);
        std::string last_error;
        bool done = false;
        for (std::size_t redraw = 0; redraw < kGrammarRedraws && !done; ++redraw) {
            GenParams gp = params;
            gp.seed = derive_seed(base, redraw);
            try {
                const DepGrammar g = generate_grammar(gp);
                std::vector<GroundTruthPhrase> phrases;
                for (std::size_t k = 0; k < phrases_per_grammar; ++k) {
                    phrases.push_back(generate_phrase(g, gp, derive_seed(gp.seed, k + 1)));
                }
                const std::string gpath = std::string("grammars/") + gid + ".json";
                save_dep_grammar(g, dir / gpath);
                for (std::size_t k = 0; k < phrases_per_grammar; ++k) {
                    const std::string pid = std::string(gid) + "_p" + std::to_string(k);
                    CorpusEntry& e = m.entries[i * phrases_per_grammar + k];
                    e.id = pid;
                    e.grammar_path = gpath;
                    e.phrase_path = "phrases/" + pid + ".json";
                    e.truth_path = "truth/" + pid + ".json";
                    e.seed = gp.seed;
                    e.size = phrases[k].size();
                    phrases[k].grammar_id = gid;
                    save_annotation(phrases[k].occurrences, dir / e.phrase_path);
                    save_truth(phrases[k], dir / e.truth_path);
                }
                done = true;
            } catch (const GenerationError& err) {
                last_error = err.what();
            } catch (const Error& err) {
                errors[i] = err.what();
                break;
            }
        }
        if (!done && errors[i].empty()) {
            errors[i] = std::string(gid) + ": no usable grammar after " +
                        std::to_string(kGrammarRedraws) + " draws; last error: " + last_error;
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw GenerationError(e);
    }
    write_text_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
    return m;
}

json manifest_to_json(const CorpusManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        entries.push_back({{"id", e.id},
                           {"grammar_path", e.grammar_path},
                           {"phrase_path", e.phrase_path},
                           {"truth_path", e.truth_path},
                           {"seed", e.seed},
                           {"size", e.size}});
    }
    return json{{"params", params_to_json(m.params)},
                {"n_grammars", m.n_grammars},
                {"phrases_per_grammar", m.phrases_per_grammar},
                {"entries", entries}};
}

CorpusManifest manifest_from_json(const json& j) {
    CorpusManifest m;
    try {
        m.params = params_from_json(j.at("params"));
        m.n_grammars = j.at("n_grammars").get<std::size_t>();
        m.phrases_per_grammar = j.at("phrases_per_grammar").get<std::size_t>();
        for (const auto& e : j.at("entries")) {
            m.entries.push_back({e.at("id").get<std::string>(), e.at("grammar_path").get<std::string>(),
                                 e.at("phrase_path").get<std::string>(),
                                 e.at("truth_path").get<std::string>(), e.at("seed").get<std::uint64_t>(),
                                 e.value("size", std::size_t{0})});
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("manifest: ") + e.what());
    }
    return m;
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    try {
        return manifest_from_json(read_json_file(path));
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

}  // namespace hgp
