#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <map>

#include "hgp/dependency.hpp"
#include "hgp/detector.hpp"
#include "hgp/error.hpp"
#include "hgp/model_io.hpp"
#include "hgp/synth.hpp"

using namespace hgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hgp_test_synth_" + name);
    fs::remove_all(p);
    return p;
}

std::map<std::string, std::string> tree_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& f : fs::recursive_directory_iterator(dir)) {
        if (f.is_regular_file()) out[fs::relative(f.path(), dir).string()] = read_text_file(f.path());
    }
    return out;
}

std::string category_of(const DepGrammar& g, const std::string& unit) {
    for (const auto& c : g.categories) {
        if (g.terminal(c.name) == unit) return c.name;
    }
    return "";
}

}  // namespace

TEST_CASE("grammar shape") {
    GenParams p;
    p.seed = 5;
    const DepGrammar g = generate_grammar(p);
    CHECK(g.categories.size() == 20);
    for (const auto& c : g.categories) {
        const auto& rules = g.rules.at(c.name);
        CHECK(rules.size() >= 3);
        CHECK(rules.size() <= 4);
        for (const auto& r : rules) {
            if (c.channel == Channel::NMG) {
                CHECK(r.left.empty());
                CHECK(r.right.size() == 1);
            } else {
                CHECK(r.size() <= 4);
            }
        }
    }
    CHECK(dep_grammar_to_string(generate_grammar(p)) == dep_grammar_to_string(g));
    p.seed = 6;
    CHECK(dep_grammar_to_string(generate_grammar(p)) != dep_grammar_to_string(g));
}

TEST_CASE("trivial grammar") {
    GenParams p;
    p.n_categories = 1;
    p.rules_per_category = {1, 1};
    p.mg_dependents = {0, 0};
    const DepGrammar g = generate_grammar(p);
    const Model m = compile_dep_grammar(g);
    CHECK(m.alternatives.size() == 1);
    CHECK(m.patterns.size() == 1);
    CHECK(m.detectable.size() == 1);
}

TEST_CASE("smallest phrase") {
    DepGrammar g;
    g.categories = {{"X", Channel::MG}};
    g.rules["X"] = {DepRule{}};
    const auto t = generate_phrase(g, "X", GenParams{}, 1);
    CHECK(t.size() == 1);
    CHECK(t.edges.empty());
}

TEST_CASE("X(A,*,B) lays out A, X, B in order") {
    DepGrammar g;
    g.categories = {{"X", Channel::MG}, {"A", Channel::MG}, {"B", Channel::MG}};
    g.rules["X"] = {DepRule{{"A"}, {"B"}}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto t = generate_phrase(g, "X", GenParams{}, seed);
        REQUIRE(t.size() == 3);
        const auto& o = t.occurrences.occurrences;
        CHECK(o[0].unit == "term:A");
        CHECK(o[1].unit == "term:X");
        CHECK(o[2].unit == "term:B");
        CHECK(no_overlap_ordered().holds(o[0].attrs.interval, o[1].attrs.interval));
        CHECK(no_overlap_ordered().holds(o[1].attrs.interval, o[2].attrs.interval));
        CHECK(t.edges.size() == 2);
    }
}

TEST_CASE("non-terminating category") {
    DepGrammar g;
    g.categories = {{"X", Channel::MG}};
    g.rules["X"] = {DepRule{{}, {"X"}}};
    try {
        generate_phrase(g, "X", GenParams{}, 1);
        FAIL("expected a generation error");
    } catch (const GenerationError& e) {
        CHECK(std::string(e.what()).find("X") != std::string::npos);
    }
}

TEST_CASE("phrase invariants over many grammars") {
    GenParams p;
    p.phrase_size = {1, 15};
    int phrases = 0;
    for (std::uint64_t seed = 1; phrases < 150; ++seed) {
        p.seed = seed;
        const DepGrammar g = generate_grammar(p);
        GroundTruthPhrase t;
        try {
            t = generate_phrase(g, p, derive_seed(seed, 1));
        } catch (const GenerationError&) {
            continue;
        }
        ++phrases;
        const auto& occs = t.occurrences.occurrences;
        CHECK(t.size() >= 1);
        CHECK(t.size() <= 15);
        CHECK(t.edges.size() == t.size() - 1);
        std::map<std::string, const Occurrence*> by_id;
        for (const auto& o : occs) by_id[o.id] = &o;
        auto is_mg = [&](const Occurrence& o) {
            return g.category(category_of(g, o.unit))->channel == Channel::MG;
        };
        for (std::size_t i = 0; i < occs.size(); ++i) {
            for (std::size_t j = i + 1; j < occs.size(); ++j) {
                if (is_mg(occs[i]) && is_mg(occs[j])) {
                    CHECK_FALSE(shares_time().holds(occs[i].attrs.interval, occs[j].attrs.interval));
                }
            }
        }
        std::map<std::string, std::vector<const TruthEdge*>> deps;
        for (const auto& e : t.edges) deps[e.head_id].push_back(&e);
        for (const auto& e : t.edges) {
            const Occurrence& h = *by_id.at(e.head_id);
            const Occurrence& d = *by_id.at(e.dep_id);
            if (!is_mg(d) || !is_mg(h)) CHECK(shares_time().holds(d.attrs.interval, h.attrs.interval));
        }
        // Each head's dependents spell out one of its category's rules.
        for (const auto& o : occs) {
            std::map<std::string, std::string> got;
            for (const auto* e : deps[o.id]) got[e->role] = category_of(g, by_id.at(e->dep_id)->unit);
            bool licensed = false;
            for (const auto& r : g.rules_of(category_of(g, o.unit))) {
                std::map<std::string, std::string> want;
                const int nl = static_cast<int>(r.left.size());
                for (int k = 0; k < nl; ++k) want[dep_role(k - nl)] = r.left[k];
                for (std::size_t k = 0; k < r.right.size(); ++k) want[dep_role(static_cast<int>(k) + 1)] = r.right[k];
                licensed |= want == got;
            }
            CHECK(licensed);
        }
    }
}

TEST_CASE("uniform size mode hits the drawn size") {
    GenParams p;
    p.size_mode = SizeMode::Uniform;
    p.phrase_size = {4, 4};
    p.seed = 3;
    int ok = 0;
    for (std::uint64_t s = 1; ok < 10; ++s) {
        p.seed = s;
        std::size_t size = 0;
        try {
            size = generate_phrase(generate_grammar(p), p, s).size();
        } catch (const GenerationError&) {
            continue;
        }
        CHECK(size == 4);
        ++ok;
    }
}

TEST_CASE("parameter validation") {
    GenParams p;
    p.mg_fraction = 1.0;
    CHECK_THROWS_AS(generate_grammar(p), GenerationError);
    p = GenParams{};
    p.rules_per_category = {4, 3};
    CHECK_THROWS_AS(generate_grammar(p), GenerationError);
    p = GenParams{};
    p.nmg_dependents = 2;
    CHECK_THROWS_AS(generate_grammar(p), GenerationError);
    CHECK(params_from_json(params_to_json(GenParams{})) == GenParams{});
}

TEST_CASE("corpus generation is reproducible") {
    GenParams p;
    p.seed = 11;
    p.phrase_size = {2, 8};
    const auto a = scratch("a"), b = scratch("b"), c = scratch("c");
    const auto m = generate_corpus(p, 6, 2, a, 2);
    generate_corpus(p, 6, 2, b, 1);
    CHECK(m.entries.size() == 12);
    CHECK(tree_files(a) == tree_files(b));

    // Regenerate every file from the manifest alone.
    const auto back = load_manifest(a / "manifest.json");
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
        const auto& e = back.entries[i];
        GenParams gp = back.params;
        gp.seed = e.seed;
        const DepGrammar g = generate_grammar(gp);
        CHECK(dep_grammar_to_string(g) == read_text_file(a / e.grammar_path));
        auto t = generate_phrase(g, gp, derive_seed(e.seed, i % 2 + 1));
        CHECK(annotation_to_string(t.occurrences) == read_text_file(a / e.phrase_path));
        CHECK(t.size() == e.size);
    }

    const auto smoke = generate_corpus(GenParams{}, 1, 1, c);
    CHECK(smoke.entries.size() == 1);
    CHECK(fs::exists(c / smoke.entries[0].truth_path));
    const auto truth = load_truth(c / smoke.entries[0].truth_path, c / smoke.entries[0].phrase_path);
    CHECK(truth.size() == smoke.entries[0].size);
}
