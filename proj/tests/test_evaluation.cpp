#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "hgp/dependency.hpp"
#include "hgp/detector.hpp"
#include "hgp/error.hpp"
#include "hgp/evaluation.hpp"
#include "hgp/parser.hpp"

using namespace hgp;

namespace {

Occurrence occ(std::string id, std::string unit, TimeMs s, TimeMs e) {
    Occurrence o;
    o.id = std::move(id);
    o.unit = std::move(unit);
    o.attrs.interval = Interval(s, e);
    return o;
}

GroundTruthPhrase three_signs() {
    GroundTruthPhrase t;
    t.occurrences.span = {0, 300};
    t.occurrences.occurrences = {occ("o0", "term:A", 0, 90), occ("o1", "term:X", 100, 190),
                                 occ("o2", "term:B", 200, 290)};
    t.edges = {{"o1", "o0", "dep[-1]"}, {"o1", "o2", "dep[+1]"}};
    return t;
}

// One inferred rule node per occurrence with a "head" edge to its leaf.
SolutionGraph from_edges(const GroundTruthPhrase& t, const std::vector<TruthEdge>& edges) {
    SolutionGraph g;
    for (const auto& o : t.occurrences.occurrences) {
        g.nodes.push_back({"r" + o.id, "rule", o.attrs.interval, Provenance::Inferred, "", {}});
        g.nodes.push_back({"l" + o.id, o.unit, o.attrs.interval, Provenance::Detected, o.id, {}});
        g.edges.push_back({"r" + o.id, "head", "l" + o.id});
    }
    for (const auto& e : edges) g.edges.push_back({"r" + e.head_id, e.role, "r" + e.dep_id});
    g.roots = {"ro1"};
    g.score = g.nodes.size();
    return g;
}

MatchReport report(std::string id, std::size_t size, std::size_t n, std::size_t matching) {
    MatchReport r;
    r.phrase_id = std::move(id);
    r.size = size;
    r.n_solutions = n;
    r.n_matching = matching;
    r.ground_truth_found = matching > 0;
    r.n_false_positives = n - matching;
    return r;
}

}  // namespace

TEST_CASE("identity and strict edge equality") {
    const auto t = three_signs();
    CHECK(match_solution(from_edges(t, t.edges), t));
    CHECK_FALSE(match_solution(from_edges(t, {t.edges[0]}), t));
    CHECK_FALSE(match_solution(from_edges(t, {{"o1", "o0", "dep[-1]"}, {"o1", "o2", "dep[+2]"}}), t));
    SolutionGraph partial = from_edges(t, {t.edges[0]});
    partial.nodes.erase(std::remove_if(partial.nodes.begin(), partial.nodes.end(),
                                       [](const SolutionNode& n) { return n.occurrence == "o2"; }),
                        partial.nodes.end());
    CHECK_FALSE(match_solution(partial, t));
}

TEST_CASE("unknown occurrence ids are a contract violation") {
    const auto t = three_signs();
    SolutionGraph g = from_edges(t, t.edges);
    g.nodes.push_back({"lz", "term:A", {0, 1}, Provenance::Detected, "zz", {}});
    CHECK_THROWS_AS(match_solution(g, t), ContractViolation);
}

TEST_CASE("rule identity is not part of the criterion") {
    DepGrammar g;
    g.categories = {{"X", Channel::MG}, {"A", Channel::MG}};
    g.rules["X"] = {DepRule{{}, {"A"}}, DepRule{{}, {"A"}}};
    const Parser p(compile_dep_grammar(g));
    GroundTruthPhrase t;
    t.occurrences.span = {0, 200};
    t.occurrences.occurrences = {occ("o0", "term:X", 0, 90), occ("o1", "term:A", 100, 190)};
    t.edges = {{"o0", "o1", "dep[+1]"}};
    ParseRequest req;
    req.roots = root_specs(p, {"cat:X"});
    req.detector = annotation_detector(t.occurrences, p.model());
    req.span = t.occurrences.span;
    const auto res = p.parse(req);
    REQUIRE(res.solutions.size() == 2);
    CHECK(canonical_form(res.solutions[0]) != canonical_form(res.solutions[1]));
    CHECK(match_solution(res.solutions[0], t));
    CHECK(match_solution(res.solutions[1], t));
    const auto r = score_phrase("p", res.solutions, t);
    CHECK(r.n_matching == 2);
    CHECK(r.n_false_positives == 0);
}

TEST_CASE("counting per phrase") {
    const auto t = three_signs();
    SolutionGraph truth = from_edges(t, t.edges);
    truth.score = 1;
    const auto other = from_edges(t, {t.edges[0]});
    const auto r = score_phrase("p", {other, truth, other}, t);
    CHECK(r.ground_truth_found);
    CHECK(r.n_false_positives == 2);
    CHECK(r.n_solutions == 3);
    REQUIRE(r.rank_of_truth.has_value());
    CHECK(*r.rank_of_truth == 3);

    const auto none = score_phrase("q", {}, t);
    CHECK_FALSE(none.ground_truth_found);
    CHECK(none.n_false_positives == 0);
    CHECK_FALSE(none.rank_of_truth.has_value());
}

TEST_CASE("summaries") {
    std::vector<MatchReport> rs{report("a", 1, 1, 1), report("b", 1, 3, 1), report("c", 2, 0, 0),
                                report("d", 5, 4, 0), report("e", 5, 2, 2)};
    const auto s = summarize(rs);
    REQUIRE(s.buckets.size() == 3);
    CHECK(s.n_phrases() == rs.size());
    CHECK(s.buckets[0].label() == "1");
    CHECK(s.buckets[0].recall() == doctest::Approx(1.0));
    CHECK(s.buckets[0].precision() == doctest::Approx(0.5));
    CHECK(s.buckets[0].mean_fp() == doctest::Approx(1.0));
    CHECK(s.buckets[1].recall() == doctest::Approx(0.0));
    CHECK(s.buckets[1].precision() == doctest::Approx(0.0));
    CHECK(s.buckets[2].recall() == doctest::Approx(0.5));
    CHECK(s.buckets[2].precision() == doctest::Approx(2.0 / 6.0));

    std::mt19937_64 rng(1);
    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(summary_to_csv(summarize(shuffled)) == summary_to_csv(s));

    const auto wide = summarize(rs, 4);
    REQUIRE(wide.buckets.size() == 2);
    CHECK(wide.buckets[0].label() == "1-4");
    CHECK(wide.buckets[1].label() == "5-8");

    CHECK(summary_to_csv(s).rfind("size_bucket,n_phrases,recall,precision,mean_fp\n1,2,1.000000,0.500000,1.000000\n", 0) == 0);
}

TEST_CASE("precision reaches one only when every solution matches") {
    for (std::size_t n = 1; n < 5; ++n) {
        for (std::size_t k = 0; k <= n; ++k) {
            const auto s = summarize({report("x", 3, n, k)});
            CHECK(s.buckets[0].precision() <= 1.0);
            CHECK((s.buckets[0].precision() == 1.0) == (k == n));
        }
    }
}
