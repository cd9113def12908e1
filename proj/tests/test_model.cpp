#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "hgp/error.hpp"
#include "hgp/model.hpp"
#include "hgp/model_io.hpp"

using namespace hgp;

namespace {

Model louvre() { return load_model(HGP_DATA_DIR "/louvre_model.json"); }

bool has_code(const ValidationReport& r, const std::string& code, const std::string& text = "") {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) {
        return v.code == code && v.message.find(text) != std::string::npos;
    });
}

}  // namespace

TEST_CASE("fixture model validates") {
    const auto r = validate_model(louvre());
    CHECK(r.valid());
    CHECK(r.violations.empty());
}

TEST_CASE("a unit rooting both a pattern and an alternative") {
    Model m;
    m.units = {"Q", "A", "B"};
    m.detectable = {"A", "B"};
    m.patterns.push_back({"Q", {{"a", "A"}}, {}, std::nullopt});
    m.alternatives.push_back({"Q", {"A", "B"}});
    const auto r = validate_model(m);
    CHECK_FALSE(r.valid());
    CHECK(has_code(r, "duplicate-rule-root", "duplicate rule root Q"));
}

TEST_CASE("constraint on an unknown role") {
    Model m;
    m.units = {"P", "A"};
    m.detectable = {"A"};
    m.patterns.push_back({"P", {{"a", "A"}}, {make_allen("before", "a", "xyz")}, std::nullopt});
    const auto r = validate_model(m);
    CHECK(has_code(r, "unknown-role", "unknown role xyz"));
}

TEST_CASE("other violations") {
    Model m;
    m.units = {"P", "A", "Lonely", "A"};
    m.detectable = {"A", "Ghost"};
    m.patterns.push_back({"P", {{"a", "A"}, {"a", "Nope"}}, {}, std::nullopt});
    const auto r = validate_model(m);
    CHECK(has_code(r, "duplicate-unit"));
    CHECK(has_code(r, "duplicate-role"));
    CHECK(has_code(r, "undeclared-unit", "Nope"));
    CHECK(has_code(r, "undeclared-unit", "Ghost"));
    CHECK(has_code(r, "uninstantiable", "Lonely"));
}

TEST_CASE("implicit graph of the fixture") {
    const Model m = louvre();
    const ImplicitGraph g = build_implicit_graph(m);
    CHECK(g.size() == m.units.size());
    CHECK(g.node("Locution").kind == NodeKind::Or);
    CHECK(g.node("Locution").out.size() == 4);
    CHECK(g.node("BuoyStruct").kind == NodeKind::And);
    CHECK(g.node("BuoyStruct").out.size() == 3);
    CHECK(g.node("Sign").kind == NodeKind::Leaf);
    CHECK(g.node("Sign").detectable);
    CHECK(g.node("unmodeled-loc").external);
    CHECK(g.node("Locution").out[0].label == "0");
}

TEST_CASE("atomic detectable unit and self recursion") {
    Model m;
    m.units = {"A"};
    m.detectable = {"A"};
    const auto g = build_implicit_graph(m);
    CHECK(g.size() == 1);
    CHECK(g.node("A").kind == NodeKind::Leaf);
    CHECK(g.node("A").out.empty());

    Model r;
    r.units = {"P", "A"};
    r.detectable = {"P", "A"};
    r.patterns.push_back({"P", {{"inner", "P"}, {"a", "A"}}, {}, std::nullopt});
    const auto rg = build_implicit_graph(r);
    const auto p = *rg.index_of("P");
    CHECK(std::any_of(rg.node(p).out.begin(), rg.node(p).out.end(),
                      [&](const ImplicitEdge& e) { return e.target == p && e.label == "inner"; }));
}

TEST_CASE("invalid model is refused by the graph builder") {
    Model m;
    m.units = {"Lonely"};
    CHECK_THROWS_AS(build_implicit_graph(m), ValidationError);
}

TEST_CASE("model JSON round trip") {
    const Model m = louvre();
    const std::string text = model_to_string(m);
    const Model back = model_from_json(nlohmann::json::parse(text));
    CHECK(model_to_string(back) == text);
    CHECK(validate_model(back).valid());
    const auto g1 = build_implicit_graph(m), g2 = build_implicit_graph(back);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) {
        CHECK(g1.node(i).unit == g2.node(i).unit);
        CHECK(g1.node(i).out.size() == g2.node(i).out.size());
    }
}

TEST_CASE("model load errors carry a path") {
    auto j = nlohmann::json::parse(R"({"units":["A"],"patterns":[{"root":"A","children":[{"role":"x"}]}]})");
    try {
        model_from_json(j);
        FAIL("expected a load error");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("patterns[0].children[0]") != std::string::npos);
    }
    auto bad_rel = nlohmann::json::parse(
        R"({"units":["A","B"],"detectable":["B"],"patterns":[{"root":"A","children":[{"role":"b","unit":"B"}],"constraints":[{"kind":"allen","rel":"sideways","a":"b","b":"self"}]}]})");
    CHECK_THROWS_AS(model_from_json(bad_rel), LoadError);
}
