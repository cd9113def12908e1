#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hgp/model.hpp"

namespace hgp {

/// Manual gestures are sequential; non-manual gestures may overlap anything.
enum class Channel { MG, NMG };

struct Category {
    std::string name;
    Channel channel = Channel::MG;

    friend bool operator==(const Category&, const Category&) = default;
};

/// Extended Hays rule X(Y-n, ..., Y-1, *, Y1, ..., Ym). The head category is
/// the key under which the rule is stored. `left` is listed outermost first.
struct DepRule {
    std::vector<std::string> left;
    std::vector<std::string> right;

    std::size_t size() const { return left.size() + right.size(); }
    friend bool operator==(const DepRule&, const DepRule&) = default;
};

struct DepGrammar {
    std::vector<Category> categories;
    std::map<std::string, std::vector<DepRule>> rules;
    /// Detectable unit carrying the head of each category; defaults to "term:<C>".
    std::map<std::string, std::string> terminals;

    const Category* category(std::string_view name) const;
    std::string terminal(const std::string& category) const;
    /// Rules of a category; a category without rules gets the dependent-free rule.
    std::vector<DepRule> rules_of(const std::string& category) const;

    friend bool operator==(const DepGrammar&, const DepGrammar&) = default;
};

/// Unit names produced by compilation.
std::string category_unit(std::string_view category);
std::string rule_unit(std::string_view category, std::size_t k);

/// Role of the dependent at Hays position `pos` (negative: left of the star).
std::string dep_role(int pos);

/// Throws ValidationError on a malformed grammar (dangling reference,
/// duplicate name, NMG rule not of the form X(Y)).
void validate_dep_grammar(const DepGrammar& g);

/// Compiles categories to alternatives over rules, and rules to patterns
/// with a detectable head and one child per dependent.
Model compile_dep_grammar(const DepGrammar& g);

nlohmann::json dep_grammar_to_json(const DepGrammar& g);
DepGrammar dep_grammar_from_json(const nlohmann::json& j);
std::string dep_grammar_to_string(const DepGrammar& g);
DepGrammar load_dep_grammar(const std::filesystem::path& path);
void save_dep_grammar(const DepGrammar& g, const std::filesystem::path& path);

}  // namespace hgp
