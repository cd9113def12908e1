#include "hgp/dependency.hpp"

#include <set>

#include "hgp/error.hpp"
#include "hgp/model_io.hpp"

namespace hgp {

using nlohmann::json;

const Category* DepGrammar::category(std::string_view name) const {
    for (const auto& c : categories) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string DepGrammar::terminal(const std::string& category) const {
    auto it = terminals.find(category);
    return it != terminals.end() ? it->second : "term:" + category;
}

std::vector<DepRule> DepGrammar::rules_of(const std::string& category) const {
    auto it = rules.find(category);
    if (it == rules.end() || it->second.empty()) return {DepRule{}};
    return it->second;
}

std::string category_unit(std::string_view category) { return "cat:" + std::string(category); }

std::string rule_unit(std::string_view category, std::size_t k) {
    return "rule:" + std::string(category) + ":" + std::to_string(k);
}

std::string dep_role(int pos) {
    return pos < 0 ? "dep[" + std::to_string(pos) + "]" : "dep[+" + std::to_string(pos) + "]";
}

void validate_dep_grammar(const DepGrammar& g) {
    std::set<std::string> names;
    for (const auto& c : g.categories) {
        if (c.name.empty()) throw ValidationError("category with empty name");
        if (!names.insert(c.name).second) throw ValidationError("duplicate category " + c.name);
    }
    for (const auto& [head, rules] : g.rules) {
        const Category* hc = g.category(head);
        if (!hc) throw ValidationError("rules for undeclared category " + head);
        for (std::size_t k = 0; k < rules.size(); ++k) {
            const auto& r = rules[k];
            if (hc->channel == Channel::NMG && (!r.left.empty() || r.right.size() != 1)) {
                throw ValidationError("NMG rule " + head + "#" + std::to_string(k) +
                                      " must have exactly one right dependent");
            }
            for (const auto* side : {&r.left, &r.right}) {
                for (const auto& d : *side) {
                    if (!g.category(d)) {
                        throw ValidationError("rule " + head + "#" + std::to_string(k) +
                                              " references undeclared category " + d);
                    }
                }
            }
        }
    }
    std::set<std::string> units;
    for (const auto& c : g.categories) {
        for (const auto& u : {category_unit(c.name), g.terminal(c.name)}) {
            if (!units.insert(u).second) throw ValidationError("unit name clash on " + u);
        }
    }
    for (const auto& [c, t] : g.terminals) {
        if (!g.category(c)) throw ValidationError("terminal for undeclared category " + c);
    }
}

Model compile_dep_grammar(const DepGrammar& g) {
    validate_dep_grammar(g);
    Model m;
    for (const auto& cat : g.categories) {
        const std::string cu = category_unit(cat.name);
        const std::string term = g.terminal(cat.name);
        const auto rules = g.rules_of(cat.name);

        Alternative alt{cu, {}};
        m.units.push_back(cu);
        for (std::size_t k = 0; k < rules.size(); ++k) {
            const DepRule& r = rules[k];
            const std::string ru = rule_unit(cat.name, k);
            m.units.push_back(ru);
            alt.options.push_back(ru);

            Pattern p;
            p.root = ru;
            p.head_role = "head";
            p.children.push_back({"head", term});

            // MG dependents and the head form one ordered sequence.
            std::vector<std::string> sequence;
            std::vector<std::string> overlapping;
            const int n_left = static_cast<int>(r.left.size());
            for (int i = 0; i < n_left; ++i) {
                const std::string role = dep_role(i - n_left);
                p.children.push_back({role, category_unit(r.left[i])});
                (g.category(r.left[i])->channel == Channel::MG ? sequence : overlapping)
                    .push_back(role);
            }
            sequence.push_back("head");
            for (std::size_t i = 0; i < r.right.size(); ++i) {
                const std::string role = dep_role(static_cast<int>(i) + 1);
                p.children.push_back({role, category_unit(r.right[i])});
                const bool mg = g.category(r.right[i])->channel == Channel::MG;
                (mg && cat.channel == Channel::MG ? sequence : overlapping).push_back(role);
            }
            for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
                p.constraints.push_back(make_allen("no-overlap-ordered", sequence[i],
                                                   sequence[i + 1], Span::Head, Span::Head));
            }
            for (const auto& role : overlapping) {
                p.constraints.push_back(
                    make_allen("shares-time", role, "head", Span::Head, Span::Head));
            }
            m.patterns.push_back(std::move(p));
        }
        m.alternatives.push_back(std::move(alt));
        m.units.push_back(term);
        m.detectable.insert(term);
    }
    return m;
}

json dep_grammar_to_json(const DepGrammar& g) {
    json cats = json::array();
    for (const auto& c : g.categories) {
        cats.push_back({{"name", c.name}, {"channel", c.channel == Channel::MG ? "MG" : "NMG"}});
    }
    json rules = json::object();
    for (const auto& [head, rs] : g.rules) {
        json arr = json::array();
        for (const auto& r : rs) arr.push_back({{"left", r.left}, {"right", r.right}});
        rules[head] = arr;
    }
    json terms = json::object();
    for (const auto& [c, t] : g.terminals) terms[c] = t;
    return json{{"categories", cats}, {"rules", rules}, {"terminals", terms}};
}

namespace {

std::vector<std::string> names_at(const json& j, const std::string& where) {
    if (!j.is_array()) throw LoadError(where + ": expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_string()) {
            throw LoadError(where + "[" + std::to_string(i) + "]: expected a string");
        }
        out.push_back(j[i].get<std::string>());
    }
    return out;
}

}  // namespace

DepGrammar dep_grammar_from_json(const json& j) {
    if (!j.is_object()) throw LoadError("grammar: expected a JSON object");
    DepGrammar g;
    if (!j.contains("categories") || !j.at("categories").is_array()) {
        throw LoadError("categories: expected an array");
    }
    const json& cats = j.at("categories");
    for (std::size_t i = 0; i < cats.size(); ++i) {
        const std::string where = "categories[" + std::to_string(i) + "]";
        const json& c = cats[i];
        if (!c.is_object() || !c.contains("name") || !c.at("name").is_string()) {
            throw LoadError(where + ".name: expected a string");
        }
        if (!c.contains("channel") || !c.at("channel").is_string()) {
            throw LoadError(where + ".channel: expected \"MG\" or \"NMG\"");
        }
        const std::string ch = c.at("channel").get<std::string>();
        Channel channel;
        if (ch == "MG") {
            channel = Channel::MG;
        } else if (ch == "NMG") {
            channel = Channel::NMG;
        } else {
            throw LoadError(where + ".channel: unknown channel '" + ch + "'");
        }
        g.categories.push_back({c.at("name").get<std::string>(), channel});
    }
    if (j.contains("rules")) {
        const json& rules = j.at("rules");
        if (!rules.is_object()) throw LoadError("rules: expected an object");
        for (const auto& [head, arr] : rules.items()) {
            const std::string where = "rules." + head;
            if (!arr.is_array()) throw LoadError(where + ": expected an array");
            auto& out = g.rules[head];
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const std::string rw = where + "[" + std::to_string(k) + "]";
                DepRule r;
                if (arr[k].contains("left")) r.left = names_at(arr[k].at("left"), rw + ".left");
                if (arr[k].contains("right")) r.right = names_at(arr[k].at("right"), rw + ".right");
                out.push_back(std::move(r));
            }
        }
    }
    if (j.contains("terminals")) {
        const json& terms = j.at("terminals");
        if (!terms.is_object()) throw LoadError("terminals: expected an object");
        for (const auto& [c, t] : terms.items()) {
            if (!t.is_string()) throw LoadError("terminals." + c + ": expected a string");
            g.terminals[c] = t.get<std::string>();
        }
    }
    return g;
}

std::string dep_grammar_to_string(const DepGrammar& g) { return dep_grammar_to_json(g).dump(2) + "\n"; }

DepGrammar load_dep_grammar(const std::filesystem::path& path) {
    try {
        return dep_grammar_from_json(read_json_file(path));
    } catch (const LoadError& e) {
        std::string msg = e.what();
        if (msg.rfind(path.string(), 0) == 0) throw;
        throw LoadError(path.string() + ": " + msg);
    }
}

void save_dep_grammar(const DepGrammar& g, const std::filesystem::path& path) {
    write_text_file(path, dep_grammar_to_string(g));
}

}  // namespace hgp
