#include "hgp/model.hpp"

#include <sstream>

#include "hgp/error.hpp"

namespace hgp {

const PatternChild* Pattern::child(std::string_view role) const {
    for (const auto& c : children) {
        if (c.role == role) return &c;
    }
    return nullptr;
}

bool Model::has_unit(std::string_view u) const {
    for (const auto& x : units) {
        if (x == u) return true;
    }
    return false;
}

const Pattern* Model::pattern_for(std::string_view root) const {
    for (const auto& p : patterns) {
        if (p.root == root) return &p;
    }
    return nullptr;
}

const Alternative* Model::alternative_for(std::string_view root) const {
    for (const auto& a : alternatives) {
        if (a.root == root) return &a;
    }
    return nullptr;
}

const AttributeDecl* Model::attribute(std::string_view name) const {
    for (const auto& a : attributes) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    if (violations.empty()) {
        out << "model is valid (0 violations)\n";
        return out.str();
    }
    out << violations.size() << " violation(s):\n";
    for (const auto& v : violations) out << "  [" << v.code << "] " << v.message << "\n";
    return out.str();
}

ValidationReport validate_model(const Model& model) {
    ValidationReport report;
    auto flag = [&](std::string code, std::string msg) {
        report.violations.push_back({std::move(code), std::move(msg)});
    };

    std::set<std::string> declared;
    for (const auto& u : model.units) {
        if (u.empty()) {
            flag("empty-unit", "empty unit name");
            continue;
        }
        if (!declared.insert(u).second) flag("duplicate-unit", "duplicate unit " + u);
    }

    std::set<std::string> attr_names;
    for (const auto& a : model.attributes) {
        if (!attr_names.insert(a.name).second) {
            flag("duplicate-attribute", "duplicate attribute " + a.name);
        }
    }

    std::map<std::string, int> rule_count;
    auto check_unit = [&](const std::string& u, const std::string& where) {
        if (!declared.count(u)) flag("undeclared-unit", "undeclared unit " + u + " in " + where);
    };

    for (const auto& p : model.patterns) {
        const std::string where = "pattern " + p.root;
        check_unit(p.root, where);
        ++rule_count[p.root];
        if (p.children.empty()) flag("empty-pattern", where + " has no children");

        std::set<std::string> roles;
        for (const auto& c : p.children) {
            check_unit(c.unit, where);
            if (c.role == kSelfRole) flag("reserved-role", where + " uses reserved role self");
            if (c.role.empty()) flag("empty-role", where + " has an empty role name");
            if (!roles.insert(c.role).second) {
                flag("duplicate-role", "duplicate role " + c.role + " in " + where);
            }
        }
        if (p.head_role && !roles.count(*p.head_role)) {
            flag("unknown-head-role", "unknown head role " + *p.head_role + " in " + where);
        }
        for (const auto& c : p.constraints) {
            for (const auto& r : constraint_roles(c)) {
                if (r != kSelfRole && !roles.count(r)) {
                    flag("unknown-role", "unknown role " + r + " in " + where);
                }
            }
            if (const auto* pred = std::get_if<AttrPredicate>(&c)) {
                const AttributeDecl* decl = model.attribute(pred->attr);
                if (!decl) {
                    flag("undeclared-attribute",
                         "undeclared attribute " + pred->attr + " in " + where);
                } else {
                    bool ok = (decl->kind == AttributeKind::Boolean &&
                               std::holds_alternative<bool>(pred->value)) ||
                              (decl->kind == AttributeKind::Symbol &&
                               std::holds_alternative<std::string>(pred->value));
                    if (!ok) {
                        flag("attribute-kind",
                             "literal kind does not match attribute " + pred->attr + " in " + where);
                    }
                }
            }
        }
    }

    for (const auto& a : model.alternatives) {
        const std::string where = "alternative " + a.root;
        check_unit(a.root, where);
        ++rule_count[a.root];
        if (a.options.empty()) flag("empty-alternative", where + " has no options");
        for (const auto& o : a.options) check_unit(o, where);
    }

    for (const auto& [root, n] : rule_count) {
        if (n > 1) flag("duplicate-rule-root", "duplicate rule root " + root);
    }

    for (const auto& u : model.detectable) {
        if (!declared.count(u)) flag("undeclared-unit", "undeclared detectable unit " + u);
    }
    for (const auto& u : model.external) {
        if (!declared.count(u)) flag("undeclared-unit", "undeclared external unit " + u);
        if (rule_count.count(u)) flag("external-rule", "external unit " + u + " roots a rule");
    }

    for (const auto& u : declared) {
        if (!rule_count.count(u) && !model.detectable.count(u) && !model.external.count(u)) {
            flag("uninstantiable",
                 "unit " + u + " roots no rule and is neither detectable nor external");
        }
    }
    return report;
}

ImplicitGraph::ImplicitGraph(const Model& model) {
    nodes_.reserve(model.units.size());
    for (const auto& u : model.units) {
        index_.emplace(u, nodes_.size());
        ImplicitNode n;
        n.unit = u;
        n.detectable = model.detectable.count(u) > 0;
        n.external = model.external.count(u) > 0;
        nodes_.push_back(std::move(n));
    }
    for (const auto& p : model.patterns) {
        auto& n = nodes_[index_.at(p.root)];
        n.kind = NodeKind::And;
        for (const auto& c : p.children) n.out.push_back({c.role, index_.at(c.unit)});
    }
    for (const auto& a : model.alternatives) {
        auto& n = nodes_[index_.at(a.root)];
        n.kind = NodeKind::Or;
        for (std::size_t i = 0; i < a.options.size(); ++i) {
            n.out.push_back({std::to_string(i), index_.at(a.options[i])});
        }
    }
}

const ImplicitNode& ImplicitGraph::node(std::string_view unit) const {
    auto i = index_of(unit);
    if (!i) throw ContractViolation("implicit graph has no unit " + std::string(unit));
    return nodes_[*i];
}

std::optional<std::size_t> ImplicitGraph::index_of(std::string_view unit) const {
    auto it = index_.find(unit);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ImplicitGraph build_implicit_graph(const Model& model) {
    auto report = validate_model(model);
    if (!report.valid()) throw ValidationError("invalid model: " + report.to_string());
    return ImplicitGraph(model);
}

}  // namespace hgp
