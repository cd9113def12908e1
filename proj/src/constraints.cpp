#include "hgp/constraints.hpp"

#include "hgp/error.hpp"
#include "hgp/model.hpp"

namespace hgp {

std::string attr_value_to_string(const AttrValue& v) {
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    return std::get<std::string>(v);
}

AllenConstraint make_allen(std::string_view rel, std::string a, std::string b, Span a_span,
                           Span b_span) {
    auto set = RelationSet::from_name(rel);
    if (!set) throw LoadError("unknown relation '" + std::string(rel) + "'");
    return AllenConstraint{std::string(rel), *set, std::move(a), std::move(b), a_span, b_span};
}

std::vector<std::string> constraint_roles(const ConstraintExpr& c) {
    if (const auto* a = std::get_if<AllenConstraint>(&c)) return {a->a, a->b};
    return {std::get<AttrPredicate>(c).role};
}

namespace {

const AttributeSet& lookup(const Binding& binding, const std::string& role) {
    auto it = binding.find(role);
    if (it == binding.end()) {
        throw ContractViolation("binding has no role '" + role + "'");
    }
    return it->second;
}

Interval pick(const AttributeSet& attrs, Span span) {
    return span == Span::Head ? attrs.head_span() : attrs.interval;
}

}  // namespace

bool eval_constraint(const ConstraintExpr& c, const Binding& binding) {
    if (const auto* a = std::get_if<AllenConstraint>(&c)) {
        return a->rel.holds(pick(lookup(binding, a->a), a->a_span),
                            pick(lookup(binding, a->b), a->b_span));
    }
    const auto& p = std::get<AttrPredicate>(c);
    const auto& attrs = lookup(binding, p.role);
    auto it = attrs.flags.find(p.attr);
    bool equal = it != attrs.flags.end() && it->second == p.value;
    return p.op == AttrOp::Eq ? equal : !equal;
}

bool check_binding(std::span<const ConstraintExpr> constraints, const Binding& binding) {
    // Resolve every role first so a missing role is reported even after a
    // constraint has already failed.
    for (const auto& c : constraints) {
        for (const auto& r : constraint_roles(c)) lookup(binding, r);
    }
    for (const auto& c : constraints) {
        if (!eval_constraint(c, binding)) return false;
    }
    return true;
}

bool check_binding(const Pattern& pattern, const Binding& binding) {
    return check_binding(std::span<const ConstraintExpr>(pattern.constraints), binding);
}

}  // namespace hgp
