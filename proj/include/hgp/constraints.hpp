#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hgp/interval.hpp"

namespace hgp {

using AttrValue = std::variant<bool, std::string>;

std::string attr_value_to_string(const AttrValue& v);

/// Attributes of one occurrence: its extent, the span of its head (the
/// detected occurrence it is anchored on, when there is one) and flags.
struct AttributeSet {
    Interval interval;
    std::optional<Interval> head;
    std::map<std::string, AttrValue> flags;

    Interval head_span() const { return head.value_or(interval); }
};

/// Which interval of a role binding an Allen constraint reads.
enum class Span { Extent, Head };

/// Reserved role naming the pattern root itself.
inline constexpr std::string_view kSelfRole = "self";

struct AllenConstraint {
    std::string rel_name;
    RelationSet rel;
    std::string a;
    std::string b;
    Span a_span = Span::Extent;
    Span b_span = Span::Extent;
};

enum class AttrOp { Eq, Ne };

struct AttrPredicate {
    std::string role;
    std::string attr;
    AttrOp op = AttrOp::Eq;
    AttrValue value;
};

using ConstraintExpr = std::variant<AllenConstraint, AttrPredicate>;

/// Builds an Allen constraint from a relation name; throws LoadError on an
/// unknown name.
AllenConstraint make_allen(std::string_view rel, std::string a, std::string b,
                           Span a_span = Span::Extent, Span b_span = Span::Extent);

/// Roles a constraint mentions, in (a, b) order; one entry for predicates.
std::vector<std::string> constraint_roles(const ConstraintExpr& c);

using Binding = std::map<std::string, AttributeSet, std::less<>>;

/// Evaluates one constraint. A missing flag compares unequal to every literal.
bool eval_constraint(const ConstraintExpr& c, const Binding& binding);

/// True iff every constraint holds on the binding. Throws ContractViolation
/// when a referenced role is not bound.
bool check_binding(std::span<const ConstraintExpr> constraints, const Binding& binding);

struct Pattern;
bool check_binding(const Pattern& pattern, const Binding& binding);

}  // namespace hgp
