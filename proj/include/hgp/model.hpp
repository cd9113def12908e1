#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hgp/constraints.hpp"

namespace hgp {

using UnitId = std::string;

struct PatternChild {
    std::string role;
    UnitId unit;

    friend bool operator==(const PatternChild&, const PatternChild&) = default;
};

/// AND rule: the root unit is realised by all of its role-named children,
/// subject to the constraints.
struct Pattern {
    UnitId root;
    std::vector<PatternChild> children;
    std::vector<ConstraintExpr> constraints;
    /// Role whose head span becomes the head span of the pattern instance.
    std::optional<std::string> head_role;

    const PatternChild* child(std::string_view role) const;
};

/// OR rule: the root unit is realised by any one of the options.
struct Alternative {
    UnitId root;
    std::vector<UnitId> options;
};

enum class AttributeKind { TimeInterval, Boolean, Symbol };

struct AttributeDecl {
    std::string name;
    AttributeKind kind = AttributeKind::Boolean;
};

struct Model {
    std::vector<UnitId> units;
    std::vector<Pattern> patterns;
    std::vector<Alternative> alternatives;
    std::set<UnitId> detectable;
    std::set<UnitId> external;
    std::vector<AttributeDecl> attributes;

    bool has_unit(std::string_view u) const;
    const Pattern* pattern_for(std::string_view root) const;
    const Alternative* alternative_for(std::string_view root) const;
    const AttributeDecl* attribute(std::string_view name) const;
    /// Units a detector may be asked about: detectable or external.
    bool is_queryable(std::string_view u) const {
        return detectable.count(std::string(u)) || external.count(std::string(u));
    }
};

struct Violation {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
    std::string to_string() const;
};

ValidationReport validate_model(const Model& model);

enum class NodeKind { And, Or, Leaf };

struct ImplicitEdge {
    /// Role name for AND edges, option index (as text) for OR edges.
    std::string label;
    std::size_t target;
};

struct ImplicitNode {
    UnitId unit;
    NodeKind kind = NodeKind::Leaf;
    bool detectable = false;
    bool external = false;
    std::vector<ImplicitEdge> out;
};

/// The AND/OR graph over unit kinds. Immutable once built; may be cyclic.
class ImplicitGraph {
public:
    explicit ImplicitGraph(const Model& model);

    std::size_t size() const { return nodes_.size(); }
    const ImplicitNode& node(std::size_t i) const { return nodes_[i]; }
    const ImplicitNode& node(std::string_view unit) const;
    std::optional<std::size_t> index_of(std::string_view unit) const;
    const std::vector<ImplicitNode>& nodes() const { return nodes_; }

private:
    std::vector<ImplicitNode> nodes_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Throws ValidationError when the model has violations.
ImplicitGraph build_implicit_graph(const Model& model);

}  // namespace hgp
