#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hgp/constraints.hpp"
#include "hgp/model.hpp"

namespace hgp {

enum class Provenance { Detected, Inferred, External, Missing };

std::string_view provenance_name(Provenance p);
Provenance provenance_from_name(std::string_view name);

/// A timed, attributed instance of a unit.
struct Occurrence {
    std::string id;
    UnitId unit;
    AttributeSet attrs;
    Provenance provenance = Provenance::Detected;
    /// Annotation id the occurrence was read from (detected occurrences).
    std::string source;
};

struct AnnotationDoc {
    Interval span;
    std::vector<Occurrence> occurrences;
};

struct SolutionNode {
    std::string id;
    UnitId unit;
    Interval interval;
    Provenance provenance = Provenance::Inferred;
    /// Detector occurrence bound to this node; empty for inferred nodes.
    std::string occurrence;
    std::map<std::string, AttrValue> flags;
};

struct SolutionEdge {
    std::string from;
    /// Pattern role, or "option:<k>" for the branch taken at an alternative.
    std::string role;
    std::string to;
};

/// One parse result: a forest of instance trees over timed occurrences.
struct SolutionGraph {
    std::vector<SolutionNode> nodes;
    std::vector<SolutionEdge> edges;
    /// Root node of each connected component.
    std::vector<std::string> roots;
    std::size_t score = 0;
    bool truncated = false;

    const SolutionNode* node(std::string_view id) const;
    std::vector<const SolutionEdge*> out_edges(std::string_view id) const;
    /// Follows "head" and option edges down to the node carrying the head
    /// occurrence; returns the node itself when it has none.
    const SolutionNode& head_node(std::string_view id) const;
    Interval hull() const;
    /// Ids of nodes bound to detector occurrences, in node order.
    std::vector<std::string> occurrence_ids() const;
};

std::string option_role(std::size_t k);
bool is_option_role(std::string_view role);

/// Canonical text of a solution, equal for isomorphic solutions.
std::string canonical_form(const SolutionGraph& g);

/// Descending by size; ties by earlier hull start, then by occurrence ids.
std::vector<SolutionGraph> rank_solutions(std::vector<SolutionGraph> solutions);

/// One occurrence per node, ordered by (start, end, unit, id).
AnnotationDoc solution_to_annotation(const SolutionGraph& g);

/// Re-checks every pattern node of a solution against the model with
/// check_binding, and every inferred node's interval against the hull of its
/// constituents. Returns human-readable violations; empty means sound.
std::vector<std::string> recheck_solution(const Model& model, const SolutionGraph& g);

nlohmann::json solution_to_json(const SolutionGraph& g);
SolutionGraph solution_from_json(const nlohmann::json& j);
nlohmann::json solutions_to_json(const std::vector<SolutionGraph>& gs);
std::vector<SolutionGraph> solutions_from_json(const nlohmann::json& j);
std::string solutions_to_string(const std::vector<SolutionGraph>& gs);
std::vector<SolutionGraph> load_solutions(const std::filesystem::path& path);
void save_solutions(const std::vector<SolutionGraph>& gs, const std::filesystem::path& path);

}  // namespace hgp
