#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hgp/detector.hpp"
#include "hgp/model.hpp"
#include "hgp/solution.hpp"

namespace hgp {

struct SearchBudget {
    /// Node expansions, candidate bindings and forest-assembly steps.
    std::size_t max_expansions = 100000;
    std::size_t max_solutions = 1000;

    static SearchBudget unlimited() {
        return {std::numeric_limits<std::size_t>::max(), std::numeric_limits<std::size_t>::max()};
    }
};

/// A root unit and, optionally, the window and occurrence ids its seeds are
/// drawn from. Seeds are occurrences of the root's head units.
struct RootSpec {
    UnitId unit;
    std::optional<Interval> window;
    std::vector<std::string> seed_ids;
};

struct ParseRequest {
    std::vector<RootSpec> roots;
    std::shared_ptr<const Detector> detector;
    SearchBudget budget;
    /// Time extent under parse; every detector query is clipped to it.
    Interval span = Interval::everything();
    /// Keep pattern instances whose unfillable children are left missing.
    bool emit_partial = false;
};

struct ParseResult {
    std::vector<SolutionGraph> solutions;
    bool truncated = false;
    std::size_t expansions = 0;
    /// Canonical form of every complete tree found, before merging.
    std::vector<std::string> trees;
};

/// Top-down parser over one validated model. Immutable and shareable across
/// threads; each parse() call owns its search state.
class Parser {
public:
    /// Throws ValidationError when the model is invalid.
    explicit Parser(Model model);
    ~Parser();
    Parser(Parser&&) noexcept;
    Parser& operator=(Parser&&) noexcept;

    const Model& model() const;

    /// Expands names with a trailing '*' to every unit with that prefix.
    /// Throws ContractViolation naming an unknown unit.
    std::vector<UnitId> resolve_roots(const std::vector<std::string>& names) const;

    /// Detectable units that can anchor an instance of `unit`.
    std::vector<UnitId> head_units(const UnitId& unit) const;

    ParseResult parse(const ParseRequest& request) const;

    struct Plan;

private:
    std::unique_ptr<const Plan> plan_;
};

ParseResult parse(const Model& model, const ParseRequest& request);

/// Root specs for every unit matched by `names` (see resolve_roots).
std::vector<RootSpec> root_specs(const Parser& parser, const std::vector<std::string>& names);

/// Supplies an external unit on demand by parsing the queried window with
/// another model (typically a compiled dependency grammar) and exposing each
/// solution as one external occurrence.
class ExternalParseDetector : public Detector {
public:
    ExternalParseDetector(std::shared_ptr<const Parser> parser, std::shared_ptr<const Detector> inner,
                          std::vector<std::string> roots, SearchBudget budget, UnitId unit);

    std::vector<Occurrence> query(const DetectorQuery& q) const override;

private:
    std::shared_ptr<const Parser> parser_;
    std::shared_ptr<const Detector> inner_;
    std::vector<std::string> roots_;
    SearchBudget budget_;
    UnitId unit_;
    mutable std::mutex mutex_;
    mutable std::map<Interval, std::vector<Occurrence>> cache_;
};

}  // namespace hgp
