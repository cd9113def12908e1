#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hgp/solution.hpp"
#include "hgp/synth.hpp"

namespace hgp {

/// Dependency edges of a solution: every non-head role edge of an AND node,
/// projected to (head occurrence, dependent occurrence, role). Sorted.
std::vector<TruthEdge> dependency_edges(const SolutionGraph& sol);

/// Edge sets equal and occurrence sets equal. Rule and unit names play no
/// part. Throws ContractViolation when the solution names an occurrence the
/// truth does not know.
bool match_solution(const SolutionGraph& sol, const GroundTruthPhrase& truth);

struct MatchReport {
    std::string phrase_id;
    std::size_t size = 0;
    std::size_t n_solutions = 0;
    std::size_t n_matching = 0;
    bool ground_truth_found = false;
    std::size_t n_false_positives = 0;
    /// 1-based position of the first match under rank_solutions.
    std::optional<std::size_t> rank_of_truth;
    bool truncated = false;
};

MatchReport score_phrase(const std::string& phrase_id, const std::vector<SolutionGraph>& solutions,
                         const GroundTruthPhrase& truth, bool truncated = false);

struct BucketStats {
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::size_t n_phrases = 0;
    std::size_t n_found = 0;
    std::size_t n_solutions = 0;
    std::size_t n_matching = 0;
    std::size_t n_false_positives = 0;

    double recall() const;
    /// Matching solutions over emitted solutions; 0 when none were emitted.
    double precision() const;
    double mean_fp() const;
    std::string label() const;
};

struct EvalSummary {
    std::vector<BucketStats> buckets;
    std::size_t n_phrases() const;
};

/// Buckets phrases by size: [1, w], [w+1, 2w], ... Only non-empty buckets
/// are kept, in size order.
EvalSummary summarize(const std::vector<MatchReport>& reports, std::size_t bucket_width = 1);

/// Header size_bucket,n_phrases,recall,precision,mean_fp.
std::string summary_to_csv(const EvalSummary& s);

}  // namespace hgp
