#include "hgp/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "hgp/error.hpp"

namespace hgp {

std::vector<TruthEdge> dependency_edges(const SolutionGraph& sol) {
    std::vector<TruthEdge> out;
    for (const auto& e : sol.edges) {
        if (e.role == "head" || is_option_role(e.role)) continue;
        const SolutionNode* to = sol.node(e.to);
        if (!to || to->provenance == Provenance::Missing) continue;
        const SolutionNode& head = sol.head_node(e.from);
        const SolutionNode& dep = sol.head_node(e.to);
        out.push_back({head.occurrence, dep.occurrence, e.role});
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool match_solution(const SolutionGraph& sol, const GroundTruthPhrase& truth) {
    std::set<std::string> known;
    for (const auto& o : truth.occurrences.occurrences) known.insert(o.id);
    std::set<std::string> covered;
    for (const auto& id : sol.occurrence_ids()) {
        if (!known.count(id)) throw ContractViolation("solution names occurrence " + id + " unknown to the truth");
        covered.insert(id);
    }
    if (covered != known) return false;
    std::vector<TruthEdge> want = truth.edges;
    std::sort(want.begin(), want.end());
    return dependency_edges(sol) == want;
}

MatchReport score_phrase(const std::string& phrase_id, const std::vector<SolutionGraph>& solutions,
                         const GroundTruthPhrase& truth, bool truncated) {
    MatchReport r;
    r.phrase_id = phrase_id;
    r.size = truth.size();
    r.n_solutions = solutions.size();
    r.truncated = truncated;
    const auto ranked = rank_solutions(solutions);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (match_solution(ranked[i], truth)) {
            ++r.n_matching;
            if (!r.rank_of_truth) r.rank_of_truth = i + 1;
        }
    }
    r.ground_truth_found = r.n_matching > 0;
    r.n_false_positives = r.n_solutions - r.n_matching;
    return r;
}

double BucketStats::recall() const {
    return n_phrases ? static_cast<double>(n_found) / static_cast<double>(n_phrases) : 0.0;
}

double BucketStats::precision() const {
    return n_solutions ? static_cast<double>(n_matching) / static_cast<double>(n_solutions) : 0.0;
}

double BucketStats::mean_fp() const {
    return n_phrases ? static_cast<double>(n_false_positives) / static_cast<double>(n_phrases) : 0.0;
}

std::string BucketStats::label() const {
    return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

std::size_t EvalSummary::n_phrases() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.n_phrases;
    return n;
}

EvalSummary summarize(const std::vector<MatchReport>& reports, std::size_t bucket_width) {
    if (bucket_width == 0) throw ContractViolation("bucket width must be positive");
    std::map<std::size_t, BucketStats> by_index;
    for (const auto& r : reports) {
        const std::size_t idx = r.size == 0 ? 0 : (r.size - 1) / bucket_width;
        BucketStats& b = by_index[idx];
        b.lo = idx * bucket_width + 1;
        b.hi = (idx + 1) * bucket_width;
        ++b.n_phrases;
        b.n_found += r.ground_truth_found ? 1 : 0;
        b.n_solutions += r.n_solutions;
        b.n_matching += r.n_matching;
        b.n_false_positives += r.n_false_positives;
    }
    EvalSummary s;
    for (auto& [idx, b] : by_index) s.buckets.push_back(b);
    return s;
}

std::string summary_to_csv(const EvalSummary& s) {
    std::string out = "size_bucket,n_phrases,recall,precision,mean_fp\n";
    char buf[128];
    for (const auto& b : s.buckets) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%.6f,%.6f\n", b.label().c_str(), b.n_phrases,
                      b.recall(), b.precision(), b.mean_fp());
        out += buf;
    }
    return out;
}

}  // namespace hgp
