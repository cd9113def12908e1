#include "hgp/batch.hpp"

#include <algorithm>
#include <string>

#include <omp.h>

#include "hgp/dependency.hpp"
#include "hgp/detector.hpp"
#include "hgp/error.hpp"

namespace hgp {

PhraseOutcome run_phrase(const CorpusEntry& entry, const std::filesystem::path& corpus_dir,
                         const BatchOptions& options) {
    const DepGrammar g = load_dep_grammar(corpus_dir / entry.grammar_path);
    const Parser parser(compile_dep_grammar(g));
    const GroundTruthPhrase truth =
        load_truth(corpus_dir / entry.truth_path, corpus_dir / entry.phrase_path);

    ParseRequest req;
    req.roots = root_specs(parser, options.roots);
    req.detector = annotation_detector(truth.occurrences, parser.model());
    req.budget = options.budget;
    req.span = truth.occurrences.span;

    PhraseOutcome out;
    out.result = parser.parse(req);
    out.result.solutions = rank_solutions(std::move(out.result.solutions));
    out.report = score_phrase(entry.id, out.result.solutions, truth, out.result.truncated);
    if (options.solutions_dir) {
        save_solutions(out.result.solutions, *options.solutions_dir / (entry.id + ".json"));
    }
    return out;
}

std::vector<MatchReport> run_corpus(const CorpusManifest& manifest, const std::filesystem::path& corpus_dir,
                                    const BatchOptions& options) {
    const auto n = static_cast<std::ptrdiff_t>(manifest.entries.size());
    std::vector<MatchReport> reports(manifest.entries.size());
    std::vector<std::string> errors(manifest.entries.size());
    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            reports[i] = run_phrase(manifest.entries[i], corpus_dir, options).report;
        } catch (const std::exception& e) {
            errors[i] = manifest.entries[i].id + ": " + e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw Error(e);
    }
    return reports;
}

std::vector<MatchReport> run_corpus_serial(const CorpusManifest& manifest,
                                           const std::filesystem::path& corpus_dir,
                                           const BatchOptions& options) {
    std::vector<MatchReport> reports;
    reports.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) reports.push_back(run_phrase(e, corpus_dir, options).report);
    return reports;
}

std::vector<MatchReport> score_directories(const std::filesystem::path& solutions_dir,
                                           const std::filesystem::path& truth_dir,
                                           const std::filesystem::path& phrases_dir, int jobs) {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& f : std::filesystem::directory_iterator(truth_dir, ec)) {
        if (f.path().extension() == ".json") ids.push_back(f.path().stem().string());
    }
    if (ec) throw LoadError(truth_dir.string() + ": " + ec.message());
    std::sort(ids.begin(), ids.end());

    const auto n = static_cast<std::ptrdiff_t>(ids.size());
    std::vector<MatchReport> reports(ids.size());
    std::vector<std::string> errors(ids.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const auto truth = load_truth(truth_dir / (ids[i] + ".json"), phrases_dir / (ids[i] + ".json"));
            const auto sols = load_solutions(solutions_dir / (ids[i] + ".json"));
            bool truncated = std::any_of(sols.begin(), sols.end(), [](const auto& s) { return s.truncated; });
            reports[i] = score_phrase(ids[i], sols, truth, truncated);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw LoadError(e);
    }
    return reports;
}

}  // namespace hgp
