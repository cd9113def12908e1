#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "hgp/evaluation.hpp"
#include "hgp/parser.hpp"
#include "hgp/synth.hpp"

namespace hgp {

struct BatchOptions {
    SearchBudget budget;
    /// Root patterns handed to resolve_roots; every category by default.
    std::vector<std::string> roots{"cat:*"};
    /// When set, solutions/<id>.json are written here.
    std::optional<std::filesystem::path> solutions_dir;
    /// OpenMP threads; 0 uses the runtime default.
    int jobs = 0;
};

struct PhraseOutcome {
    MatchReport report;
    ParseResult result;
};

/// Parses one corpus entry with its own compiled grammar and scores it.
PhraseOutcome run_phrase(const CorpusEntry& entry, const std::filesystem::path& corpus_dir,
                         const BatchOptions& options);

/// Reports in manifest order. Phrases run in parallel.
std::vector<MatchReport> run_corpus(const CorpusManifest& manifest, const std::filesystem::path& corpus_dir,
                                    const BatchOptions& options);

/// Same results as run_corpus, one phrase at a time.
std::vector<MatchReport> run_corpus_serial(const CorpusManifest& manifest,
                                           const std::filesystem::path& corpus_dir,
                                           const BatchOptions& options);

/// Scores saved solutions against truth files; phrase ids are the file stems
/// found in `truth_dir`, phrases from `phrases_dir`.
std::vector<MatchReport> score_directories(const std::filesystem::path& solutions_dir,
                                           const std::filesystem::path& truth_dir,
                                           const std::filesystem::path& phrases_dir, int jobs = 0);

}  // namespace hgp
