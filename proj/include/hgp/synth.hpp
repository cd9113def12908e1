#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hgp/dependency.hpp"
#include "hgp/solution.hpp"

namespace hgp {

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class SizeMode {
    /// Accept any derivation whose size falls in the size range.
    Natural,
    /// Draw a target size uniformly from the size range, then sample until hit.
    Uniform,
};

struct GenParams {
    std::size_t n_categories = 20;
    IntRange rules_per_category{3, 4};
    IntRange mg_dependents{0, 4};
    std::size_t nmg_dependents = 1;
    double mg_fraction = 0.5;
    std::size_t max_depth = 6;
    IntRange mg_duration{300, 900};
    IntRange gap{0, 200};
    IntRange nmg_duration{400, 1500};
    IntRange phrase_size{1, 20};
    SizeMode size_mode = SizeMode::Natural;
    /// Derivations tried per phrase before giving up on a grammar.
    std::size_t max_attempts = 2000;
    std::uint64_t seed = 1;

    friend bool operator==(const GenParams&, const GenParams&) = default;
};

/// Throws GenerationError naming the offending field.
void validate_params(const GenParams& p);

struct TruthEdge {
    std::string head_id;
    std::string dep_id;
    std::string role;

    friend auto operator<=>(const TruthEdge&, const TruthEdge&) = default;
};

struct GroundTruthPhrase {
    std::string grammar_id;
    std::string root_category;
    AnnotationDoc occurrences;
    std::vector<TruthEdge> edges;

    std::size_t size() const { return occurrences.occurrences.size(); }
};

/// splitmix64 of the pair; streams for distinct indices are independent.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

DepGrammar generate_grammar(const GenParams& params);

/// Samples one phrase rooted at `root_category`. Throws GenerationError when
/// the category cannot terminate or no derivation of an admissible size is
/// found within params.max_attempts.
GroundTruthPhrase generate_phrase(const DepGrammar& g, const std::string& root_category,
                                  const GenParams& params, std::uint64_t seed);

/// Picks the root category (an MG category) from the seed, then samples.
GroundTruthPhrase generate_phrase(const DepGrammar& g, const GenParams& params, std::uint64_t seed);

nlohmann::json truth_to_json(const GroundTruthPhrase& t);
/// Reads edges and metadata; occurrences come from the phrase file.
GroundTruthPhrase truth_from_json(const nlohmann::json& j);
GroundTruthPhrase load_truth(const std::filesystem::path& truth, const std::filesystem::path& phrase);
void save_truth(const GroundTruthPhrase& t, const std::filesystem::path& path);

nlohmann::json params_to_json(const GenParams& p);
GenParams params_from_json(const nlohmann::json& j);

struct CorpusEntry {
    std::string id;
    std::string grammar_path;
    std::string phrase_path;
    std::string truth_path;
    std::uint64_t seed = 0;
    std::size_t size = 0;
};

struct CorpusManifest {
    GenParams params;
    std::size_t n_grammars = 0;
    std::size_t phrases_per_grammar = 0;
    std::vector<CorpusEntry> entries;
};

/// Writes grammars/, phrases/, truth/ and manifest.json under `dir`. Paths in
/// the manifest are relative to `dir`. Grammar i is generated from
/// derive_seed(params.seed, i); when no admissible phrase exists for it the
/// grammar is redrawn from the next derived seed. Each entry records the
/// grammar seed s actually used; phrase k is generate_phrase(g, params,
/// derive_seed(s, k + 1)).
CorpusManifest generate_corpus(const GenParams& params, std::size_t n_grammars,
                               std::size_t phrases_per_grammar, const std::filesystem::path& dir,
                               int jobs = 0);

nlohmann::json manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);
CorpusManifest load_manifest(const std::filesystem::path& path);

}  // namespace hgp
