#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "hgp/batch.hpp"
#include "hgp/model_io.hpp"

using namespace hgp;
namespace fs = std::filesystem;

namespace {

void same_reports(const std::vector<MatchReport>& a, const std::vector<MatchReport>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].phrase_id == b[i].phrase_id);
        CHECK(a[i].size == b[i].size);
        CHECK(a[i].n_solutions == b[i].n_solutions);
        CHECK(a[i].n_matching == b[i].n_matching);
        CHECK(a[i].rank_of_truth == b[i].rank_of_truth);
    }
}

}  // namespace

TEST_CASE("parallel batch equals the serial reference") {
    const auto dir = fs::temp_directory_path() / "hgp_test_batch";
    fs::remove_all(dir);
    GenParams p;
    p.seed = 31;
    p.phrase_size = {2, 12};
    p.size_mode = SizeMode::Uniform;
    const auto m = generate_corpus(p, 24, 1, dir);

    BatchOptions o;
    o.solutions_dir = dir / "solutions";
    const auto serial = run_corpus_serial(m, dir, o);
    o.jobs = 4;
    const auto parallel = run_corpus(m, dir, o);
    same_reports(serial, parallel);

    const auto rescored = score_directories(dir / "solutions", dir / "truth", dir / "phrases");
    same_reports(serial, rescored);
    CHECK(summary_to_csv(summarize(serial)) == summary_to_csv(summarize(rescored)));

    std::size_t found = 0;
    for (const auto& r : serial) found += r.ground_truth_found ? 1 : 0;
    CHECK(found > 0);
}

TEST_CASE("one phrase outcome") {
    const auto dir = fs::temp_directory_path() / "hgp_test_batch_one";
    fs::remove_all(dir);
    GenParams p;
    p.seed = 8;
    p.phrase_size = {1, 4};
    const auto m = generate_corpus(p, 1, 1, dir);
    BatchOptions o;
    o.budget = SearchBudget::unlimited();
    const auto out = run_phrase(m.entries[0], dir, o);
    CHECK(out.report.ground_truth_found);
    CHECK_FALSE(out.result.truncated);
    CHECK(out.report.size == m.entries[0].size);
}
