// Serial vs OpenMP batch parsing on a generated corpus.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include <omp.h>

#include "hgp/batch.hpp"

using namespace hgp;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const std::vector<MatchReport>& a, const std::vector<MatchReport>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].phrase_id != b[i].phrase_id || a[i].n_solutions != b[i].n_solutions ||
            a[i].n_matching != b[i].n_matching || a[i].rank_of_truth != b[i].rank_of_truth) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
    const auto dir = std::filesystem::temp_directory_path() / "hgp_bench_corpus";
    std::filesystem::remove_all(dir);

    GenParams p;
    p.phrase_size = {2, 20};
    p.size_mode = SizeMode::Uniform;
    p.seed = 2024;
    const auto manifest = generate_corpus(p, n, 1, dir);

    BatchOptions o;
    std::vector<MatchReport> serial, parallel;
    const double ts = seconds([&] { serial = run_corpus_serial(manifest, dir, o); });
    const double tp = seconds([&] { parallel = run_corpus(manifest, dir, o); });

    std::printf("phrases      %zu\n", n);
    std::printf("threads      %d\n", omp_get_max_threads());
    std::printf("serial       %.3f s\n", ts);
    std::printf("openmp       %.3f s\n", tp);
    std::printf("speedup      %.2fx\n", tp > 0 ? ts / tp : 0.0);
    std::printf("identical    %s\n", same(serial, parallel) ? "yes" : "NO");
    std::filesystem::remove_all(dir);
    return same(serial, parallel) ? 0 : 1;
}
