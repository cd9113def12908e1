#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hgp/batch.hpp"
#include "hgp/dependency.hpp"
#include "hgp/detector.hpp"
#include "hgp/error.hpp"
#include "hgp/evaluation.hpp"
#include "hgp/model_io.hpp"
#include "hgp/parser.hpp"
#include "hgp/synth.hpp"

using namespace hgp;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kIo = 2, kTruncated = 3 };

struct RangeFlag {
    std::vector<std::int64_t> v;
    void apply(IntRange& r) const {
        if (!v.empty()) r = {v[0], v[1]};
    }
};

struct ParamFlags {
    GenParams p;
    RangeFlag rules, mg_deps, mg_duration, gap, nmg_duration, sizes;
    std::string size_mode = "natural";

    void add(CLI::App* app) {
        app->add_option("--categories", p.n_categories, "number of categories")->capture_default_str();
        app->add_option("--rules", rules.v, "rules per category: LO HI")->expected(2);
        app->add_option("--mg-deps", mg_deps.v, "dependents of manual rules: LO HI")->expected(2);
        app->add_option("--nmg-deps", p.nmg_dependents, "dependents of non-manual rules")
            ->capture_default_str();
        app->add_option("--mg-fraction", p.mg_fraction, "share of manual categories")->capture_default_str();
        app->add_option("--max-depth", p.max_depth, "depth past which derivations close")
            ->capture_default_str();
        app->add_option("--mg-duration", mg_duration.v, "manual duration in ms: LO HI")->expected(2);
        app->add_option("--gap", gap.v, "gap between manual gestures in ms: LO HI")->expected(2);
        app->add_option("--nmg-duration", nmg_duration.v, "non-manual duration in ms: LO HI")->expected(2);
        app->add_option("--sizes", sizes.v, "phrase size range: LO HI")->expected(2);
        app->add_option("--size-mode", size_mode, "natural or uniform")
            ->check(CLI::IsMember({"natural", "uniform"}))
            ->capture_default_str();
        app->add_option("--max-attempts", p.max_attempts, "derivations tried per phrase")
            ->capture_default_str();
        app->add_option("--seed", p.seed, "master seed")->capture_default_str();
    }

    GenParams get() const {
        GenParams out = p;
        rules.apply(out.rules_per_category);
        mg_deps.apply(out.mg_dependents);
        mg_duration.apply(out.mg_duration);
        gap.apply(out.gap);
        nmg_duration.apply(out.nmg_duration);
        sizes.apply(out.phrase_size);
        out.size_mode = size_mode == "uniform" ? SizeMode::Uniform : SizeMode::Natural;
        return out;
    }
};

/// UNIT=FILE[@ROOT,...]; FILE holds a dependency grammar or a model.
std::shared_ptr<const Detector> external_detector(const std::string& spec,
                                                  std::shared_ptr<const Detector> inner,
                                                  const SearchBudget& budget, UnitId& unit) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw LoadError("--external expects UNIT=FILE[@ROOTS]: " + spec);
    unit = spec.substr(0, eq);
    std::string file = spec.substr(eq + 1);
    std::vector<std::string> roots;
    if (const auto at = file.rfind('@'); at != std::string::npos) {
        std::stringstream ss(file.substr(at + 1));
        for (std::string r; std::getline(ss, r, ',');) roots.push_back(r);
        file = file.substr(0, at);
    }
    const auto j = read_json_file(file);
    Model m;
    if (j.contains("categories")) {
        m = compile_dep_grammar(dep_grammar_from_json(j));
        if (roots.empty()) roots = {"cat:*"};
    } else {
        m = model_from_json(j);
    }
    if (roots.empty()) throw LoadError("--external " + spec + ": roots required for a model file");
    auto parser = std::make_shared<const Parser>(std::move(m));
    parser->resolve_roots(roots);
    return std::make_shared<ExternalParseDetector>(parser, std::move(inner), roots, budget, unit);
}

int cmd_validate(const std::string& model_path) {
    const Model m = load_model(model_path);
    const auto report = validate_model(m);
    if (report.valid()) {
        std::cout << model_path << ": valid (" << m.units.size() << " units)\n";
        return kOk;
    }
    std::cout << report.to_string();
    return kInvalid;
}

struct ParseFlags {
    std::string model, annotation, output;
    std::vector<std::string> roots, externals;
    std::size_t budget = SearchBudget{}.max_expansions;
    std::size_t max_solutions = SearchBudget{}.max_solutions;
    bool unlimited = false, emit_partial = false, strict = false;
};

int cmd_parse(const ParseFlags& f) {
    const Model model = load_model(f.model);
    const AnnotationDoc doc = load_annotation(f.annotation, &model);
    const Parser parser(model);

    SearchBudget budget{f.budget, f.max_solutions};
    if (f.unlimited) budget = SearchBudget::unlimited();

    std::shared_ptr<const Detector> base = annotation_detector(doc, model);
    auto routed = std::make_shared<RoutingDetector>(base);
    for (const auto& spec : f.externals) {
        UnitId unit;
        auto det = external_detector(spec, base, budget, unit);
        if (!model.external.count(unit)) throw LoadError("--external: " + unit + " is not an external unit");
        routed->route(unit, std::move(det));
    }

    ParseRequest req;
    req.roots = root_specs(parser, f.roots);
    req.detector = routed;
    req.budget = budget;
    req.span = doc.span;
    req.emit_partial = f.emit_partial;
    ParseResult result = parser.parse(req);
    result.solutions = rank_solutions(std::move(result.solutions));
    save_solutions(result.solutions, f.output);

    std::cout << result.solutions.size() << " solutions";
    if (!result.solutions.empty()) std::cout << ", top score " << result.solutions.front().score;
    std::cout << ", " << result.expansions << " expansions";
    if (result.truncated) std::cout << ", truncated";
    std::cout << "\n";
    return result.truncated && f.strict ? kTruncated : kOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Hybrid grammar parser for multi-articulator timed input"};
    app.require_subcommand(1, 1);

    std::string model_path;
    auto* validate = app.add_subcommand("validate", "check a model");
    validate->add_option("-m,--model", model_path, "model JSON")->required();

    std::string grammar_path, out_path;
    auto* compile = app.add_subcommand("compile-dep", "compile a dependency grammar into a model");
    compile->add_option("-g,--grammar", grammar_path, "grammar JSON")->required();
    compile->add_option("-o,--output", out_path, "model JSON")->required();

    ParseFlags pf;
    auto* parse_cmd = app.add_subcommand("parse", "parse an annotation");
    parse_cmd->add_option("-m,--model", pf.model, "model JSON")->required();
    parse_cmd->add_option("-a,--annotation", pf.annotation, "annotation JSON or CSV")->required();
    parse_cmd->add_option("--roots", pf.roots, "root units; a trailing * matches a prefix")->required();
    parse_cmd->add_option("--budget", pf.budget, "maximum expansions")->capture_default_str();
    parse_cmd->add_option("--max-solutions", pf.max_solutions, "maximum solutions")->capture_default_str();
    parse_cmd->add_flag("--unlimited", pf.unlimited, "no search budget");
    parse_cmd->add_flag("--emit-partial", pf.emit_partial, "keep instances with missing children");
    parse_cmd->add_option("--external", pf.externals, "UNIT=FILE[@ROOTS]: supply UNIT by parsing with FILE");
    parse_cmd->add_flag("--strict", pf.strict, "exit 3 when the budget truncated the search");
    parse_cmd->add_option("-o,--output", pf.output, "solutions JSON")->required();

    ParamFlags gg;
    auto* gen_grammar = app.add_subcommand("gen-grammar", "generate a random dependency grammar");
    gg.add(gen_grammar);
    gen_grammar->add_option("-o,--output", out_path, "grammar JSON")->required();

    ParamFlags gc;
    std::size_t n_grammars = 1, n_phrases = 1;
    int jobs = 0;
    auto* gen_corpus = app.add_subcommand("gen-corpus", "generate grammars with ground-truth phrases");
    gc.add(gen_corpus);
    gen_corpus->add_option("--grammars", n_grammars, "number of grammars")->capture_default_str();
    gen_corpus->add_option("--phrases", n_phrases, "phrases per grammar")->capture_default_str();
    gen_corpus->add_option("--jobs", jobs, "worker threads (0: all cores)");
    gen_corpus->add_option("-o,--output", out_path, "corpus directory")->required();

    std::string corpus_dir, csv_path;
    std::size_t corpus_budget = SearchBudget{}.max_expansions;
    std::size_t bucket_width = 1;
    bool corpus_unlimited = false;
    auto* parse_corpus = app.add_subcommand("parse-corpus", "parse every phrase of a corpus");
    parse_corpus->add_option("--corpus", corpus_dir, "corpus directory with manifest.json")->required();
    parse_corpus->add_option("--budget", corpus_budget, "maximum expansions per phrase")->capture_default_str();
    parse_corpus->add_flag("--unlimited", corpus_unlimited, "no search budget");
    parse_corpus->add_option("--jobs", jobs, "worker threads (0: all cores)");
    parse_corpus->add_option("--summary", csv_path, "also write the per-bucket CSV");
    parse_corpus->add_option("--bucket-width", bucket_width, "phrase sizes per bucket")->capture_default_str();
    parse_corpus->add_option("-o,--output", out_path, "solutions directory")->required();

    std::string solutions_dir, truth_dir, phrases_dir;
    auto* eval = app.add_subcommand("eval", "score solutions against ground truth");
    eval->add_option("--solutions-dir", solutions_dir, "solutions directory")->required();
    eval->add_option("--truth-dir", truth_dir, "truth directory")->required();
    eval->add_option("--phrases-dir", phrases_dir, "phrase directory (default: sibling phrases/)");
    eval->add_option("--bucket-width", bucket_width, "phrase sizes per bucket")->capture_default_str();
    eval->add_option("--jobs", jobs, "worker threads (0: all cores)");
    eval->add_option("-o,--output", out_path, "summary CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kIo;
    }

    try {
        if (*validate) return cmd_validate(model_path);
        if (*compile) {
            const Model m = compile_dep_grammar(load_dep_grammar(grammar_path));
            save_model(m, out_path);
            std::cout << "compiled " << m.units.size() << " units to " << out_path << "\n";
            return kOk;
        }
        if (*parse_cmd) return cmd_parse(pf);
        if (*gen_grammar) {
            const DepGrammar g = generate_grammar(gg.get());
            save_dep_grammar(g, out_path);
            std::cout << "wrote " << g.categories.size() << " categories to " << out_path << "\n";
            return kOk;
        }
        if (*gen_corpus) {
            const auto m = generate_corpus(gc.get(), n_grammars, n_phrases, out_path, jobs);
            std::cout << "wrote " << m.entries.size() << " phrases to " << out_path << "\n";
            return kOk;
        }
        if (*parse_corpus) {
            const auto manifest = load_manifest(fs::path(corpus_dir) / "manifest.json");
            BatchOptions o;
            o.budget.max_expansions = corpus_budget;
            if (corpus_unlimited) o.budget = SearchBudget::unlimited();
            o.solutions_dir = out_path;
            o.jobs = jobs;
            fs::create_directories(out_path);
            const auto reports = run_corpus(manifest, corpus_dir, o);
            std::size_t found = 0;
            for (const auto& r : reports) found += r.ground_truth_found ? 1 : 0;
            if (!csv_path.empty()) write_text_file(csv_path, summary_to_csv(summarize(reports, bucket_width)));
            std::cout << "parsed " << reports.size() << " phrases, truth found in " << found << "\n";
            return kOk;
        }
        if (*eval) {
            if (phrases_dir.empty()) phrases_dir = (fs::path(truth_dir).parent_path() / "phrases").string();
            const auto reports = score_directories(solutions_dir, truth_dir, phrases_dir, jobs);
            const auto summary = summarize(reports, bucket_width);
            write_text_file(out_path, summary_to_csv(summary));
            std::cout << summary.n_phrases() << " phrases in " << summary.buckets.size() << " buckets\n";
            return kOk;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
