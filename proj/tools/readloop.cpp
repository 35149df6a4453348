// readloop: run matched experiments, render reports, validate and synthesize content.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "readloop/readloop.hpp"

namespace fs = std::filesystem;
using namespace readloop;

namespace {

int cmd_run(const fs::path& config_path, std::uint64_t seed, const fs::path& out) {
    const auto start = std::chrono::steady_clock::now();
    LoadedRun run = load_run(load_run_config(config_path), seed);
    const ExperimentResult res = run_experiment(run.config.experiment, run.ontology, run.bundle);
    write_results(res, out);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    std::cout << report_markdown(results_to_json(res)) << "\nwrote " << (out / "results.json").string() << " (" << ms << " ms)\n";
    return 0;
}

int cmd_report(const fs::path& results_path, const fs::path& out_dir) {
    const auto j = json::parse(read_text_file(results_path));
    std::cout << report_markdown(j);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(out_dir / "report.md", report_markdown(j));
        write_file(out_dir / "deltas.svg", deltas_svg(j));
        write_file(out_dir / "cycle_accuracy.svg", cycle_accuracy_svg(j));
    }
    return 0;
}

int cmd_validate(const fs::path& ontology_path, const std::vector<fs::path>& bundles, const fs::path& words_path) {
    const std::string doc = read_text_file(ontology_path);
    const Ontology o = ontology_from_yaml(detail::load_yaml(doc));
    const auto violations = validate_ontology(o);
    const auto cov = coverage_summary(o);
    std::cout << o.subject_id << " v" << o.version << ": " << cov.chapter_count << " chapters, " << cov.lo_count << " learning objectives, " << cov.kc_count
              << " knowledge components\n";
    for (const auto& v : violations) std::cout << "  " << describe(v) << "\n";
    if (!violations.empty()) return 1;
    if (!bundles.empty()) {
        const auto words = FamiliarWordList::load(words_path);
        const auto b = ingest_bundle(bundles, o, words);
        std::size_t events = 0;
        for (const auto& p : b.passages) events += segment_passage(p, o).size();
        std::cout << "bundle: " << b.passages.size() << " passages (" << events << " teaching events), " << b.items.size() << " items\n";
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_synth(const fs::path& ontology_path, const fs::path& spec_path, std::uint64_t seed, const fs::path& words_path, const fs::path& out) {
    const Ontology o = parse_ontology(read_text_file(ontology_path));
    const SynthesisSpec spec = parse_synthesis_spec(detail::load_yaml(read_text_file(spec_path)), "");
    const auto words = FamiliarWordList::load(words_path);
    const auto b = synthesize_bundle(o, spec, seed, words);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file(out, serialize_bundle(b));
    std::cout << "wrote " << out.string() << ": " << b.passages.size() << " passages, " << b.items.size() << " items\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated reading/assessment experiments over curated course ontologies"};
    app.require_subcommand(1);

    fs::path config, out = "results";
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run an adaptive-versus-control experiment");
    run->add_option("--config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Master seed")->required();
    run->add_option("--out", out, "Output directory");

    fs::path results, report_out;
    auto* report = app.add_subcommand("report", "Print tables and redraw plots from results.json");
    report->add_option("--results", results, "results.json")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Directory for report.md and plots");

    fs::path ontology, words = "data/familiar_words.txt";
    std::vector<fs::path> bundles;
    auto* validate = app.add_subcommand("validate", "Check an ontology and optional content bundles");
    validate->add_option("--ontology", ontology, "Ontology file")->required()->check(CLI::ExistingFile);
    validate->add_option("--bundle", bundles, "Bundle file(s)")->check(CLI::ExistingFile);
    validate->add_option("--words", words, "Familiar word list");

    fs::path spec, synth_out;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic content bundle");
    synth->add_option("--ontology", ontology, "Ontology file")->required()->check(CLI::ExistingFile);
    synth->add_option("--spec", spec, "Synthesis spec (YAML)")->required()->check(CLI::ExistingFile);
    synth->add_option("--seed", synth_seed, "Generator seed")->required();
    synth->add_option("--words", words, "Familiar word list");
    synth->add_option("--out", synth_out, "Bundle file to write")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, seed, out);
        if (*report) return cmd_report(results, report_out);
        if (*validate) return cmd_validate(ontology, bundles, words);
        if (*synth) return cmd_synth(ontology, spec, synth_seed, words, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
