#include "catch_amalgamated.hpp"

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "support.hpp"

using namespace readloop;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Output {
    int status = -1;
    std::string text;
};

Output cli(const std::string& args) {
    const std::string cmd = std::string("\"") + READLOOP_CLI + "\" " + args + " 2>&1";
    Output out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    while (const auto n = fread(buf.data(), 1, buf.size(), pipe)) out.text.append(buf.data(), n);
    const int raw = pclose(pipe);
    out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return out;
}

std::string src(const std::string& rel) { return (support::source_dir() / rel).string(); }

}  // namespace

TEST_CASE("validate reports fixture sizes") {
    const auto r = cli("validate --ontology " + src("data/ontologies/computer_science.yaml"));
    CHECK(r.status == 0);
    CHECK_THAT(r.text, ContainsSubstring("16 chapters, 53 learning objectives, 131 knowledge components"));
}

TEST_CASE("validate flags a broken ontology") {
    const auto dir = support::scratch_dir("cli_bad");
    std::ofstream(dir / "bad.yaml") << "subject_id: x\nversion: 1\nchapters: []\nlearning_objectives: []\nknowledge_components: {k: {label: y}}\n";
    const auto r = cli("validate --ontology " + (dir / "bad.yaml").string());
    CHECK(r.status == 1);
    CHECK_THAT(r.text, ContainsSubstring("orphan KC [k]"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("synth writes a bundle that validate accepts") {
    const auto dir = support::scratch_dir("cli_synth");
    std::ofstream(dir / "spec.yaml") << "lo_ids: [cs_lo07_1, cs_lo08_1]\ncycles: 2\nitems_per_cycle: 2\n";
    const auto bundle = (dir / "bundle.yaml").string();
    auto r = cli("synth --ontology " + src("data/ontologies/computer_science.yaml") + " --spec " + (dir / "spec.yaml").string() + " --seed 4 --words " +
                 src("data/familiar_words.txt") + " --out " + bundle);
    REQUIRE(r.status == 0);
    CHECK_THAT(r.text, ContainsSubstring("8 items"));
    r = cli("validate --ontology " + src("data/ontologies/computer_science.yaml") + " --bundle " + bundle + " --words " + src("data/familiar_words.txt"));
    CHECK(r.status == 0);
    CHECK_THAT(r.text, ContainsSubstring("8 items"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run then report") {
    const auto dir = support::scratch_dir("cli_run");
    std::ofstream(dir / "run.yaml") << "ontology: " << src("data/ontologies/computer_science.yaml") << "\nfamiliar_words: " << src("data/familiar_words.txt")
                                    << "\nsynthesis: {}\nlo_ids: [cs_lo07_1]\ncycles: 2\nitems_per_cycle: 2\ncohort: {size: 12}\nbootstrap_resamples: 200\n";
    auto r = cli("run --config " + (dir / "run.yaml").string() + " --seed 3 --out " + (dir / "out").string());
    REQUIRE(r.status == 0);
    CHECK_THAT(r.text, ContainsSubstring("accuracy"));
    for (const auto* f : {"results.json", "responses_adaptive.jsonl", "responses_control.jsonl", "deltas.svg", "cycle_accuracy.svg"})
        CHECK(std::filesystem::exists(dir / "out" / f));
    const auto results = json::parse(read_text_file(dir / "out" / "results.json"));
    CHECK(results["conditions"]["adaptive"]["response_count"] == 48);

    r = cli("report --results " + (dir / "out" / "results.json").string() + " --out " + (dir / "report").string());
    CHECK(r.status == 0);
    CHECK(std::filesystem::exists(dir / "report" / "report.md"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors exit nonzero") {
    CHECK(cli("").status != 0);
    CHECK(cli("run --seed 1").status != 0);
    const auto dir = support::scratch_dir("cli_err");
    std::ofstream(dir / "run.yaml") << "ontology: missing.yaml\nsynthesis: {}\nlo_ids: [a]\n";
    const auto r = cli("run --config " + (dir / "run.yaml").string() + " --seed 1 --out " + (dir / "o").string());
    CHECK(r.status == 2);
    CHECK_THAT(r.text, ContainsSubstring("error:"));
    std::filesystem::remove_all(dir);
}
