#include "catch_amalgamated.hpp"

#include "support.hpp"

using namespace readloop;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

const Ontology& plants() {
    static const Ontology o = parse_ontology(R"(subject_id: botany
version: 2
chapters:
  - id: ch1
    title: Plants
    learning_objectives: [lo1]
learning_objectives:
  - id: lo1
    statement: Explain how plants get food
    kc_ids: [kc_photo, kc_roots]
knowledge_components:
  kc_photo:
    label: photosynthesis
    description: plants make sugar from light
    misconceptions:
      - id: mc_soil
        description: plants get food from soil
  kc_roots:
    label: roots
    description: roots take up water
)");
    return o;
}

ReadingPassage passage(std::string text, std::vector<std::string> kcs = {"kc_photo", "kc_roots"}) {
    ReadingPassage p;
    p.passage_id = "p1";
    p.lo_id = "lo1";
    p.kc_ids = std::move(kcs);
    p.text = std::move(text);
    return p;
}

std::string words(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += i ? " word" : "word";
    return s;
}

const char* kMinimalBundle = R"(subject_id: botany
ontology_version: 2
passages:
  - passage_id: p1
    lo_id: lo1
    cycle: 1
    variant: {support_tier: 0.75}
    text: Plants make food through photosynthesis. Roots take up water.
items:
  - item_id: q1
    lo_id: lo1
    kc_ids: [kc_photo]
    stem: Where does plant food come from?
    difficulty_band: hard
    options:
      - {option_id: a, text: Light, correct: true}
      - {option_id: b, text: Soil, misconception_id: mc_soil}
)";

}  // namespace

TEST_CASE("clarity anchors") {
    CHECK(clarity_from_length("one two three four five six seven eight") == 1.0);
    CHECK(clarity_from_length("short") == 1.0);
    CHECK_THAT(clarity_from_length(words(34)), WithinAbs(0.5, 1e-15));
    CHECK(clarity_from_length(words(60)) == kClarityFloor);
    CHECK(clarity_from_length(words(200)) == kClarityFloor);
}

TEST_CASE("refutation cues count whole-word phrases") {
    CHECK(count_refutation_cues("Heat rises.") == 0);
    CHECK(count_refutation_cues("A common misconception is this.") == 1);
    CHECK(count_refutation_cues("Use X rather than Y, and do not assume Z.") == 2);
    CHECK(refutation_from_cues("Use X rather than Y, and do not assume Z.") == 1.0);
    CHECK(refutation_from_cues("Students incorrectly think so.") == 0.7);
    CHECK(count_refutation_cues("Donot rather-than") == 1);  // tokenizer splits the hyphen
    CHECK(count_refutation_cues("Instead, of course") == 1);
    CHECK(count_refutation_cues("Instead they wait") == 0);
}

TEST_CASE("refutation followed by its correction is one full-strength event") {
    const auto events = segment_passage(passage("Plants do not get food from soil. They make food through photosynthesis."), plants());
    REQUIRE(events.size() == 1);
    CHECK(events[0].refutation_strength == 1.0);
    CHECK_FALSE(events[0].is_refresh);
    CHECK(events[0].proposition_id == "p1.e1");
    CHECK(events[0].kc_ids == std::vector<std::string>{"kc_photo"});
}

TEST_CASE("events partition the passage in order") {
    const std::string text = "Roots take up water. Light drives photosynthesis in leaves. Students incorrectly think soil is food. It is not. Roots anchor plants.";
    const auto p = passage(text);
    const auto events = segment_passage(p, plants());
    REQUIRE(events.size() == 4);
    std::string rebuilt;
    std::size_t prev_end = 0;
    for (const auto& e : events) {
        CHECK(e.span.begin >= prev_end);
        CHECK(text.substr(e.span.begin, e.span.size()) == e.text);
        rebuilt += text.substr(prev_end, e.span.end - prev_end);
        prev_end = e.span.end;
    }
    CHECK(rebuilt == text);
    CHECK(events[0].kc_ids == std::vector<std::string>{"kc_roots"});
    CHECK(events[1].kc_ids == std::vector<std::string>{"kc_photo"});
    CHECK(events[2].refutation_strength == 1.0);
    CHECK(events[2].kc_ids == std::vector<std::string>{"kc_photo", "kc_roots"});  // no label words: fallback
    CHECK(events[3].refutation_strength == 0.0);
}

TEST_CASE("refresh marks only review material on review KCs") {
    auto p = passage("Photosynthesis makes sugar. Roots take up water. Photosynthesis needs light.");
    p.config.review_kcs = {"kc_photo"};
    CHECK(std::ranges::none_of(segment_passage(p, plants()), [](const auto& e) { return e.is_refresh; }));

    p.review_offset = p.text.find("Roots");
    const auto events = segment_passage(p, plants());
    CHECK_FALSE(events[0].is_refresh);
    CHECK_FALSE(events[1].is_refresh);
    CHECK(events[2].is_refresh);

    auto snippet = passage("Photosynthesis makes sugar.", {"kc_photo"});
    snippet.review_kc = "kc_photo";
    snippet.config.review_kcs = {"kc_photo"};
    CHECK(segment_passage(snippet, plants())[0].is_refresh);
}

TEST_CASE("passages without known KCs are rejected") {
    CHECK_THROWS_WITH(segment_passage(passage("Text.", {"kc_unknown"}), plants()), ContainsSubstring("unlinked passage: p1"));
    CHECK_THROWS_AS(segment_passage(passage("   "), plants()), BundleError);
}

TEST_CASE("minimal bundle parses") {
    const auto b = parse_bundle(kMinimalBundle, plants(), support::words());
    REQUIRE(b.passages.size() == 1);
    REQUIRE(b.items.size() == 1);
    CHECK(b.passages[0].kc_ids == std::vector<std::string>{"kc_photo", "kc_roots"});
    CHECK(b.passages[0].config.depth == 0.75);
    CHECK(b.passages[0].cycle == 1);
    CHECK(b.passages[0].readability == dale_chall_score(b.passages[0].text, support::words()));
    CHECK(b.items[0].difficulty_band == DifficultyBand::hard);
    CHECK(b.items[0].delivery_context == DeliveryContext::summative);
    CHECK(b.items[0].options[1].misconception_id == "mc_soil");
    CHECK(parse_bundle(serialize_bundle(b), plants(), support::words()) == b);
}

TEST_CASE("bundle errors name the offending entity") {
    auto fails_with = [](std::string doc, const std::string& from, const std::string& to, const std::string& message) {
        doc.replace(doc.find(from), from.size(), to);
        CHECK_THROWS_WITH(parse_bundle(doc, plants(), support::words()), ContainsSubstring(message));
    };
    fails_with(kMinimalBundle, "kc_ids: [kc_photo]", "kc_ids: [kc_ghost]", "kc_ghost");
    fails_with(kMinimalBundle, "lo_id: lo1\n    cycle", "lo_id: lo9\n    cycle", "lo9");
    fails_with(kMinimalBundle, "text: Soil, misconception_id: mc_soil", "text: Soil, correct: true", "2 correct options");
    fails_with(kMinimalBundle, "text: Light, correct: true", "text: Light", "0 correct options");
    fails_with(kMinimalBundle, "mc_soil", "mc_other", "unknown misconception mc_other");
    fails_with(kMinimalBundle, "ontology_version: 2", "ontology_version: 1", "version 1");
    fails_with(kMinimalBundle, "difficulty_band: hard", "difficulty_band: brutal", "brutal");
    fails_with(kMinimalBundle, "cycle: 1", "cycle: 0", "cycles start at 1");

    std::string dup = kMinimalBundle;
    dup += "  - item_id: q1\n    lo_id: lo1\n    kc_ids: [kc_photo]\n    stem: Again?\n    options:\n      - {option_id: a, text: x, correct: true}\n      - {option_id: b, text: y}\n";
    CHECK_THROWS_WITH(parse_bundle(dup, plants(), support::words()), ContainsSubstring("duplicate item_id q1"));
}

TEST_CASE("synthesized bundle covers the spec") {
    const auto& o = support::ontology("computer_science");
    const auto b = synthesize_bundle(o, support::cs_spec(), 11, support::words());
    CHECK(b.items.size() == 36);
    CHECK_NOTHROW(validate_bundle(b, o));
    for (const auto& item : b.items) {
        CHECK(item.options.size() >= 2);
        CHECK(std::ranges::count_if(item.options, [](const Option& op) { return op.correct; }) == 1);
    }
    // every passage segments cleanly
    std::size_t events = 0;
    for (const auto& p : b.passages) events += segment_passage(p, o).size();
    CHECK(events > b.passages.size());
}

TEST_CASE("synthesis is byte-identical for a seed") {
    const auto& o = support::ontology("computer_science");
    const auto a = serialize_bundle(synthesize_bundle(o, support::cs_spec(), 99, support::words()));
    const auto b = serialize_bundle(synthesize_bundle(o, support::cs_spec(), 99, support::words()));
    CHECK(a == b);
    CHECK(a != serialize_bundle(synthesize_bundle(o, support::cs_spec(), 100, support::words())));
}

TEST_CASE("top-tier passages refute every catalogued misconception") {
    const auto& o = support::ontology("computer_science");
    const auto b = synthesize_bundle(o, support::cs_spec(), 5, support::words());
    std::size_t checked = 0;
    for (const auto& p : b.passages) {
        if (p.review_kc || p.config.refutation_emphasis != 1.0) continue;
        const auto events = segment_passage(p, o);
        for (const auto& kc : p.kc_ids) {
            for (const auto& m : o.find_kc(kc)->misconceptions) {
                const auto needle = text::to_lower(m.description.substr(0, m.description.size() - (m.description.back() == '.' ? 1 : 0)));
                const bool refuted = std::ranges::any_of(events, [&](const TeachingEvent& e) {
                    return e.refutation_strength > 0.0 && text::to_lower(e.text).find(needle) != std::string::npos;
                });
                CHECK(refuted);
                ++checked;
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("item stems change across cycles for the same KC") {
    const auto& o = support::ontology("computer_science");
    const auto b = synthesize_bundle(o, support::cs_spec(), 5, support::words());
    std::map<std::string, std::set<std::string>> stems;
    for (const auto& item : b.items) stems[item.lo_id + "/" + item.kc_ids[0]].insert(item.stem);
    for (const auto& [key, s] : stems) CHECK(s.size() == 3);
}

TEST_CASE("vocabulary levels give increasing readability") {
    const auto& o = support::ontology("computer_science");
    const auto b = synthesize_bundle(o, support::cs_spec(), 5, support::words());
    auto find = [&](const std::string& id) { return *std::ranges::find_if(b.passages, [&](const auto& p) { return p.passage_id == id; }); };
    const double v0 = find("cs_lo07_1.c1.t50.v0").readability.value;
    const double v1 = find("cs_lo07_1.c1.t50.v1").readability.value;
    const double v2 = find("cs_lo07_1.c1.t50.v2").readability.value;
    CHECK(v0 < v1);
    CHECK(v1 < v2);
}

TEST_CASE("serialized synthetic bundles parse back equal") {
    const auto& o = support::ontology("computer_science");
    const auto b = synthesize_bundle(o, support::cs_spec(), 3, support::words());
    CHECK(parse_bundle(serialize_bundle(b), o, support::words()) == b);
}

TEST_CASE("ingest merges files and rejects cross-file duplicates") {
    const auto dir = support::scratch_dir("ingest");
    {
        std::ofstream(dir / "a.yaml") << kMinimalBundle;
        std::string second = kMinimalBundle;
        second.replace(second.find("passage_id: p1"), 14, "passage_id: p2");
        second.replace(second.find("item_id: q1"), 11, "item_id: q2");
        std::ofstream(dir / "b.yaml") << second;
    }
    const auto merged = ingest_bundle({dir / "a.yaml", dir / "b.yaml"}, plants(), support::words());
    CHECK(merged.passages.size() == 2);
    CHECK(merged.items.size() == 2);
    CHECK_THROWS_WITH(ingest_bundle({dir / "a.yaml", dir / "a.yaml"}, plants(), support::words()), ContainsSubstring("duplicate passage_id p1"));
    std::filesystem::remove_all(dir);
}
