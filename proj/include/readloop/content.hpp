#pragma once

// Reading passages, teaching events and multiple-choice items.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "readloop/errors.hpp"
#include "readloop/ontology.hpp"
#include "readloop/readability.hpp"
#include "readloop/rng.hpp"
#include "readloop/text.hpp"
#include "readloop/tracing.hpp"

namespace readloop {

struct ReadingPassage {
    std::string passage_id;
    std::string lo_id;
    std::vector<std::string> kc_ids;  // passage-level KC annotation
    std::string text;
    std::vector<std::string> source_chunk_ids;
    ReadingConfig config;
    ReadabilityScore readability;
    std::optional<int> cycle;             // 1-based; unset: usable in any cycle
    std::optional<std::string> review_kc; // set on review snippets
    // Byte offset where appended review material starts; a review snippet is
    // review material throughout.
    std::size_t review_offset = std::string::npos;

    std::size_t review_start() const noexcept { return review_kc ? 0 : review_offset; }
    friend bool operator==(const ReadingPassage&, const ReadingPassage&) = default;
};

struct TeachingEvent {
    std::string proposition_id;
    std::string text;
    std::vector<std::string> kc_ids;
    double clarity = 1.0;
    double refutation_strength = 0.0;
    bool is_refresh = false;
    text::Span span;  // byte range inside the passage text
    friend bool operator==(const TeachingEvent&, const TeachingEvent&) = default;
};

enum class DifficultyBand { easy, medium, hard };
enum class DeliveryContext { summative, formative };

inline std::string_view to_string(DifficultyBand b) {
    switch (b) {
        case DifficultyBand::easy: return "easy";
        case DifficultyBand::medium: return "medium";
        case DifficultyBand::hard: return "hard";
    }
    return "medium";
}

inline std::string_view to_string(DeliveryContext c) { return c == DeliveryContext::summative ? "summative" : "formative"; }

inline DifficultyBand parse_band(std::string_view s) {
    if (s == "easy") return DifficultyBand::easy;
    if (s == "medium") return DifficultyBand::medium;
    if (s == "hard") return DifficultyBand::hard;
    throw SchemaError("difficulty_band", "expected easy, medium or hard, got '" + std::string(s) + "'");
}

inline DeliveryContext parse_context(std::string_view s) {
    if (s == "summative") return DeliveryContext::summative;
    if (s == "formative") return DeliveryContext::formative;
    throw SchemaError("delivery_context", "expected summative or formative, got '" + std::string(s) + "'");
}

struct Option {
    std::string option_id;
    std::string text;
    std::string rationale;
    bool correct = false;
    std::optional<std::string> misconception_id;
    friend bool operator==(const Option&, const Option&) = default;
};

struct AssessmentItem {
    std::string item_id;
    std::string lo_id;
    std::vector<std::string> kc_ids;
    std::string stem;
    std::vector<Option> options;
    DifficultyBand difficulty_band = DifficultyBand::medium;
    DeliveryContext delivery_context = DeliveryContext::summative;
    std::optional<int> cycle;  // 1-based; unset: usable in any cycle
    friend bool operator==(const AssessmentItem&, const AssessmentItem&) = default;
};

struct ContentBundle {
    std::string subject_id;
    std::int64_t ontology_version = 1;
    std::vector<ReadingPassage> passages;
    std::vector<AssessmentItem> items;
    std::optional<std::uint64_t> generator_seed;
    friend bool operator==(const ContentBundle&, const ContentBundle&) = default;
};

class BundleError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Event annotations

inline constexpr double kClarityMinWords = 8.0;
inline constexpr double kClarityMaxWords = 60.0;
inline constexpr double kClarityFloor = 0.05;

/// Shorter events are easier to encode.
inline double clarity_from_length(std::string_view event_text) {
    const double n = static_cast<double>(text::word_count(event_text));
    return std::clamp(1.0 - (n - kClarityMinWords) / (kClarityMaxWords - kClarityMinWords), kClarityFloor, 1.0);
}

inline const std::array<std::vector<std::string>, 5>& refutation_cues() {
    static const std::array<std::vector<std::string>, 5> cues{{
        {"misconception"},
        {"incorrectly"},
        {"rather", "than"},
        {"instead", "of"},
        {"do", "not"},
    }};
    return cues;
}

/// Number of cue phrase occurrences, matched on whole lowercase words.
inline int count_refutation_cues(std::string_view event_text) {
    const auto tokens = text::tokenize(event_text);
    int count = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (const auto& cue : refutation_cues()) {
            if (i + cue.size() > tokens.size()) continue;
            bool hit = true;
            for (std::size_t j = 0; j < cue.size() && hit; ++j) hit = tokens[i + j].word == cue[j];
            count += hit ? 1 : 0;
        }
    }
    return count;
}

inline double refutation_level(int cue_count) {
    if (cue_count <= 0) return 0.0;
    return cue_count == 1 ? 0.7 : 1.0;
}

inline double refutation_from_cues(std::string_view event_text) { return refutation_level(count_refutation_cues(event_text)); }

namespace detail {

/// A KC matches a sentence when every content word of its label occurs in it.
inline bool mentions(const std::set<std::string>& sentence_words, const std::set<std::string>& keywords) {
    if (keywords.empty()) return false;
    return std::ranges::all_of(keywords, [&](const auto& k) { return sentence_words.contains(k); });
}

}  // namespace detail

/// Splits a passage into ordered teaching events.
///
/// A sentence carrying a refutation cue is grouped with the following
/// cue-free sentence (its correction); such a pair counts as one more cue.
/// KC links are the passage KCs whose label keywords occur in the event,
/// falling back to all passage KCs. Events inside review material whose KCs
/// are all review KCs are refresh events.
inline std::vector<TeachingEvent> segment_passage(const ReadingPassage& p, const Ontology& o) {
    if (text::trim(p.text).empty()) throw BundleError("passage " + p.passage_id + " has no text");
    std::vector<std::string> kcs;
    for (const auto& kc : p.kc_ids)
        if (o.find_kc(kc) && std::ranges::find(kcs, kc) == kcs.end()) kcs.push_back(kc);
    if (kcs.empty()) throw BundleError("unlinked passage: " + p.passage_id);

    std::map<std::string, std::set<std::string>> keywords;
    for (const auto& kc : kcs) keywords[kc] = text::content_words(o.find_kc(kc)->label);

    const auto spans = text::sentence_spans(p.text);
    std::vector<TeachingEvent> events;
    const std::string_view body = p.text;
    for (std::size_t i = 0; i < spans.size();) {
        const auto first = body.substr(spans[i].begin, spans[i].size());
        int cues = count_refutation_cues(first);
        std::size_t last = i;
        if (cues > 0 && i + 1 < spans.size()) {
            const auto next = body.substr(spans[i + 1].begin, spans[i + 1].size());
            if (count_refutation_cues(next) == 0) {
                last = i + 1;
                cues += 1;
            }
        }
        TeachingEvent e;
        e.span = {spans[i].begin, spans[last].end};
        e.text = std::string(body.substr(e.span.begin, e.span.size()));
        e.proposition_id = p.passage_id + ".e" + std::to_string(events.size() + 1);
        e.clarity = clarity_from_length(e.text);
        e.refutation_strength = refutation_level(cues);

        const auto words = text::content_words(e.text);
        for (const auto& kc : kcs)
            if (detail::mentions(words, keywords[kc])) e.kc_ids.push_back(kc);
        if (e.kc_ids.empty()) e.kc_ids = kcs;

        if (e.span.begin >= p.review_start())
            e.is_refresh = std::ranges::all_of(e.kc_ids, [&](const auto& kc) { return p.config.review_kcs.contains(kc); });
        events.push_back(std::move(e));
        i = last + 1;
    }
    return events;
}

// ---------------------------------------------------------------------------
// Bundle validation and files

inline void validate_bundle(const ContentBundle& b, const Ontology& o) {
    if (b.subject_id != o.subject_id)
        throw BundleError("bundle subject " + b.subject_id + " does not match ontology subject " + o.subject_id);
    if (b.ontology_version != o.version)
        throw BundleError("bundle was built for ontology version " + std::to_string(b.ontology_version) + " but the ontology is at version " + std::to_string(o.version));

    std::set<std::string> passage_ids;
    for (const auto& p : b.passages) {
        if (!passage_ids.insert(p.passage_id).second) throw BundleError("duplicate passage_id " + p.passage_id);
        if (text::trim(p.text).empty()) throw BundleError("passage " + p.passage_id + " has no text");
        if (p.cycle && *p.cycle < 1) throw BundleError("passage " + p.passage_id + " has cycle " + std::to_string(*p.cycle) + "; cycles start at 1");
        if (!o.find_lo(p.lo_id)) throw BundleError("passage " + p.passage_id + " cites unknown learning objective " + p.lo_id);
        for (const auto& kc : p.kc_ids)
            if (!o.find_kc(kc)) throw BundleError("passage " + p.passage_id + " cites unknown knowledge component " + kc);
        if (p.review_kc && !o.find_kc(*p.review_kc))
            throw BundleError("passage " + p.passage_id + " cites unknown knowledge component " + *p.review_kc);
    }

    std::set<std::string> item_ids;
    for (const auto& item : b.items) {
        if (!item_ids.insert(item.item_id).second) throw BundleError("duplicate item_id " + item.item_id);
        if (item.cycle && *item.cycle < 1) throw BundleError("item " + item.item_id + " has cycle " + std::to_string(*item.cycle) + "; cycles start at 1");
        if (!o.find_lo(item.lo_id)) throw BundleError("item " + item.item_id + " cites unknown learning objective " + item.lo_id);
        if (item.kc_ids.empty()) throw BundleError("item " + item.item_id + " targets no knowledge components");
        for (const auto& kc : item.kc_ids)
            if (!o.find_kc(kc)) throw BundleError("item " + item.item_id + " cites unknown knowledge component " + kc);
        if (item.options.size() < 2) throw BundleError("item " + item.item_id + " needs at least two options");
        const auto correct = std::ranges::count_if(item.options, [](const Option& op) { return op.correct; });
        if (correct != 1) throw BundleError("item " + item.item_id + " has " + std::to_string(correct) + " correct options; exactly one is required");
        std::set<std::string> option_ids;
        for (const auto& op : item.options) {
            if (!option_ids.insert(op.option_id).second) throw BundleError("item " + item.item_id + " repeats option_id " + op.option_id);
            if (!op.misconception_id) continue;
            const bool known = std::ranges::any_of(item.kc_ids, [&](const auto& kc) {
                const auto* k = o.find_kc(kc);
                return std::ranges::any_of(k->misconceptions, [&](const auto& m) { return m.id == *op.misconception_id; });
            });
            if (!known) throw BundleError("item " + item.item_id + " option " + op.option_id + " cites unknown misconception " + *op.misconception_id);
        }
    }
}

namespace detail {

inline std::optional<int> optional_int(const YAML::Node& n, const char* key, const std::string& path) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return std::nullopt;
    try {
        return v.as<int>();
    } catch (const YAML::BadConversion&) {
        throw SchemaError(path + "." + key, "expected an integer");
    }
}

inline double optional_double(const YAML::Node& n, const char* key, const std::string& path, double fallback) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return fallback;
    try {
        return v.as<double>();
    } catch (const YAML::BadConversion&) {
        throw SchemaError(path + "." + key, "expected a number");
    }
}

inline std::vector<std::string> optional_list(const YAML::Node& n, const char* key, const std::string& path) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return {};
    return string_list(n, key, path);
}

}  // namespace detail

/// Parses a bundle document. Readability is recomputed from the text; ids
/// are checked against the ontology.
inline ContentBundle parse_bundle(std::string_view document, const Ontology& o, const FamiliarWordList& words) {
    using namespace detail;
    const YAML::Node root = load_yaml(document);
    if (!root.IsMap()) throw SchemaError("", "document root must be a mapping");
    ContentBundle b;
    b.subject_id = scalar(root, "subject_id", "");
    b.ontology_version = optional_int(root, "ontology_version", "").value_or(static_cast<int>(o.version));
    if (const YAML::Node seed = root["generator_seed"]; seed && !seed.IsNull()) b.generator_seed = seed.as<std::uint64_t>();

    if (const YAML::Node passages = root["passages"]; passages && !passages.IsNull()) {
        if (!passages.IsSequence()) throw SchemaError("passages", "expected a sequence");
        for (std::size_t i = 0; i < passages.size(); ++i) {
            const YAML::Node n = passages[i];
            const std::string path = index_path("passages", i);
            if (!n.IsMap()) throw SchemaError(path, "expected a mapping");
            ReadingPassage p;
            p.passage_id = scalar(n, "passage_id", path);
            p.lo_id = scalar(n, "lo_id", path);
            p.text = scalar(n, "text", path);
            p.kc_ids = optional_list(n, "kc_ids", path);
            if (p.kc_ids.empty())
                if (const auto* lo = o.find_lo(p.lo_id)) p.kc_ids = lo->kc_ids;
            p.source_chunk_ids = optional_list(n, "source_chunk_ids", path);
            p.cycle = optional_int(n, "cycle", path);
            if (auto r = optional_scalar(n, "review_kc", path); !r.empty()) {
                p.review_kc = r;
                p.config.review_kcs = {r};
            }
            if (const YAML::Node v = n["variant"]; v && v.IsMap()) {
                const double tier = optional_double(v, "support_tier", path + ".variant", 0.5);
                p.config.depth = p.config.example_density = p.config.refutation_emphasis = tier;
            }
            try {
                p.readability = dale_chall_score(p.text, words);
            } catch (const Error&) {
                throw BundleError("passage " + p.passage_id + " has no scorable text");
            }
            p.config.target_readability = p.readability.value;
            b.passages.push_back(std::move(p));
        }
    }

    if (const YAML::Node items = root["items"]; items && !items.IsNull()) {
        if (!items.IsSequence()) throw SchemaError("items", "expected a sequence");
        for (std::size_t i = 0; i < items.size(); ++i) {
            const YAML::Node n = items[i];
            const std::string path = index_path("items", i);
            if (!n.IsMap()) throw SchemaError(path, "expected a mapping");
            AssessmentItem item;
            item.item_id = scalar(n, "item_id", path);
            item.lo_id = scalar(n, "lo_id", path);
            item.kc_ids = string_list(n, "kc_ids", path);
            item.stem = scalar(n, "stem", path);
            item.cycle = optional_int(n, "cycle", path);
            if (auto band = optional_scalar(n, "difficulty_band", path); !band.empty()) item.difficulty_band = parse_band(band);
            if (auto ctx = optional_scalar(n, "delivery_context", path); !ctx.empty()) item.delivery_context = parse_context(ctx);
            const YAML::Node options = require(n, "options", path, YAML::NodeType::Sequence);
            for (std::size_t j = 0; j < options.size(); ++j) {
                const std::string opath = path + "." + index_path("options", j);
                const YAML::Node on = options[j];
                if (!on.IsMap()) throw SchemaError(opath, "expected a mapping");
                Option op;
                op.option_id = scalar(on, "option_id", opath);
                op.text = scalar(on, "text", opath);
                op.rationale = optional_scalar(on, "rationale", opath);
                try {
                    op.correct = on["correct"] && !on["correct"].IsNull() && on["correct"].as<bool>();
                } catch (const YAML::BadConversion&) {
                    throw SchemaError(opath + ".correct", "expected true or false");
                }
                if (auto m = optional_scalar(on, "misconception_id", opath); !m.empty()) op.misconception_id = m;
                item.options.push_back(std::move(op));
            }
            b.items.push_back(std::move(item));
        }
    }
    validate_bundle(b, o);
    return b;
}

inline std::string serialize_bundle(const ContentBundle& b) {
    using detail::emit_string;
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "subject_id" << YAML::Value;
    emit_string(out, b.subject_id);
    out << YAML::Key << "ontology_version" << YAML::Value << b.ontology_version;
    if (b.generator_seed) out << YAML::Key << "generator_seed" << YAML::Value << *b.generator_seed;

    out << YAML::Key << "passages" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : b.passages) {
        out << YAML::BeginMap;
        out << YAML::Key << "passage_id" << YAML::Value;
        emit_string(out, p.passage_id);
        out << YAML::Key << "lo_id" << YAML::Value;
        emit_string(out, p.lo_id);
        if (p.cycle) out << YAML::Key << "cycle" << YAML::Value << *p.cycle;
        if (p.review_kc) {
            out << YAML::Key << "review_kc" << YAML::Value;
            emit_string(out, *p.review_kc);
        }
        out << YAML::Key << "kc_ids" << YAML::Value;
        detail::emit_string_list(out, p.kc_ids);
        out << YAML::Key << "source_chunk_ids" << YAML::Value;
        detail::emit_string_list(out, p.source_chunk_ids);
        out << YAML::Key << "variant" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "support_tier" << YAML::Value << p.config.depth;
        out << YAML::EndMap;
        out << YAML::Key << "text" << YAML::Value;
        emit_string(out, p.text);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "items" << YAML::Value << YAML::BeginSeq;
    for (const auto& item : b.items) {
        out << YAML::BeginMap;
        out << YAML::Key << "item_id" << YAML::Value;
        emit_string(out, item.item_id);
        out << YAML::Key << "lo_id" << YAML::Value;
        emit_string(out, item.lo_id);
        if (item.cycle) out << YAML::Key << "cycle" << YAML::Value << *item.cycle;
        out << YAML::Key << "kc_ids" << YAML::Value;
        detail::emit_string_list(out, item.kc_ids);
        out << YAML::Key << "stem" << YAML::Value;
        emit_string(out, item.stem);
        out << YAML::Key << "difficulty_band" << YAML::Value << std::string(to_string(item.difficulty_band));
        out << YAML::Key << "delivery_context" << YAML::Value << std::string(to_string(item.delivery_context));
        out << YAML::Key << "options" << YAML::Value << YAML::BeginSeq;
        for (const auto& op : item.options) {
            out << YAML::BeginMap;
            out << YAML::Key << "option_id" << YAML::Value;
            emit_string(out, op.option_id);
            out << YAML::Key << "text" << YAML::Value;
            emit_string(out, op.text);
            out << YAML::Key << "rationale" << YAML::Value;
            emit_string(out, op.rationale);
            out << YAML::Key << "correct" << YAML::Value << op.correct;
            if (op.misconception_id) {
                out << YAML::Key << "misconception_id" << YAML::Value;
                emit_string(out, *op.misconception_id);
            }
            out << YAML::EndMap;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Loads one or more bundle files for the same subject and merges them.
inline ContentBundle ingest_bundle(const std::vector<std::filesystem::path>& files, const Ontology& o, const FamiliarWordList& words) {
    if (files.empty()) throw BundleError("no bundle files given");
    ContentBundle merged;
    bool first = true;
    for (const auto& f : files) {
        ContentBundle b = parse_bundle(read_text_file(f), o, words);
        if (first) {
            merged = std::move(b);
            first = false;
            continue;
        }
        merged.passages.insert(merged.passages.end(), b.passages.begin(), b.passages.end());
        merged.items.insert(merged.items.end(), b.items.begin(), b.items.end());
    }
    validate_bundle(merged, o);
    return merged;
}

// ---------------------------------------------------------------------------
// Synthetic content

/// Knobs for the deterministic content generator. depth, example_density and
/// refutation_emphasis scale every support tier's passage; vocabulary_levels
/// controls how many readability variants are written per tier.
struct SynthesisSpec {
    std::vector<std::string> lo_ids;
    std::vector<std::string> kc_ids;  // optional restriction; defaults to the LOs' KCs
    int cycles = 3;
    int items_per_cycle = 3;
    double depth = 1.0;
    double example_density = 1.0;
    double refutation_emphasis = 1.0;
    double difficulty = 0.5;  // shifts the band rotation toward easy (0) or hard (1)
    std::vector<double> support_tiers{kSupportTiers.begin(), kSupportTiers.end()};
    int vocabulary_levels = 3;
    bool review_snippets = true;
    friend bool operator==(const SynthesisSpec&, const SynthesisSpec&) = default;
};

namespace detail {

struct Register {
    std::vector<std::string_view> explain;
    std::vector<std::string_view> example;
    std::vector<std::string_view> refute;
    std::vector<std::string_view> correct;
    std::vector<std::string_view> review;
};

// Placeholders: {L} label, {D} description, {T} chapter title, {M} misconception.
inline const std::vector<Register>& registers() {
    static const std::vector<Register> regs{
        {
            {"When you first meet {L}, it helps to think of it as one big idea that you can use again and again in many places.",
             "Put in the most simple way, {D}, and that is the main thing to keep in mind about {L}.",
             "You can think about {L} as a tool that helps you work through a problem one small step at a time.",
             "Many people find that {L} makes more sense once they try it on a small problem of their own."},
            {"For example, you might use {L} when you work on a simple question in {T} with a friend.",
             "Here is an example: a student who uses {L} can check each step and see what happens next."},
            {"A common misconception is that {M}.", "Some people incorrectly think that {M}."},
            {"In fact, {D}.", "The truth is that {D}."},
            {"Let us look again at {L} one more time, because it is easy to forget.", "Remember that {D}."},
        },
        {
            {"{L} is an important concept that appears throughout {T}.",
             "Formally, {D}.",
             "Understanding {L} requires connecting its definition to typical problems.",
             "Students should recognize how {L} relates to neighboring concepts."},
            {"For example, engineers apply {L} when analyzing realistic problems in {T}.",
             "Consider a typical exercise where {L} determines the correct approach."},
            {"A common misconception is that {M}.", "Students often incorrectly assume that {M}."},
            {"Actually, {D}.", "In reality, {D}."},
            {"Reviewing {L} again strengthens earlier understanding.", "Recall that {D}."},
        },
        {
            {"Formally, {L} constitutes a fundamental construct underlying {T}.",
             "Conceptually, {D}, notwithstanding considerable contextual variability.",
             "Rigorous characterization of {L} necessitates systematic consideration of theoretical assumptions.",
             "Sophisticated practitioners integrate {L} with complementary analytical frameworks."},
            {"Consider, illustratively, specialized applications of {L} within advanced {T} contexts.",
             "Empirical investigations frequently demonstrate {L} operating under nontrivial constraints."},
            {"A prevalent misconception asserts that {M}.", "Practitioners incorrectly presuppose that {M}."},
            {"Accurately characterized, {D}.", "Rigorously, {D}."},
            {"Revisiting {L} consolidates previously established conceptualizations.", "Recapitulating, {D}."},
        },
    };
    return regs;
}

inline std::string lower_first(std::string s) {
    if (!s.empty()) s[0] = text::lower(s[0]);
    return s;
}

inline std::string upper_first(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

inline std::string strip_period(std::string s) {
    while (!s.empty() && (s.back() == '.' || text::is_space(s.back()))) s.pop_back();
    return s;
}

struct Fill {
    std::string label, description, title, misconception;
};

inline std::string render(std::string_view tmpl, const Fill& f) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
            const char key = tmpl[i + 1];
            const std::string* v = key == 'L' ? &f.label : key == 'D' ? &f.description : key == 'T' ? &f.title : key == 'M' ? &f.misconception : nullptr;
            if (v) {
                out += *v;
                i += 2;
                continue;
            }
        }
        out.push_back(tmpl[i]);
    }
    return upper_first(out);
}

inline std::string chapter_title_for(const Ontology& o, const std::string& lo_id) {
    for (const auto& c : o.chapters)
        if (std::ranges::find(c.lo_ids, lo_id) != c.lo_ids.end()) return text::to_lower(c.title);
    return "this course";
}

inline std::string tier_tag(double tier) { return std::to_string(static_cast<int>(std::lround(tier * 100))); }

inline const std::array<std::string_view, 4>& stem_templates() {
    static const std::array<std::string_view, 4> stems{
        "Which statement best describes {L}?",
        "Which of the following is true about {L}?",
        "A classmate asks about {L}. Which answer is most accurate?",
        "What is the most accurate claim about {L}?",
    };
    return stems;
}

inline const std::array<std::string_view, 4>& correct_templates() {
    static const std::array<std::string_view, 4> forms{"{D}.", "It is true that {D}.", "The accurate view is that {D}.", "Experts agree that {D}."};
    return forms;
}

}  // namespace detail

/// Deterministic stand-in for generated content. For every LO and cycle it
/// writes one main passage per (support tier, vocabulary level), review
/// snippets per KC and level, and `items_per_cycle` fresh item variants that
/// keep their KC alignment across cycles.
inline ContentBundle synthesize_bundle(const Ontology& o, const SynthesisSpec& spec, std::uint64_t seed, const FamiliarWordList& words) {
    if (spec.lo_ids.empty()) throw Error("synthesis spec lists no learning objectives");
    if (spec.cycles < 1 || spec.items_per_cycle < 1) throw Error("synthesis spec needs cycles >= 1 and items_per_cycle >= 1");
    for (const auto& lo : spec.lo_ids)
        if (!o.find_lo(lo)) throw Error("synthesis spec references unknown learning objective " + lo);
    for (const auto& kc : spec.kc_ids)
        if (!o.find_kc(kc)) throw Error("synthesis spec references unknown knowledge component " + kc);
    const int levels = std::clamp(spec.vocabulary_levels, 1, static_cast<int>(detail::registers().size()));

    ContentBundle b;
    b.subject_id = o.subject_id;
    b.ontology_version = o.version;
    b.generator_seed = seed;

    auto allowed = [&](const std::string& kc) { return spec.kc_ids.empty() || std::ranges::find(spec.kc_ids, kc) != spec.kc_ids.end(); };
    auto pick = [](Rng& rng, const auto& options) -> std::string_view { return options[rng.below(options.size())]; };

    auto make_passage = [&](std::string id, const std::string& lo_id, std::vector<std::string> kcs, int cycle, double tier, std::string body,
                            std::optional<std::string> review_kc) {
        ReadingPassage p;
        p.passage_id = std::move(id);
        p.lo_id = lo_id;
        p.kc_ids = std::move(kcs);
        p.text = std::move(body);
        p.source_chunk_ids = {"synthetic:" + lo_id};
        p.cycle = cycle + 1;
        p.review_kc = std::move(review_kc);
        if (p.review_kc) p.config.review_kcs = {*p.review_kc};
        p.config.depth = p.config.example_density = p.config.refutation_emphasis = tier;
        p.readability = dale_chall_score(p.text, words);
        p.config.target_readability = p.readability.value;
        b.passages.push_back(std::move(p));
    };

    std::set<std::string> reviewed;
    for (const auto& lo_id : spec.lo_ids) {
        const LearningObjective& lo = *o.find_lo(lo_id);
        std::vector<const KnowledgeComponent*> kcs;
        for (const auto& kc : lo.kc_ids)
            if (allowed(kc)) kcs.push_back(o.find_kc(kc));
        if (kcs.empty()) throw Error("synthesis spec leaves learning objective " + lo_id + " without knowledge components");
        std::vector<std::string> kc_ids;
        for (const auto* k : kcs) kc_ids.push_back(k->id);
        const std::string title = detail::chapter_title_for(o, lo_id);

        for (int cycle = 0; cycle < spec.cycles; ++cycle) {
            for (double tier : spec.support_tiers) {
                const int n_explain = 1 + static_cast<int>(std::floor(3.0 * spec.depth * tier + 1e-9));
                const int n_examples = static_cast<int>(std::floor(2.0 * spec.example_density * tier + 1e-9));
                for (int level = 0; level < levels; ++level) {
                    const auto& reg = detail::registers()[static_cast<std::size_t>(level)];
                    Rng rng(derive_seed(seed, hash_label(lo_id + "/" + std::to_string(cycle) + "/" + detail::tier_tag(tier) + "/" + std::to_string(level))));
                    std::string body;
                    auto add = [&](const std::string& sentence) {
                        if (!body.empty()) body += ' ';
                        body += sentence;
                    };
                    for (const auto* k : kcs) {
                        detail::Fill fill{k->label, detail::lower_first(detail::strip_period(k->description)), title, {}};
                        std::vector<std::string_view> explain(reg.explain.begin(), reg.explain.end());
                        rng.shuffle(explain.begin(), explain.end());
                        for (int s = 0; s < n_explain; ++s) add(detail::render(explain[static_cast<std::size_t>(s) % explain.size()], fill));
                        for (int s = 0; s < n_examples; ++s) add(detail::render(reg.example[static_cast<std::size_t>(s) % reg.example.size()], fill));
                        const std::size_t m = k->misconceptions.size();
                        const int n_refute = m == 0 ? 0 : static_cast<int>(std::lround(spec.refutation_emphasis * tier * 2.0 * static_cast<double>(m)));
                        for (int r = 0; r < n_refute; ++r) {
                            const auto& mis = k->misconceptions[(static_cast<std::size_t>(r) + static_cast<std::size_t>(cycle)) % m];
                            fill.misconception = detail::lower_first(detail::strip_period(mis.description));
                            add(detail::render(pick(rng, reg.refute), fill));
                            add(detail::render(pick(rng, reg.correct), fill));
                        }
                    }
                    make_passage(lo_id + ".c" + std::to_string(cycle + 1) + ".t" + detail::tier_tag(tier) + ".v" + std::to_string(level), lo_id, kc_ids,
                                 cycle, tier, std::move(body), std::nullopt);
                }
            }
            if (spec.review_snippets) {
                for (const auto* k : kcs) {
                    if (!reviewed.insert(k->id + "/" + std::to_string(cycle)).second) continue;  // KC shared with an earlier LO
                    for (int level = 0; level < levels; ++level) {
                        const auto& reg = detail::registers()[static_cast<std::size_t>(level)];
                        detail::Fill fill{k->label, detail::lower_first(detail::strip_period(k->description)), title, {}};
                        std::string body = detail::render(reg.review[0], fill) + " " + detail::render(reg.review[1], fill);
                        if (!k->misconceptions.empty() && spec.refutation_emphasis > 0.0) {
                            const auto& mis = k->misconceptions[static_cast<std::size_t>(cycle) % k->misconceptions.size()];
                            fill.misconception = detail::lower_first(detail::strip_period(mis.description));
                            body += " " + detail::render(reg.refute[0], fill) + " " + detail::render(reg.correct[0], fill);
                        }
                        make_passage(k->id + ".c" + std::to_string(cycle + 1) + ".v" + std::to_string(level) + ".review", lo_id, {k->id}, cycle, 1.0,
                                     std::move(body), k->id);
                    }
                }
            }
            for (int slot = 0; slot < spec.items_per_cycle; ++slot) {
                const KnowledgeComponent& k = *kcs[static_cast<std::size_t>(slot) % kcs.size()];
                Rng rng(derive_seed(seed, hash_label(lo_id + "/item/" + std::to_string(cycle) + "/" + std::to_string(slot))));
                detail::Fill fill{k.label, detail::lower_first(detail::strip_period(k.description)), title, {}};
                AssessmentItem item;
                item.item_id = lo_id + ".c" + std::to_string(cycle + 1) + ".q" + std::to_string(slot + 1);
                item.lo_id = lo_id;
                item.kc_ids = {k.id};
                item.cycle = cycle + 1;
                item.stem = detail::render(detail::stem_templates()[static_cast<std::size_t>(cycle) % detail::stem_templates().size()], fill);
                const int band = std::clamp(static_cast<int>(std::lround(spec.difficulty * 2.0)) + (slot % 3) - 1, 0, 2);
                item.difficulty_band = static_cast<DifficultyBand>(band);
                item.delivery_context = DeliveryContext::summative;

                std::vector<Option> options;
                options.push_back({"", detail::render(detail::correct_templates()[static_cast<std::size_t>(cycle) % detail::correct_templates().size()], fill),
                                   "States the accepted account of " + k.label + ".", true, std::nullopt});
                for (const auto& mis : k.misconceptions) {
                    if (options.size() == 4) break;
                    options.push_back({"", detail::upper_first(detail::strip_period(mis.description)) + ".",
                                       "Reflects the belief that " + detail::lower_first(detail::strip_period(mis.description)) + ".", false, mis.id});
                }
                for (const auto& other_id : lo.kc_ids) {
                    if (options.size() == 4) break;
                    if (other_id == k.id) continue;
                    const auto& other = *o.find_kc(other_id);
                    options.push_back({"", detail::upper_first(detail::strip_period(other.description)) + ".",
                                       "Confuses " + k.label + " with " + other.label + ".", false, std::nullopt});
                }
                if (options.size() < 2)
                    options.push_back({"", detail::upper_first(k.label) + " has no role in " + title + ".", "Dismisses " + k.label + " entirely.", false, std::nullopt});
                rng.shuffle(options.begin(), options.end());
                for (std::size_t i = 0; i < options.size(); ++i) options[i].option_id = std::string(1, static_cast<char>('a' + i));
                item.options = std::move(options);
                b.items.push_back(std::move(item));
            }
        }
    }
    validate_bundle(b, o);
    return b;
}

}  // namespace readloop
