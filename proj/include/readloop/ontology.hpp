#pragma once

// Chapter -> learning objective -> knowledge component ontology.
//
// File layout (YAML):
//
//   subject_id: computer_science
//   version: 3
//   chapters:
//     - id: cs_ch01
//       title: Introduction
//       learning_objectives: [cs_lo01_1, cs_lo01_2]
//   learning_objectives:
//     - id: cs_lo01_1
//       statement: Explain abstraction
//       kc_ids: [cs_kc_abstraction]
//   knowledge_components:
//     cs_kc_abstraction:
//       label: abstraction
//       description: ...
//       misconceptions:
//         - id: mc1
//           description: ...
//
// Ontology values are plain data; edits return new values.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "readloop/errors.hpp"
#include "readloop/text.hpp"

namespace readloop {

struct Misconception {
    std::string id;
    std::string description;
    friend bool operator==(const Misconception&, const Misconception&) = default;
};

struct KnowledgeComponent {
    std::string id;
    std::string label;
    std::string description;
    std::vector<Misconception> misconceptions;
    friend bool operator==(const KnowledgeComponent&, const KnowledgeComponent&) = default;
};

struct LearningObjective {
    std::string id;
    std::string statement;
    std::vector<std::string> kc_ids;
    friend bool operator==(const LearningObjective&, const LearningObjective&) = default;
};

struct Chapter {
    std::string id;
    std::string title;
    std::vector<std::string> lo_ids;
    friend bool operator==(const Chapter&, const Chapter&) = default;
};

struct Ontology {
    std::string subject_id;
    std::int64_t version = 1;
    std::vector<Chapter> chapters;
    std::vector<LearningObjective> learning_objectives;
    std::vector<KnowledgeComponent> knowledge_components;

    const Chapter* find_chapter(std::string_view id) const {
        auto it = std::find_if(chapters.begin(), chapters.end(), [&](const auto& c) { return c.id == id; });
        return it == chapters.end() ? nullptr : &*it;
    }
    const LearningObjective* find_lo(std::string_view id) const {
        auto it = std::find_if(learning_objectives.begin(), learning_objectives.end(),
                               [&](const auto& l) { return l.id == id; });
        return it == learning_objectives.end() ? nullptr : &*it;
    }
    const KnowledgeComponent* find_kc(std::string_view id) const {
        auto it = std::find_if(knowledge_components.begin(), knowledge_components.end(),
                               [&](const auto& k) { return k.id == id; });
        return it == knowledge_components.end() ? nullptr : &*it;
    }
    Chapter* find_chapter(std::string_view id) { return const_cast<Chapter*>(std::as_const(*this).find_chapter(id)); }
    LearningObjective* find_lo(std::string_view id) { return const_cast<LearningObjective*>(std::as_const(*this).find_lo(id)); }
    KnowledgeComponent* find_kc(std::string_view id) { return const_cast<KnowledgeComponent*>(std::as_const(*this).find_kc(id)); }

    friend bool operator==(const Ontology&, const Ontology&) = default;
};

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
    empty_id,
    duplicate_id,
    empty_lo_list,
    duplicate_reference,
    dangling_lo,
    unowned_lo,
    shared_lo,
    empty_kc_list,
    dangling_kc,
    orphan_kc,
    duplicate_misconception,
    unknown_target,
    referenced_entity,
    bad_payload,
};

inline std::string_view to_string(Rule r) {
    switch (r) {
        case Rule::empty_id: return "empty id";
        case Rule::duplicate_id: return "duplicate id";
        case Rule::empty_lo_list: return "empty LO list";
        case Rule::duplicate_reference: return "duplicate reference";
        case Rule::dangling_lo: return "dangling LO";
        case Rule::unowned_lo: return "unowned LO";
        case Rule::shared_lo: return "shared LO";
        case Rule::empty_kc_list: return "empty KC list";
        case Rule::dangling_kc: return "dangling KC";
        case Rule::orphan_kc: return "orphan KC";
        case Rule::duplicate_misconception: return "duplicate misconception";
        case Rule::unknown_target: return "unknown target";
        case Rule::referenced_entity: return "referenced entity";
        case Rule::bad_payload: return "bad payload";
    }
    return "unknown";
}

struct Violation {
    std::string entity_id;
    Rule rule;
    std::string message;
    friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string describe(const Violation& v) {
    return std::string(to_string(v.rule)) + " [" + v.entity_id + "]: " + v.message;
}

/// Empty iff every ontology invariant holds.
inline std::vector<Violation> validate_ontology(const Ontology& o) {
    std::vector<Violation> out;
    std::set<std::string> chapter_ids, lo_ids, kc_ids;

    for (const auto& c : o.chapters) {
        if (c.id.empty()) out.push_back({c.id, Rule::empty_id, "chapter with empty id"});
        else if (!chapter_ids.insert(c.id).second) out.push_back({c.id, Rule::duplicate_id, "chapter id declared twice"});
    }
    for (const auto& l : o.learning_objectives) {
        if (l.id.empty()) out.push_back({l.id, Rule::empty_id, "learning objective with empty id"});
        else if (!lo_ids.insert(l.id).second) out.push_back({l.id, Rule::duplicate_id, "learning objective id declared twice"});
    }
    for (const auto& k : o.knowledge_components) {
        if (k.id.empty()) out.push_back({k.id, Rule::empty_id, "knowledge component with empty id"});
        else if (!kc_ids.insert(k.id).second) out.push_back({k.id, Rule::duplicate_id, "knowledge component id declared twice"});
    }

    std::map<std::string, int> lo_owners;
    for (const auto& c : o.chapters) {
        if (c.lo_ids.empty()) out.push_back({c.id, Rule::empty_lo_list, "chapter lists no learning objectives"});
        std::set<std::string> seen;
        for (const auto& lo : c.lo_ids) {
            if (!seen.insert(lo).second) {
                out.push_back({c.id, Rule::duplicate_reference, "learning objective " + lo + " listed twice"});
                continue;
            }
            if (!lo_ids.contains(lo)) out.push_back({c.id, Rule::dangling_lo, "references unknown learning objective " + lo});
            ++lo_owners[lo];
        }
    }

    std::set<std::string> referenced_kcs;
    std::set<std::string> reported_lo;
    for (const auto& l : o.learning_objectives) {
        if (l.id.empty() || !reported_lo.insert(l.id).second) continue;
        const int owners = lo_owners.contains(l.id) ? lo_owners[l.id] : 0;
        if (owners == 0) out.push_back({l.id, Rule::unowned_lo, "learning objective is not listed by any chapter"});
        if (owners > 1) out.push_back({l.id, Rule::shared_lo, "learning objective is listed by " + std::to_string(owners) + " chapters"});
    }
    for (const auto& l : o.learning_objectives) {
        if (l.kc_ids.empty()) out.push_back({l.id, Rule::empty_kc_list, "learning objective maps to no knowledge components"});
        std::set<std::string> seen;
        for (const auto& kc : l.kc_ids) {
            if (!seen.insert(kc).second) {
                out.push_back({l.id, Rule::duplicate_reference, "knowledge component " + kc + " listed twice"});
                continue;
            }
            if (!kc_ids.contains(kc)) out.push_back({l.id, Rule::dangling_kc, "references unknown knowledge component " + kc});
            referenced_kcs.insert(kc);
        }
    }
    std::set<std::string> reported_kc;
    for (const auto& k : o.knowledge_components) {
        if (k.id.empty() || !reported_kc.insert(k.id).second) continue;
        if (!referenced_kcs.contains(k.id)) out.push_back({k.id, Rule::orphan_kc, "knowledge component is not referenced by any learning objective"});
        std::set<std::string> mids;
        for (const auto& m : k.misconceptions) {
            if (m.id.empty()) out.push_back({k.id, Rule::empty_id, "misconception with empty id"});
            else if (!mids.insert(m.id).second) out.push_back({k.id, Rule::duplicate_misconception, "misconception " + m.id + " declared twice"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing and serialization

namespace detail {

inline YAML::Node require(const YAML::Node& parent, const char* key, const std::string& path, YAML::NodeType::value type) {
    const YAML::Node node = parent[key];
    const std::string here = path.empty() ? key : path + "." + key;
    if (!node) throw SchemaError(here, "missing required field");
    if (node.Type() != type) {
        const char* expected = type == YAML::NodeType::Map ? "a mapping" : type == YAML::NodeType::Sequence ? "a sequence" : "a scalar";
        throw SchemaError(here, std::string("expected ") + expected);
    }
    return node;
}

inline std::string scalar(const YAML::Node& parent, const char* key, const std::string& path) {
    return require(parent, key, path, YAML::NodeType::Scalar).Scalar();
}

inline std::string optional_scalar(const YAML::Node& parent, const char* key, const std::string& path) {
    const YAML::Node node = parent[key];
    if (!node || node.IsNull()) return {};
    if (!node.IsScalar()) throw SchemaError(path + "." + key, "expected a scalar");
    return node.Scalar();
}

inline std::vector<std::string> string_list(const YAML::Node& parent, const char* key, const std::string& path) {
    const YAML::Node node = require(parent, key, path, YAML::NodeType::Sequence);
    std::vector<std::string> out;
    std::size_t i = 0;
    for (const auto& item : node) {
        if (!item.IsScalar()) throw SchemaError(path + "." + key + "[" + std::to_string(i) + "]", "expected a scalar");
        out.push_back(item.Scalar());
        ++i;
    }
    return out;
}

inline std::string index_path(const char* key, std::size_t i) { return std::string(key) + "[" + std::to_string(i) + "]"; }

inline YAML::Node load_yaml(std::string_view document) {
    try {
        return YAML::Load(std::string(document));
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

}  // namespace detail

class OntologySchemaError : public SchemaError {
public:
    explicit OntologySchemaError(std::vector<Violation> violations)
        : SchemaError("", summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& vs) {
        std::string s = "ontology violates " + std::to_string(vs.size()) + " rule(s)";
        for (const auto& v : vs) s += "; " + describe(v);
        return s;
    }
    std::vector<Violation> violations_;
};

/// Builds an ontology from an already-loaded YAML node without validating invariants.
inline Ontology ontology_from_yaml(const YAML::Node& root) {
    using namespace detail;
    if (!root.IsMap()) throw SchemaError("", "document root must be a mapping");
    Ontology o;
    o.subject_id = scalar(root, "subject_id", "");
    try {
        o.version = require(root, "version", "", YAML::NodeType::Scalar).as<std::int64_t>();
    } catch (const YAML::BadConversion&) {
        throw SchemaError("version", "expected an integer");
    }

    const YAML::Node chapters = require(root, "chapters", "", YAML::NodeType::Sequence);
    for (std::size_t i = 0; i < chapters.size(); ++i) {
        const YAML::Node c = chapters[i];
        const std::string path = index_path("chapters", i);
        if (!c.IsMap()) throw SchemaError(path, "expected a mapping");
        o.chapters.push_back({scalar(c, "id", path), optional_scalar(c, "title", path), string_list(c, "learning_objectives", path)});
    }

    const YAML::Node los = require(root, "learning_objectives", "", YAML::NodeType::Sequence);
    for (std::size_t i = 0; i < los.size(); ++i) {
        const YAML::Node l = los[i];
        const std::string path = index_path("learning_objectives", i);
        if (!l.IsMap()) throw SchemaError(path, "expected a mapping");
        o.learning_objectives.push_back({scalar(l, "id", path), optional_scalar(l, "statement", path), string_list(l, "kc_ids", path)});
    }

    const YAML::Node kcs = require(root, "knowledge_components", "", YAML::NodeType::Map);
    for (const auto& entry : kcs) {
        if (!entry.first.IsScalar()) throw SchemaError("knowledge_components", "keys must be scalars");
        const std::string id = entry.first.Scalar();
        const std::string path = "knowledge_components." + id;
        const YAML::Node k = entry.second;
        KnowledgeComponent kc{id, {}, {}, {}};
        if (k.IsNull()) {
            o.knowledge_components.push_back(std::move(kc));
            continue;
        }
        if (!k.IsMap()) throw SchemaError(path, "expected a mapping");
        kc.label = optional_scalar(k, "label", path);
        kc.description = optional_scalar(k, "description", path);
        if (const YAML::Node ms = k["misconceptions"]; ms && !ms.IsNull()) {
            if (!ms.IsSequence()) throw SchemaError(path + ".misconceptions", "expected a sequence");
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const std::string mpath = path + "." + index_path("misconceptions", i);
                if (!ms[i].IsMap()) throw SchemaError(mpath, "expected a mapping");
                kc.misconceptions.push_back({scalar(ms[i], "id", mpath), optional_scalar(ms[i], "description", mpath)});
            }
        }
        o.knowledge_components.push_back(std::move(kc));
    }
    return o;
}

/// Parses and validates an ontology document.
///
/// Throws ParseError for malformed YAML, SchemaError for missing or mistyped
/// fields, and OntologySchemaError when the invariants do not hold.
inline Ontology parse_ontology(std::string_view document) {
    Ontology o = ontology_from_yaml(detail::load_yaml(document));
    if (auto violations = validate_ontology(o); !violations.empty()) throw OntologySchemaError(std::move(violations));
    return o;
}

namespace detail {

inline void emit_string(YAML::Emitter& out, const std::string& s) { out << YAML::DoubleQuoted << s; }

inline void emit_string_list(YAML::Emitter& out, const std::vector<std::string>& items) {
    out << YAML::BeginSeq;
    for (const auto& s : items) emit_string(out, s);
    out << YAML::EndSeq;
}

}  // namespace detail

inline std::string serialize_ontology(const Ontology& o) {
    using detail::emit_string;
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "subject_id" << YAML::Value;
    emit_string(out, o.subject_id);
    out << YAML::Key << "version" << YAML::Value << o.version;

    out << YAML::Key << "chapters" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : o.chapters) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value;
        emit_string(out, c.id);
        out << YAML::Key << "title" << YAML::Value;
        emit_string(out, c.title);
        out << YAML::Key << "learning_objectives" << YAML::Value;
        detail::emit_string_list(out, c.lo_ids);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "learning_objectives" << YAML::Value << YAML::BeginSeq;
    for (const auto& l : o.learning_objectives) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value;
        emit_string(out, l.id);
        out << YAML::Key << "statement" << YAML::Value;
        emit_string(out, l.statement);
        out << YAML::Key << "kc_ids" << YAML::Value;
        detail::emit_string_list(out, l.kc_ids);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "knowledge_components" << YAML::Value << YAML::BeginMap;
    for (const auto& k : o.knowledge_components) {
        out << YAML::Key;
        emit_string(out, k.id);
        out << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "label" << YAML::Value;
        emit_string(out, k.label);
        out << YAML::Key << "description" << YAML::Value;
        emit_string(out, k.description);
        out << YAML::Key << "misconceptions" << YAML::Value << YAML::BeginSeq;
        for (const auto& m : k.misconceptions) {
            out << YAML::BeginMap;
            out << YAML::Key << "id" << YAML::Value;
            emit_string(out, m.id);
            out << YAML::Key << "description" << YAML::Value;
            emit_string(out, m.description);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// Coverage

struct ChapterCoverage {
    std::string chapter_id;
    std::string title;
    std::size_t lo_count = 0;
    std::size_t kc_count = 0;  // distinct KCs reachable from the chapter's LOs
    friend bool operator==(const ChapterCoverage&, const ChapterCoverage&) = default;
};

struct CoverageSummary {
    std::size_t chapter_count = 0;
    std::size_t lo_count = 0;
    std::size_t kc_count = 0;
    std::vector<ChapterCoverage> chapters;
    friend bool operator==(const CoverageSummary&, const CoverageSummary&) = default;
};

inline CoverageSummary coverage_summary(const Ontology& o) {
    CoverageSummary s;
    std::set<std::string> chapters, los, kcs;
    for (const auto& c : o.chapters) chapters.insert(c.id);
    for (const auto& l : o.learning_objectives) los.insert(l.id);
    for (const auto& k : o.knowledge_components) kcs.insert(k.id);
    s.chapter_count = chapters.size();
    s.lo_count = los.size();
    s.kc_count = kcs.size();
    for (const auto& c : o.chapters) {
        std::set<std::string> reach;
        std::set<std::string> distinct_los(c.lo_ids.begin(), c.lo_ids.end());
        for (const auto& lo_id : distinct_los) {
            if (const auto* lo = o.find_lo(lo_id)) reach.insert(lo->kc_ids.begin(), lo->kc_ids.end());
        }
        s.chapters.push_back({c.id, c.title, distinct_los.size(), reach.size()});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Edits

enum class EditKind { create, rename, remove, merge_kcs, split_kc, relink };
enum class EntityKind { chapter, learning_objective, knowledge_component };

inline std::string_view to_string(EditKind k) {
    switch (k) {
        case EditKind::create: return "create";
        case EditKind::rename: return "rename";
        case EditKind::remove: return "delete";
        case EditKind::merge_kcs: return "merge_kcs";
        case EditKind::split_kc: return "split_kc";
        case EditKind::relink: return "relink";
    }
    return "unknown";
}

inline std::string_view to_string(EntityKind k) {
    switch (k) {
        case EntityKind::chapter: return "chapter";
        case EntityKind::learning_objective: return "learning_objective";
        case EntityKind::knowledge_component: return "knowledge_component";
    }
    return "unknown";
}

/// New KC produced by a split, with the referencing LOs it takes over.
struct SplitPart {
    std::string id;
    std::string label;
    std::string description;
    std::vector<std::string> lo_ids;
    std::optional<std::vector<std::string>> misconception_ids;  // default: copy every source misconception
    friend bool operator==(const SplitPart&, const SplitPart&) = default;
};

/// One curator edit. Which fields matter depends on `kind`:
///
/// - create: entity, target_id (new id), text fields; chapters take lo_ids,
///   LOs take kc_ids and chapter_id, KCs take lo_ids (LOs to attach to) and
///   misconceptions.
/// - rename: entity, target_id; any of new_id / title / statement / label /
///   description. A new id is rewritten in every reference.
/// - remove: entity, target_id; relink_to moves references (KC refs or a
///   chapter's LOs) to another entity. Removing a still-referenced KC or a
///   non-empty chapter without relink_to is rejected.
/// - merge_kcs: target_id survives, merge_ids are folded into it.
/// - split_kc: target_id is replaced by split_parts.
/// - relink: an LO gets new kc_ids and/or moves to chapter_id.
struct OntologyEdit {
    EditKind kind = EditKind::rename;
    EntityKind entity = EntityKind::knowledge_component;
    std::string target_id;

    std::optional<std::string> new_id;
    std::optional<std::string> title;
    std::optional<std::string> statement;
    std::optional<std::string> label;
    std::optional<std::string> description;

    std::vector<std::string> lo_ids;
    std::optional<std::vector<std::string>> kc_ids;
    std::optional<std::string> chapter_id;
    std::vector<Misconception> misconceptions;

    std::optional<std::string> relink_to;
    std::vector<std::string> merge_ids;
    std::vector<SplitPart> split_parts;

    friend bool operator==(const OntologyEdit&, const OntologyEdit&) = default;
};

struct EditResult {
    Ontology ontology;                 // the edited ontology, or the input unchanged on rejection
    std::vector<Violation> violations; // empty iff accepted
    bool accepted() const noexcept { return violations.empty(); }
};

namespace detail {

inline void replace_in(std::vector<std::string>& ids, const std::string& from, const std::string& to) {
    for (auto& id : ids)
        if (id == from) id = to;
}

inline void dedupe_stable(std::vector<std::string>& ids) {
    std::set<std::string> seen;
    std::erase_if(ids, [&](const std::string& id) { return !seen.insert(id).second; });
}

inline std::optional<Violation> apply_create(Ontology& o, const OntologyEdit& e) {
    if (e.target_id.empty()) return Violation{e.target_id, Rule::bad_payload, "create needs a non-empty id"};
    switch (e.entity) {
        case EntityKind::chapter:
            if (o.find_chapter(e.target_id)) return Violation{e.target_id, Rule::duplicate_id, "chapter already exists"};
            // LOs listed here move out of their current chapter.
            for (auto& c : o.chapters) std::erase_if(c.lo_ids, [&](const auto& id) { return std::ranges::find(e.lo_ids, id) != e.lo_ids.end(); });
            o.chapters.push_back({e.target_id, e.title.value_or(""), e.lo_ids});
            return std::nullopt;
        case EntityKind::learning_objective: {
            if (o.find_lo(e.target_id)) return Violation{e.target_id, Rule::duplicate_id, "learning objective already exists"};
            if (!e.chapter_id) return Violation{e.target_id, Rule::bad_payload, "create learning_objective needs chapter_id"};
            Chapter* c = o.find_chapter(*e.chapter_id);
            if (!c) return Violation{*e.chapter_id, Rule::unknown_target, "no such chapter"};
            c->lo_ids.push_back(e.target_id);
            o.learning_objectives.push_back({e.target_id, e.statement.value_or(""), e.kc_ids.value_or(std::vector<std::string>{})});
            return std::nullopt;
        }
        case EntityKind::knowledge_component:
            if (o.find_kc(e.target_id)) return Violation{e.target_id, Rule::duplicate_id, "knowledge component already exists"};
            for (const auto& lo_id : e.lo_ids) {
                LearningObjective* lo = o.find_lo(lo_id);
                if (!lo) return Violation{lo_id, Rule::unknown_target, "no such learning objective"};
                lo->kc_ids.push_back(e.target_id);
            }
            o.knowledge_components.push_back({e.target_id, e.label.value_or(""), e.description.value_or(""), e.misconceptions});
            return std::nullopt;
    }
    return std::nullopt;
}

inline std::optional<Violation> apply_rename(Ontology& o, const OntologyEdit& e) {
    const bool new_id = e.new_id && *e.new_id != e.target_id;
    if (e.new_id && e.new_id->empty()) return Violation{e.target_id, Rule::bad_payload, "new id is empty"};
    switch (e.entity) {
        case EntityKind::chapter: {
            Chapter* c = o.find_chapter(e.target_id);
            if (!c) return Violation{e.target_id, Rule::unknown_target, "no such chapter"};
            if (e.title) c->title = *e.title;
            if (new_id) {
                if (o.find_chapter(*e.new_id)) return Violation{*e.new_id, Rule::duplicate_id, "chapter id already in use"};
                c->id = *e.new_id;
            }
            return std::nullopt;
        }
        case EntityKind::learning_objective: {
            LearningObjective* l = o.find_lo(e.target_id);
            if (!l) return Violation{e.target_id, Rule::unknown_target, "no such learning objective"};
            if (e.statement) l->statement = *e.statement;
            if (new_id) {
                if (o.find_lo(*e.new_id)) return Violation{*e.new_id, Rule::duplicate_id, "learning objective id already in use"};
                l->id = *e.new_id;
                for (auto& c : o.chapters) replace_in(c.lo_ids, e.target_id, *e.new_id);
            }
            return std::nullopt;
        }
        case EntityKind::knowledge_component: {
            KnowledgeComponent* k = o.find_kc(e.target_id);
            if (!k) return Violation{e.target_id, Rule::unknown_target, "no such knowledge component"};
            if (e.label) k->label = *e.label;
            if (e.description) k->description = *e.description;
            if (new_id) {
                if (o.find_kc(*e.new_id)) return Violation{*e.new_id, Rule::duplicate_id, "knowledge component id already in use"};
                k->id = *e.new_id;
                for (auto& l : o.learning_objectives) replace_in(l.kc_ids, e.target_id, *e.new_id);
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

inline std::optional<Violation> apply_remove(Ontology& o, const OntologyEdit& e) {
    switch (e.entity) {
        case EntityKind::chapter: {
            const Chapter* c = o.find_chapter(e.target_id);
            if (!c) return Violation{e.target_id, Rule::unknown_target, "no such chapter"};
            const std::vector<std::string> moving = c->lo_ids;
            if (!moving.empty()) {
                if (!e.relink_to) return Violation{e.target_id, Rule::referenced_entity, "chapter still owns learning objectives; give relink_to"};
                Chapter* dest = o.find_chapter(*e.relink_to);
                if (!dest || dest->id == e.target_id) return Violation{*e.relink_to, Rule::unknown_target, "relink target chapter not found"};
                dest->lo_ids.insert(dest->lo_ids.end(), moving.begin(), moving.end());
            }
            std::erase_if(o.chapters, [&](const auto& ch) { return ch.id == e.target_id; });
            return std::nullopt;
        }
        case EntityKind::learning_objective: {
            if (!o.find_lo(e.target_id)) return Violation{e.target_id, Rule::unknown_target, "no such learning objective"};
            for (auto& c : o.chapters) std::erase(c.lo_ids, e.target_id);
            std::erase_if(o.learning_objectives, [&](const auto& l) { return l.id == e.target_id; });
            return std::nullopt;
        }
        case EntityKind::knowledge_component: {
            if (!o.find_kc(e.target_id)) return Violation{e.target_id, Rule::unknown_target, "no such knowledge component"};
            const bool referenced = std::ranges::any_of(o.learning_objectives, [&](const auto& l) {
                return std::ranges::find(l.kc_ids, e.target_id) != l.kc_ids.end();
            });
            if (referenced) {
                if (!e.relink_to) return Violation{e.target_id, Rule::referenced_entity, "knowledge component is still referenced; give relink_to"};
                if (!o.find_kc(*e.relink_to) || *e.relink_to == e.target_id)
                    return Violation{*e.relink_to, Rule::unknown_target, "relink target knowledge component not found"};
                for (auto& l : o.learning_objectives) {
                    replace_in(l.kc_ids, e.target_id, *e.relink_to);
                    dedupe_stable(l.kc_ids);
                }
            }
            std::erase_if(o.knowledge_components, [&](const auto& k) { return k.id == e.target_id; });
            return std::nullopt;
        }
    }
    return std::nullopt;
}

inline std::optional<Violation> apply_merge(Ontology& o, const OntologyEdit& e) {
    if (!o.find_kc(e.target_id)) return Violation{e.target_id, Rule::unknown_target, "no such surviving knowledge component"};
    if (e.merge_ids.empty()) return Violation{e.target_id, Rule::bad_payload, "merge_kcs needs merge_ids"};
    std::set<std::string> seen;
    for (const auto& id : e.merge_ids) {
        if (id == e.target_id) return Violation{id, Rule::bad_payload, "cannot merge a knowledge component into itself"};
        if (!seen.insert(id).second) return Violation{id, Rule::bad_payload, "listed twice in merge_ids"};
        if (!o.find_kc(id)) return Violation{id, Rule::unknown_target, "no such knowledge component"};
    }
    for (const auto& id : e.merge_ids) {
        const KnowledgeComponent merged = *o.find_kc(id);
        KnowledgeComponent* survivor = o.find_kc(e.target_id);
        for (const auto& m : merged.misconceptions) {
            const bool clash = std::ranges::any_of(survivor->misconceptions, [&](const auto& s) { return s.id == m.id; });
            survivor->misconceptions.push_back(clash ? Misconception{merged.id + "." + m.id, m.description} : m);
        }
        for (auto& l : o.learning_objectives) {
            replace_in(l.kc_ids, id, e.target_id);
            dedupe_stable(l.kc_ids);
        }
        std::erase_if(o.knowledge_components, [&](const auto& k) { return k.id == id; });
    }
    return std::nullopt;
}

inline std::optional<Violation> apply_split(Ontology& o, const OntologyEdit& e) {
    const KnowledgeComponent* src_ptr = o.find_kc(e.target_id);
    if (!src_ptr) return Violation{e.target_id, Rule::unknown_target, "no such knowledge component"};
    if (e.split_parts.size() < 2) return Violation{e.target_id, Rule::bad_payload, "split_kc needs at least two parts"};
    const KnowledgeComponent source = *src_ptr;

    std::set<std::string> referencing;
    for (const auto& l : o.learning_objectives)
        if (std::ranges::find(l.kc_ids, source.id) != l.kc_ids.end()) referencing.insert(l.id);

    std::set<std::string> part_ids;
    for (const auto& p : e.split_parts) {
        if (p.id.empty()) return Violation{source.id, Rule::bad_payload, "split part with empty id"};
        if (!part_ids.insert(p.id).second) return Violation{p.id, Rule::bad_payload, "split part id repeated"};
        if (p.id != source.id && o.find_kc(p.id)) return Violation{p.id, Rule::duplicate_id, "knowledge component id already in use"};
        for (const auto& lo : p.lo_ids)
            if (!referencing.contains(lo)) return Violation{lo, Rule::bad_payload, "split part assigned to a learning objective that does not reference " + source.id};
        if (p.misconception_ids) {
            for (const auto& mid : *p.misconception_ids) {
                if (std::ranges::none_of(source.misconceptions, [&](const auto& m) { return m.id == mid; }))
                    return Violation{mid, Rule::bad_payload, "misconception not in source catalog"};
            }
        }
    }

    for (auto& l : o.learning_objectives) {
        auto it = std::ranges::find(l.kc_ids, source.id);
        if (it == l.kc_ids.end()) continue;
        std::vector<std::string> replacement;
        for (const auto& p : e.split_parts)
            if (std::ranges::find(p.lo_ids, l.id) != p.lo_ids.end()) replacement.push_back(p.id);
        const auto pos = it - l.kc_ids.begin();
        l.kc_ids.erase(it);
        l.kc_ids.insert(l.kc_ids.begin() + pos, replacement.begin(), replacement.end());
        dedupe_stable(l.kc_ids);
    }

    auto src_it = std::ranges::find_if(o.knowledge_components, [&](const auto& k) { return k.id == source.id; });
    const auto src_pos = src_it - o.knowledge_components.begin();
    o.knowledge_components.erase(src_it);
    std::vector<KnowledgeComponent> parts;
    for (const auto& p : e.split_parts) {
        KnowledgeComponent kc{p.id, p.label, p.description, {}};
        for (const auto& m : source.misconceptions)
            if (!p.misconception_ids || std::ranges::find(*p.misconception_ids, m.id) != p.misconception_ids->end())
                kc.misconceptions.push_back(m);
        parts.push_back(std::move(kc));
    }
    o.knowledge_components.insert(o.knowledge_components.begin() + src_pos, parts.begin(), parts.end());
    return std::nullopt;
}

inline std::optional<Violation> apply_relink(Ontology& o, const OntologyEdit& e) {
    if (e.entity != EntityKind::learning_objective) return Violation{e.target_id, Rule::bad_payload, "relink applies to learning objectives"};
    LearningObjective* l = o.find_lo(e.target_id);
    if (!l) return Violation{e.target_id, Rule::unknown_target, "no such learning objective"};
    if (!e.kc_ids && !e.chapter_id) return Violation{e.target_id, Rule::bad_payload, "relink needs kc_ids or chapter_id"};
    if (e.kc_ids) l->kc_ids = *e.kc_ids;
    if (e.chapter_id) {
        Chapter* dest = o.find_chapter(*e.chapter_id);
        if (!dest) return Violation{*e.chapter_id, Rule::unknown_target, "no such chapter"};
        for (auto& c : o.chapters) std::erase(c.lo_ids, e.target_id);
        o.find_chapter(*e.chapter_id)->lo_ids.push_back(e.target_id);
    }
    return std::nullopt;
}

}  // namespace detail

/// Applies one edit atomically. On success the version is bumped by one; on
/// any violation the input ontology is returned unchanged with the reasons.
inline EditResult apply_edit(const Ontology& o, const OntologyEdit& e) {
    Ontology draft = o;
    std::optional<Violation> early;
    switch (e.kind) {
        case EditKind::create: early = detail::apply_create(draft, e); break;
        case EditKind::rename: early = detail::apply_rename(draft, e); break;
        case EditKind::remove: early = detail::apply_remove(draft, e); break;
        case EditKind::merge_kcs:
            early = e.entity == EntityKind::knowledge_component ? detail::apply_merge(draft, e)
                                                                 : Violation{e.target_id, Rule::bad_payload, "merge_kcs applies to knowledge components"};
            break;
        case EditKind::split_kc:
            early = e.entity == EntityKind::knowledge_component ? detail::apply_split(draft, e)
                                                                 : Violation{e.target_id, Rule::bad_payload, "split_kc applies to knowledge components"};
            break;
        case EditKind::relink: early = detail::apply_relink(draft, e); break;
    }
    if (early) return {o, {*early}};
    if (auto violations = validate_ontology(draft); !violations.empty()) return {o, std::move(violations)};
    draft.version = o.version + 1;
    return {std::move(draft), {}};
}

// ---------------------------------------------------------------------------
// Search

struct SearchHit {
    EntityKind entity;
    std::string id;
    std::string field;  // "id", "label", "statement", "title" or "description"
    int priority;       // 0 = id, 1 = label/title, 2 = statement, 3 = description
    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Case-insensitive substring search; each entity appears once at its best field.
inline std::vector<SearchHit> search_entities(const Ontology& o, std::string_view query) {
    std::vector<SearchHit> hits;
    const std::string q = text::to_lower(query);
    if (q.empty()) return hits;
    auto contains = [&](const std::string& field) { return text::to_lower(field).find(q) != std::string::npos; };
    auto consider = [&](EntityKind kind, const std::string& id, std::initializer_list<std::pair<const char*, const std::string*>> fields) {
        int priority = 0;
        for (const auto& [name, value] : fields) {
            if (contains(*value)) {
                hits.push_back({kind, id, name, priority});
                return;
            }
            ++priority;
        }
    };
    static const std::string none;
    for (const auto& c : o.chapters) consider(EntityKind::chapter, c.id, {{"id", &c.id}, {"title", &c.title}, {"statement", &none}, {"description", &none}});
    for (const auto& l : o.learning_objectives) consider(EntityKind::learning_objective, l.id, {{"id", &l.id}, {"label", &none}, {"statement", &l.statement}, {"description", &none}});
    for (const auto& k : o.knowledge_components) consider(EntityKind::knowledge_component, k.id, {{"id", &k.id}, {"label", &k.label}, {"statement", &none}, {"description", &k.description}});
    std::stable_sort(hits.begin(), hits.end(), [&](const SearchHit& a, const SearchHit& b) {
        if (a.priority != b.priority) return a.priority < b.priority;
        // exact id match first within the id tier
        return (a.priority == 0 && text::to_lower(a.id) == q) && !(b.priority == 0 && text::to_lower(b.id) == q);
    });
    return hits;
}

}  // namespace readloop
