#pragma once

// File-backed ontology service behind the curation workspace.
//
// Each subject is one `<subject>.yaml` ontology file under the content root.
// Writes are optimistic: the caller names the version it edited and a stale
// version is rejected with a conflict. Saves go to a temp file that is then
// renamed over the original, so readers never see a torn file.

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/ontology.hpp"

namespace readloop {

namespace gateway {

using json = nlohmann::ordered_json;

struct Response {
    int status = 200;
    json body;
};

inline json violation_json(const Violation& v) {
    return {{"entity_id", v.entity_id}, {"rule", std::string(to_string(v.rule))}, {"message", v.message}};
}

inline json ok(json data, std::optional<std::int64_t> version = std::nullopt) {
    json j{{"ok", true}, {"data", std::move(data)}};
    if (version) j["version"] = *version;
    return j;
}

inline Response failure(int status, std::string code, std::string message, const std::vector<Violation>& violations = {},
                        std::optional<std::int64_t> version = std::nullopt) {
    json j{{"ok", false}, {"error", {{"code", std::move(code)}, {"message", std::move(message)}}}};
    j["violations"] = json::array();
    for (const auto& v : violations) j["violations"].push_back(violation_json(v));
    if (version) j["version"] = *version;
    return {status, std::move(j)};
}

inline json ontology_json(const Ontology& o) {
    json j;
    j["subject_id"] = o.subject_id;
    j["version"] = o.version;
    j["chapters"] = json::array();
    for (const auto& c : o.chapters) j["chapters"].push_back({{"id", c.id}, {"title", c.title}, {"lo_ids", c.lo_ids}});
    j["learning_objectives"] = json::array();
    for (const auto& l : o.learning_objectives) j["learning_objectives"].push_back({{"id", l.id}, {"statement", l.statement}, {"kc_ids", l.kc_ids}});
    j["knowledge_components"] = json::array();
    for (const auto& k : o.knowledge_components) {
        json m = json::array();
        for (const auto& mc : k.misconceptions) m.push_back({{"id", mc.id}, {"description", mc.description}});
        j["knowledge_components"].push_back({{"id", k.id}, {"label", k.label}, {"description", k.description}, {"misconceptions", std::move(m)}});
    }
    return j;
}

inline json coverage_json(const CoverageSummary& s) {
    json j{{"chapter_count", s.chapter_count}, {"lo_count", s.lo_count}, {"kc_count", s.kc_count}};
    j["chapters"] = json::array();
    for (const auto& c : s.chapters)
        j["chapters"].push_back({{"chapter_id", c.chapter_id}, {"title", c.title}, {"lo_count", c.lo_count}, {"kc_count", c.kc_count}});
    return j;
}

namespace detail {

inline std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

inline std::vector<std::string> strings(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return j.at(key).get<std::vector<std::string>>();
}

}  // namespace detail

/// Decodes an edit payload. Throws SchemaError on malformed input.
inline OntologyEdit edit_from_json(const json& j) {
    using detail::opt_string;
    using detail::strings;
    if (!j.is_object()) throw SchemaError("edit", "expected an object");
    try {
        OntologyEdit e;
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "create") e.kind = EditKind::create;
        else if (kind == "rename") e.kind = EditKind::rename;
        else if (kind == "delete" || kind == "remove") e.kind = EditKind::remove;
        else if (kind == "merge_kcs" || kind == "merge") e.kind = EditKind::merge_kcs;
        else if (kind == "split_kc" || kind == "split") e.kind = EditKind::split_kc;
        else if (kind == "relink") e.kind = EditKind::relink;
        else throw SchemaError("edit.kind", "unknown edit kind '" + kind + "'");

        const std::string entity = j.value("entity", std::string(e.kind == EditKind::relink ? "learning_objective" : "knowledge_component"));
        if (entity == "chapter") e.entity = EntityKind::chapter;
        else if (entity == "learning_objective") e.entity = EntityKind::learning_objective;
        else if (entity == "knowledge_component") e.entity = EntityKind::knowledge_component;
        else throw SchemaError("edit.entity", "unknown entity kind '" + entity + "'");

        e.target_id = j.at("target_id").get<std::string>();
        e.new_id = opt_string(j, "new_id");
        e.title = opt_string(j, "title");
        e.statement = opt_string(j, "statement");
        e.label = opt_string(j, "label");
        e.description = opt_string(j, "description");
        e.lo_ids = strings(j, "lo_ids");
        if (j.contains("kc_ids") && !j.at("kc_ids").is_null()) e.kc_ids = strings(j, "kc_ids");
        e.chapter_id = opt_string(j, "chapter_id");
        if (j.contains("misconceptions"))
            for (const auto& m : j.at("misconceptions")) e.misconceptions.push_back({m.at("id").get<std::string>(), m.value("description", std::string())});
        e.relink_to = opt_string(j, "relink_to");
        e.merge_ids = strings(j, "merge_ids");
        if (j.contains("split_parts"))
            for (const auto& p : j.at("split_parts")) {
                SplitPart part;
                part.id = p.at("id").get<std::string>();
                part.label = p.value("label", std::string());
                part.description = p.value("description", std::string());
                part.lo_ids = strings(p, "lo_ids");
                if (p.contains("misconception_ids") && !p.at("misconception_ids").is_null()) part.misconception_ids = strings(p, "misconception_ids");
                e.split_parts.push_back(std::move(part));
            }
        return e;
    } catch (const json::exception& ex) {
        throw SchemaError("edit", ex.what());
    }
}

/// Replaces `path` with `content` via a sibling temp file and rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot replace " + path.string());
    }
}

class Service {
public:
    explicit Service(std::filesystem::path content_root) : root_(std::move(content_root)) {
        if (!std::filesystem::is_directory(root_)) throw Error("content root is not a directory: " + root_.string());
    }

    const std::filesystem::path& root() const noexcept { return root_; }

    Response list_subjects() const {
        std::vector<std::string> ids;
        for (const auto& entry : std::filesystem::directory_iterator(root_))
            if (entry.is_regular_file() && entry.path().extension() == ".yaml") ids.push_back(entry.path().stem().string());
        std::sort(ids.begin(), ids.end());
        json data = json::array();
        for (const auto& id : ids) {
            json row{{"subject_id", id}};
            try {
                const auto o = parse_ontology(read_text_file(path_for(id)));
                row["version"] = o.version;
                row["coverage"] = coverage_json(coverage_summary(o));
            } catch (const Error& e) {
                row["error"] = e.what();
            }
            data.push_back(std::move(row));
        }
        return {200, ok(std::move(data))};
    }

    Response get_ontology(const std::string& subject) const {
        return with_subject(subject, [&](const Ontology& o, const std::string& document) {
            return Response{200, ok({{"subject_id", subject}, {"document", document}, {"ontology", ontology_json(o)}}, o.version)};
        });
    }

    Response get_coverage(const std::string& subject) const {
        return with_subject(subject, [&](const Ontology& o, const std::string&) { return Response{200, ok(coverage_json(coverage_summary(o)), o.version)}; });
    }

    Response search(const std::string& subject, const std::string& query) const {
        return with_subject(subject, [&](const Ontology& o, const std::string&) {
            json hits = json::array();
            for (const auto& h : search_entities(o, query))
                hits.push_back({{"entity", std::string(to_string(h.entity))}, {"id", h.id}, {"field", h.field}, {"priority", h.priority}});
            return Response{200, ok(std::move(hits), o.version)};
        });
    }

    Response export_document(const std::string& subject) const {
        return with_subject(subject, [&](const Ontology& o, const std::string& document) {
            return Response{200, ok({{"subject_id", subject}, {"document", document}}, o.version)};
        });
    }

    /// Body: {"base_version": N, "edit": {...}}.
    Response post_edit(const std::string& subject, const json& body) {
        if (!known(subject)) return failure(404, "not_found", "unknown subject " + subject);
        if (!body.is_object() || !body.contains("base_version") || !body.at("base_version").is_number_integer() || !body.contains("edit"))
            return failure(400, "bad_request", "body needs integer base_version and an edit object");
        OntologyEdit edit;
        try {
            edit = edit_from_json(body.at("edit"));
        } catch (const SchemaError& e) {
            return failure(400, "bad_request", e.what());
        }
        const auto base = body.at("base_version").get<std::int64_t>();
        std::lock_guard lock(mutex_for(subject));
        Ontology current;
        try {
            current = parse_ontology(read_text_file(path_for(subject)));
        } catch (const Error& e) {
            return failure(500, "corrupt", e.what());
        }
        if (base != current.version)
            return failure(409, "conflict", "edit was based on version " + std::to_string(base) + " but the ontology is at version " + std::to_string(current.version), {},
                           current.version);
        EditResult result = apply_edit(current, edit);
        if (!result.accepted()) return failure(422, "invalid", "edit rejected", result.violations, current.version);
        atomic_write(path_for(subject), serialize_ontology(result.ontology));
        return {200, ok({{"subject_id", subject}, {"coverage", coverage_json(coverage_summary(result.ontology))}}, result.ontology.version)};
    }

    /// Replaces the subject file with `document` if `base_version` is current.
    /// The stored version becomes base_version + 1.
    Response import_document(const std::string& subject, std::int64_t base_version, const std::string& document) {
        if (!known(subject)) return failure(404, "not_found", "unknown subject " + subject);
        Ontology incoming;
        try {
            incoming = ontology_from_yaml(detail_load(document));
        } catch (const Error& e) {
            return failure(400, "bad_request", e.what());
        }
        if (auto violations = validate_ontology(incoming); !violations.empty()) return failure(422, "invalid", "document fails validation", violations);
        std::lock_guard lock(mutex_for(subject));
        Ontology current;
        try {
            current = parse_ontology(read_text_file(path_for(subject)));
        } catch (const Error& e) {
            return failure(500, "corrupt", e.what());
        }
        if (base_version != current.version)
            return failure(409, "conflict", "import was based on version " + std::to_string(base_version) + " but the ontology is at version " +
                                                std::to_string(current.version), {}, current.version);
        incoming.version = current.version + 1;
        atomic_write(path_for(subject), serialize_ontology(incoming));
        return {200, ok({{"subject_id", subject}, {"coverage", coverage_json(coverage_summary(incoming))}}, incoming.version)};
    }

    /// Checks a document without saving it.
    static Response validate_document(const std::string& document) {
        Ontology o;
        try {
            o = ontology_from_yaml(detail_load(document));
        } catch (const ParseError& e) {
            return failure(400, "parse_error", e.what());
        } catch (const Error& e) {
            return failure(400, "schema_error", e.what());
        }
        json data{{"valid", true}, {"coverage", coverage_json(coverage_summary(o))}};
        const auto violations = validate_ontology(o);
        if (!violations.empty()) {
            data["valid"] = false;
            data["violations"] = json::array();
            for (const auto& v : violations) data["violations"].push_back(violation_json(v));
        }
        return {200, ok(std::move(data), o.version)};
    }

private:
    static YAML::Node detail_load(const std::string& document) { return readloop::detail::load_yaml(document); }

    static bool valid_id(const std::string& subject) {
        if (subject.empty()) return false;
        return std::ranges::all_of(subject, [](char c) { return text::is_letter(c) || text::is_digit(c) || c == '_' || c == '-'; });
    }

    bool known(const std::string& subject) const { return valid_id(subject) && std::filesystem::is_regular_file(path_for(subject)); }

    std::filesystem::path path_for(const std::string& subject) const { return root_ / (subject + ".yaml"); }

    template <typename F>
    Response with_subject(const std::string& subject, F&& f) const {
        if (!known(subject)) return failure(404, "not_found", "unknown subject " + subject);
        std::lock_guard lock(mutex_for(subject));
        try {
            const std::string document = read_text_file(path_for(subject));
            const Ontology o = parse_ontology(document);
            return f(o, document);
        } catch (const Error& e) {
            return failure(500, "corrupt", e.what());
        }
    }

    std::mutex& mutex_for(const std::string& subject) const {
        std::lock_guard lock(registry_mutex_);
        auto& m = locks_[subject];
        if (!m) m = std::make_unique<std::mutex>();
        return *m;
    }

    std::filesystem::path root_;
    mutable std::mutex registry_mutex_;
    mutable std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

}  // namespace gateway

}  // namespace readloop
