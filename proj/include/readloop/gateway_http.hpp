#pragma once

// HTTP routes for gateway::Service.
//
//   GET  /api/subjects
//   GET  /api/subjects/{id}/ontology
//   POST /api/subjects/{id}/edits          {"base_version": N, "edit": {...}}
//   GET  /api/subjects/{id}/coverage
//   GET  /api/subjects/{id}/search?q=...
//   GET  /api/subjects/{id}/export
//   PUT  /api/subjects/{id}/import?base_version=N   (body: ontology YAML)
//   POST /api/validate                     (body: ontology YAML)
//
// Every response body is a JSON envelope with "ok" and either "data" or "error".

#include <string>

#include <httplib.h>

#include "readloop/gateway.hpp"

namespace readloop::gateway {

inline void send(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

inline void mount(httplib::Server& server, Service& service) {
    server.Get("/api/subjects", [&](const httplib::Request&, httplib::Response& res) { send(res, service.list_subjects()); });
    server.Get(R"(/api/subjects/([A-Za-z0-9_\-]+)/ontology)",
               [&](const httplib::Request& req, httplib::Response& res) { send(res, service.get_ontology(req.matches[1])); });
    server.Get(R"(/api/subjects/([A-Za-z0-9_\-]+)/coverage)",
               [&](const httplib::Request& req, httplib::Response& res) { send(res, service.get_coverage(req.matches[1])); });
    server.Get(R"(/api/subjects/([A-Za-z0-9_\-]+)/search)", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.search(req.matches[1], req.has_param("q") ? req.get_param_value("q") : std::string()));
    });
    server.Get(R"(/api/subjects/([A-Za-z0-9_\-]+)/export)",
               [&](const httplib::Request& req, httplib::Response& res) { send(res, service.export_document(req.matches[1])); });
    server.Post(R"(/api/subjects/([A-Za-z0-9_\-]+)/edits)", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) return send(res, failure(400, "bad_request", "body is not valid JSON"));
        send(res, service.post_edit(req.matches[1], body));
    });
    server.Put(R"(/api/subjects/([A-Za-z0-9_\-]+)/import)", [&](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("base_version")) return send(res, failure(400, "bad_request", "base_version query parameter is required"));
        std::int64_t base = 0;
        try {
            base = std::stoll(req.get_param_value("base_version"));
        } catch (const std::exception&) {
            return send(res, failure(400, "bad_request", "base_version must be an integer"));
        }
        send(res, service.import_document(req.matches[1], base, req.body));
    });
    server.Post("/api/validate", [&](const httplib::Request& req, httplib::Response& res) { send(res, Service::validate_document(req.body)); });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        }
        send(res, failure(500, "internal", message));
    });
}

}  // namespace readloop::gateway
