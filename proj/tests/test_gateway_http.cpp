#include "catch_amalgamated.hpp"

#include <thread>

#include "readloop/gateway_http.hpp"
#include "support.hpp"

using namespace readloop;
using namespace readloop::gateway;

namespace {

struct Server {
    std::filesystem::path root = support::scratch_dir("http");
    Service service{copy_fixtures(root)};
    httplib::Server http;
    int port = 0;
    std::thread thread;

    static std::filesystem::path copy_fixtures(const std::filesystem::path& root) {
        std::filesystem::copy_file(support::fixture("computer_science"), root / "computer_science.yaml");
        return root;
    }

    Server() {
        mount(http, service);
        port = http.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { http.listen_after_bind(); });
        http.wait_until_ready();
    }
    ~Server() {
        http.stop();
        thread.join();
        std::filesystem::remove_all(root);
    }

    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json body_of(const httplib::Result& r) {
    REQUIRE(r);
    return json::parse(r->body);
}

}  // namespace

TEST_CASE("read routes") {
    Server s;
    auto c = s.client();

    auto r = c.Get("/api/subjects");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "application/json");
    CHECK(body_of(r)["data"][0]["subject_id"] == "computer_science");

    r = c.Get("/api/subjects/computer_science/coverage");
    CHECK(r->status == 200);
    CHECK(body_of(r)["data"]["kc_count"] == 131);

    r = c.Get("/api/subjects/computer_science/ontology");
    CHECK(body_of(r)["data"]["ontology"]["learning_objectives"].size() == 53);

    r = c.Get("/api/subjects/computer_science/search?q=binary%20search");
    CHECK(body_of(r)["data"][0]["id"] == "cs_kc_binary_search");

    r = c.Get("/api/subjects/computer_science/export");
    CHECK(body_of(r)["data"]["document"] == read_text_file(support::fixture("computer_science")));

    r = c.Get("/api/subjects/nothing/coverage");
    CHECK(r->status == 404);
    CHECK(body_of(r)["ok"] == false);
}

TEST_CASE("edit route versions and conflicts") {
    Server s;
    auto c = s.client();
    const json edit{{"base_version", 1},
                    {"edit", {{"kind", "rename"}, {"entity", "knowledge_component"}, {"target_id", "cs_kc_binary_search"}, {"label", "bisection"}}}};
    auto r = c.Post("/api/subjects/computer_science/edits", edit.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body_of(r)["version"] == 2);

    r = c.Post("/api/subjects/computer_science/edits", edit.dump(), "application/json");
    CHECK(r->status == 409);

    r = c.Post("/api/subjects/computer_science/edits", "{not json", "application/json");
    CHECK(r->status == 400);

    const json bad{{"base_version", 2}, {"edit", {{"kind", "delete"}, {"target_id", "cs_kc_binary_search"}}}};
    r = c.Post("/api/subjects/computer_science/edits", bad.dump(), "application/json");
    CHECK(r->status == 422);
    CHECK(body_of(r)["violations"][0]["rule"] == "referenced entity");
}

TEST_CASE("import and validate routes") {
    Server s;
    auto c = s.client();
    const std::string doc = read_text_file(support::fixture("computer_science"));
    auto r = c.Put("/api/subjects/computer_science/import?base_version=1", doc, "application/yaml");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(body_of(r)["version"] == 2);

    r = c.Put("/api/subjects/computer_science/import", doc, "application/yaml");
    CHECK(r->status == 400);
    r = c.Put("/api/subjects/computer_science/import?base_version=abc", doc, "application/yaml");
    CHECK(r->status == 400);

    r = c.Post("/api/validate", doc, "application/yaml");
    CHECK(r->status == 200);
    CHECK(body_of(r)["data"]["valid"] == true);
    r = c.Post("/api/validate", "x: [", "application/yaml");
    CHECK(r->status == 400);
}
