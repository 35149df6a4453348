#include "catch_amalgamated.hpp"

#include "readloop/gateway.hpp"
#include "support.hpp"

using namespace readloop;
using namespace readloop::gateway;

namespace {

struct Fixture {
    std::filesystem::path root = support::scratch_dir("gateway");
    Service service{init(root)};

    static std::filesystem::path init(const std::filesystem::path& root) {
        for (const auto& e : std::filesystem::directory_iterator(support::source_dir() / "data" / "ontologies"))
            if (e.path().extension() == ".yaml") std::filesystem::copy_file(e.path(), root / e.path().filename());
        return root;
    }
    ~Fixture() { std::filesystem::remove_all(root); }

    std::string file(const std::string& subject) const { return read_text_file(root / (subject + ".yaml")); }
};

json rename_kc(std::int64_t base, const std::string& from, const std::string& to) {
    return {{"base_version", base}, {"edit", {{"kind", "rename"}, {"entity", "knowledge_component"}, {"target_id", from}, {"new_id", to}}}};
}

}  // namespace

TEST_CASE("subjects are listed with coverage") {
    Fixture f;
    const auto r = f.service.list_subjects();
    CHECK(r.status == 200);
    REQUIRE(r.body["data"].size() == 3);
    CHECK(r.body["data"][0]["subject_id"] == "computer_science");
    CHECK(r.body["data"][0]["coverage"]["kc_count"] == 131);
}

TEST_CASE("coverage of the fixture subjects") {
    Fixture f;
    const auto r = f.service.get_coverage("computer_science");
    CHECK(r.status == 200);
    CHECK(r.body["ok"] == true);
    CHECK(r.body["data"]["chapter_count"] == 16);
    CHECK(r.body["data"]["lo_count"] == 53);
    CHECK(r.body["data"]["kc_count"] == 131);
    CHECK(r.body["version"] == 1);
    CHECK(f.service.get_coverage("general_biology").body["data"]["kc_count"] == 172);
    CHECK(f.service.get_coverage("inorganic_chemistry").body["data"]["lo_count"] == 57);
}

TEST_CASE("ontology endpoint returns document and structure") {
    Fixture f;
    const auto r = f.service.get_ontology("computer_science");
    CHECK(r.status == 200);
    CHECK(r.body["data"]["document"] == f.file("computer_science"));
    CHECK(r.body["data"]["ontology"]["chapters"].size() == 16);
}

TEST_CASE("unknown or malformed subjects are 404") {
    Fixture f;
    CHECK(f.service.get_ontology("astronomy").status == 404);
    CHECK(f.service.get_coverage("../etc").status == 404);
    CHECK(f.service.post_edit("astronomy", rename_kc(1, "a", "b")).status == 404);
    CHECK(f.service.import_document("astronomy", 1, "x").status == 404);
}

TEST_CASE("accepted rename is persisted with a new version") {
    Fixture f;
    const auto r = f.service.post_edit("computer_science", rename_kc(1, "cs_kc_binary_search", "cs_kc_bisection"));
    REQUIRE(r.status == 200);
    CHECK(r.body["version"] == 2);
    const auto stored = parse_ontology(f.file("computer_science"));
    CHECK(stored.version == 2);
    CHECK(stored.find_kc("cs_kc_bisection") != nullptr);
    CHECK(stored.find_kc("cs_kc_binary_search") == nullptr);
    CHECK_FALSE(std::filesystem::exists(f.root / "computer_science.yaml.tmp"));
}

TEST_CASE("merge drops a KC from coverage") {
    Fixture f;
    const json body{{"base_version", 1},
                    {"edit", {{"kind", "merge_kcs"}, {"target_id", "cs_kc_binary_search"}, {"merge_ids", {"cs_kc_linear_search"}}}}};
    const auto r = f.service.post_edit("computer_science", body);
    REQUIRE(r.status == 200);
    CHECK(r.body["data"]["coverage"]["kc_count"] == 130);
    CHECK(f.service.get_coverage("computer_science").body["data"]["kc_count"] == 130);
}

TEST_CASE("stale base version is a conflict and changes nothing") {
    Fixture f;
    REQUIRE(f.service.post_edit("computer_science", rename_kc(1, "cs_kc_binary_search", "cs_kc_b")).status == 200);
    const auto before = f.file("computer_science");
    const auto r = f.service.post_edit("computer_science", rename_kc(1, "cs_kc_linear_search", "cs_kc_l"));
    CHECK(r.status == 409);
    CHECK(r.body["error"]["code"] == "conflict");
    CHECK(r.body["version"] == 2);
    CHECK(f.file("computer_science") == before);
}

TEST_CASE("invalid edits are 422 with the same violations as apply_edit") {
    Fixture f;
    const json edit{{"kind", "delete"}, {"entity", "knowledge_component"}, {"target_id", "cs_kc_binary_search"}};
    const auto before = f.file("computer_science");
    const auto r = f.service.post_edit("computer_science", {{"base_version", 1}, {"edit", edit}});
    CHECK(r.status == 422);
    const auto expected = apply_edit(parse_ontology(before), edit_from_json(edit)).violations;
    REQUIRE(r.body["violations"].size() == expected.size());
    CHECK(r.body["violations"][0] == violation_json(expected[0]));
    CHECK(f.file("computer_science") == before);
}

TEST_CASE("malformed edit bodies are 400") {
    Fixture f;
    CHECK(f.service.post_edit("computer_science", {{"edit", {}}}).status == 400);
    CHECK(f.service.post_edit("computer_science", {{"base_version", 1}, {"edit", {{"kind", "explode"}, {"target_id", "x"}}}}).status == 400);
    CHECK(f.service.post_edit("computer_science", {{"base_version", 1}, {"edit", {{"kind", "rename"}}}}).status == 400);
}

TEST_CASE("split and relink through the service") {
    Fixture f;
    const auto o = parse_ontology(f.file("computer_science"));
    const auto* lo = o.find_lo("cs_lo07_1");
    const json split{{"base_version", 1},
                     {"edit",
                      {{"kind", "split_kc"},
                       {"target_id", lo->kc_ids[0]},
                       {"split_parts", {{{"id", "part_one"}, {"lo_ids", {"cs_lo07_1"}}}, {{"id", "part_two"}, {"lo_ids", {"cs_lo07_1"}}}}}}}};
    auto r = f.service.post_edit("computer_science", split);
    REQUIRE(r.status == 200);
    CHECK(r.body["data"]["coverage"]["kc_count"] == 132);

    const json relink{{"base_version", 2}, {"edit", {{"kind", "relink"}, {"target_id", "cs_lo07_1"}, {"chapter_id", "cs_ch01"}}}};
    r = f.service.post_edit("computer_science", relink);
    REQUIRE(r.status == 200);
    CHECK(parse_ontology(f.file("computer_science")).find_chapter("cs_ch01")->lo_ids.back() == "cs_lo07_1");
}

TEST_CASE("search endpoint") {
    Fixture f;
    const auto r = f.service.search("computer_science", "binary search");
    REQUIRE(r.status == 200);
    REQUIRE_FALSE(r.body["data"].empty());
    CHECK(r.body["data"][0]["id"] == "cs_kc_binary_search");
    CHECK(r.body["data"][0]["entity"] == "knowledge_component");
    CHECK(f.service.search("computer_science", "").body["data"].empty());
}

TEST_CASE("export then import bumps the version") {
    Fixture f;
    const std::string doc = f.service.export_document("general_biology").body["data"]["document"];
    auto r = f.service.import_document("general_biology", 1, doc);
    REQUIRE(r.status == 200);
    CHECK(r.body["version"] == 2);
    CHECK(parse_ontology(f.file("general_biology")).version == 2);
    CHECK(f.service.import_document("general_biology", 1, doc).status == 409);
    CHECK(f.service.import_document("general_biology", 2, "chapters: [").status == 400);

    std::string broken = doc;
    broken += "  extra_kc:\n    label: lonely\n";
    const auto bad = f.service.import_document("general_biology", 2, broken);
    CHECK(bad.status == 422);
    CHECK(bad.body["violations"][0]["rule"] == "orphan KC");
}

TEST_CASE("validate reports without saving") {
    const auto good = Service::validate_document(read_text_file(support::fixture("inorganic_chemistry")));
    CHECK(good.status == 200);
    CHECK(good.body["data"]["valid"] == true);
    CHECK(good.body["data"]["coverage"]["chapter_count"] == 12);

    const auto bad = Service::validate_document("subject_id: x\nversion: 1\nchapters: []\nlearning_objectives: []\nknowledge_components: {k: {label: y}}\n");
    CHECK(bad.status == 200);
    CHECK(bad.body["data"]["valid"] == false);
    CHECK(bad.body["data"]["violations"][0]["entity_id"] == "k");

    CHECK(Service::validate_document("a: [").body["error"]["code"] == "parse_error");
    CHECK(Service::validate_document("a: 1").body["error"]["code"] == "schema_error");
}

TEST_CASE("concurrent edits serialize on the subject") {
    Fixture f;
    std::vector<int> statuses(8);
    {
        std::vector<std::jthread> pool;
        for (int i = 0; i < 8; ++i)
            pool.emplace_back([&, i] { statuses[i] = f.service.post_edit("computer_science", rename_kc(1, "cs_kc_binary_search", "kc_" + std::to_string(i))).status; });
    }
    CHECK(std::ranges::count(statuses, 200) == 1);
    CHECK(std::ranges::count(statuses, 409) == 7);
    CHECK(parse_ontology(f.file("computer_science")).version == 2);
}
