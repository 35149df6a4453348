#include "catch_amalgamated.hpp"

#include <algorithm>

#include "support.hpp"

using namespace readloop;

namespace {

const char* kSmall = R"(subject_id: demo
version: 4
chapters:
  - id: ch1
    title: One
    learning_objectives: [lo1, lo2]
  - id: ch2
    title: Two
    learning_objectives: [lo3]
learning_objectives:
  - id: lo1
    statement: Explain stacks
    kc_ids: [kc_stack]
  - id: lo2
    statement: Explain queues
    kc_ids: [kc_queue, kc_stack]
  - id: lo3
    statement: Use hashing
    kc_ids: [kc_hash]
knowledge_components:
  kc_stack:
    label: stack
    description: last in first out
    misconceptions:
      - id: mc1
        description: stacks are sorted
  kc_queue:
    label: queue
    description: first in first out
    misconceptions:
      - id: mc1
        description: queues drop items
  kc_hash:
    label: hash table
    description: keyed lookup
)";

Ontology small() { return parse_ontology(kSmall); }

bool has_rule(const std::vector<Violation>& vs, Rule r, const std::string& id) {
    return std::ranges::any_of(vs, [&](const Violation& v) { return v.rule == r && v.entity_id == id; });
}

}  // namespace

TEST_CASE("fixture ontologies load with the expected sizes") {
    struct Expect {
        const char* subject;
        std::size_t chapters, los, kcs;
    };
    for (auto e : {Expect{"computer_science", 16, 53, 131}, Expect{"general_biology", 20, 60, 172}, Expect{"inorganic_chemistry", 12, 57, 177}}) {
        const auto& o = support::ontology(e.subject);
        CHECK(o.subject_id == e.subject);
        const auto cov = coverage_summary(o);
        CHECK(cov.chapter_count == e.chapters);
        CHECK(cov.lo_count == e.los);
        CHECK(cov.kc_count == e.kcs);
        CHECK(validate_ontology(o).empty());
    }
}

TEST_CASE("chapter coverage counts distinct reachable KCs") {
    const auto cov = coverage_summary(small());
    REQUIRE(cov.chapters.size() == 2);
    CHECK(cov.chapters[0].lo_count == 2);
    CHECK(cov.chapters[0].kc_count == 2);
    CHECK(cov.chapters[1].kc_count == 1);
}

TEST_CASE("malformed YAML reports a line") {
    try {
        parse_ontology("subject_id: x\nversion: 1\nchapters: [a, b\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 3);
    }
}

TEST_CASE("schema errors carry the offending path") {
    try {
        parse_ontology("subject_id: x\nversion: 1\nchapters:\n  - id: c\n    learning_objectives: 5\nlearning_objectives: []\nknowledge_components: {}\n");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "chapters[0].learning_objectives");
    }
    CHECK_THROWS_AS(parse_ontology("subject_id: x\nversion: one\nchapters: []\nlearning_objectives: []\nknowledge_components: {}\n"), SchemaError);
    CHECK_THROWS_AS(parse_ontology("- a\n- b\n"), SchemaError);
}

TEST_CASE("validation names each broken invariant") {
    Ontology o = small();
    o.chapters[1].lo_ids.push_back("lo1");             // shared
    o.chapters[0].lo_ids.push_back("lo_missing");      // dangling
    o.learning_objectives.push_back({"lo_orphan", "", {"kc_hash"}});  // unowned
    o.learning_objectives[2].kc_ids.push_back("kc_nope");
    o.knowledge_components.push_back({"kc_lonely", "lonely", "", {{"m", ""}, {"m", ""}}});
    const auto vs = validate_ontology(o);
    CHECK(has_rule(vs, Rule::shared_lo, "lo1"));
    CHECK(has_rule(vs, Rule::dangling_lo, "ch1"));
    CHECK(has_rule(vs, Rule::unowned_lo, "lo_orphan"));
    CHECK(has_rule(vs, Rule::dangling_kc, "lo3"));
    CHECK(has_rule(vs, Rule::orphan_kc, "kc_lonely"));
    CHECK(has_rule(vs, Rule::duplicate_misconception, "kc_lonely"));

    Ontology e = small();
    e.learning_objectives[0].kc_ids.clear();
    e.chapters[1].lo_ids.clear();
    e.knowledge_components.push_back(e.knowledge_components[0]);
    const auto ve = validate_ontology(e);
    CHECK(has_rule(ve, Rule::empty_kc_list, "lo1"));
    CHECK(has_rule(ve, Rule::empty_lo_list, "ch2"));
    CHECK(has_rule(ve, Rule::duplicate_id, "kc_stack"));
}

TEST_CASE("parse rejects invariant violations with the full list") {
    std::string doc = kSmall;
    doc.replace(doc.find("[kc_hash]"), 9, "[kc_gone]");
    try {
        parse_ontology(doc);
        FAIL("expected OntologySchemaError");
    } catch (const OntologySchemaError& e) {
        CHECK(has_rule(e.violations(), Rule::dangling_kc, "lo3"));
        CHECK(has_rule(e.violations(), Rule::orphan_kc, "kc_hash"));
        CHECK(std::string(e.what()).find("kc_gone") != std::string::npos);
    }
}

TEST_CASE("serialize then parse is the identity") {
    const Ontology o = small();
    CHECK(parse_ontology(serialize_ontology(o)) == o);
    const auto& cs = support::ontology("computer_science");
    CHECK(parse_ontology(serialize_ontology(cs)) == cs);
}

TEST_CASE("rename a KC rewrites references and bumps the version") {
    const Ontology o = small();
    OntologyEdit e;
    e.kind = EditKind::rename;
    e.target_id = "kc_stack";
    e.new_id = "kc_lifo";
    e.label = "LIFO stack";
    const auto r = apply_edit(o, e);
    REQUIRE(r.accepted());
    CHECK(r.ontology.version == o.version + 1);
    CHECK(r.ontology.find_kc("kc_stack") == nullptr);
    CHECK(r.ontology.find_kc("kc_lifo")->label == "LIFO stack");
    CHECK(r.ontology.find_lo("lo2")->kc_ids == std::vector<std::string>{"kc_queue", "kc_lifo"});
}

TEST_CASE("rename onto an existing id is rejected and leaves the input unchanged") {
    const Ontology o = small();
    OntologyEdit e;
    e.kind = EditKind::rename;
    e.entity = EntityKind::learning_objective;
    e.target_id = "lo1";
    e.new_id = "lo2";
    const auto r = apply_edit(o, e);
    CHECK_FALSE(r.accepted());
    CHECK(r.violations[0].rule == Rule::duplicate_id);
    CHECK(r.ontology == o);
}

TEST_CASE("merge folds KCs into the survivor") {
    const Ontology o = small();
    OntologyEdit e;
    e.kind = EditKind::merge_kcs;
    e.target_id = "kc_stack";
    e.merge_ids = {"kc_queue"};
    const auto r = apply_edit(o, e);
    REQUIRE(r.accepted());
    CHECK(r.ontology.knowledge_components.size() == o.knowledge_components.size() - 1);
    CHECK(r.ontology.find_lo("lo2")->kc_ids == std::vector<std::string>{"kc_stack"});
    // clashing misconception ids get prefixed with the merged KC
    const auto& ms = r.ontology.find_kc("kc_stack")->misconceptions;
    REQUIRE(ms.size() == 2);
    CHECK(ms[1].id == "kc_queue.mc1");

    e.merge_ids = {"kc_stack"};
    CHECK_FALSE(apply_edit(o, e).accepted());
}

TEST_CASE("split assigns parts to referencing LOs") {
    const Ontology o = small();
    OntologyEdit e;
    e.kind = EditKind::split_kc;
    e.target_id = "kc_stack";
    e.split_parts = {{"kc_push", "push", "", {"lo1"}, std::nullopt}, {"kc_pop", "pop", "", {"lo2"}, std::vector<std::string>{}}};
    const auto r = apply_edit(o, e);
    REQUIRE(r.accepted());
    CHECK(r.ontology.find_kc("kc_stack") == nullptr);
    CHECK(r.ontology.find_lo("lo1")->kc_ids == std::vector<std::string>{"kc_push"});
    CHECK(r.ontology.find_lo("lo2")->kc_ids == std::vector<std::string>{"kc_queue", "kc_pop"});
    CHECK(r.ontology.find_kc("kc_push")->misconceptions.size() == 1);
    CHECK(r.ontology.find_kc("kc_pop")->misconceptions.empty());

    // a part nobody uses would be an orphan
    e.split_parts[1].lo_ids = {};
    const auto bad = apply_edit(o, e);
    CHECK_FALSE(bad.accepted());
    CHECK(has_rule(bad.violations, Rule::orphan_kc, "kc_pop"));
}

TEST_CASE("delete needs relink_to while referenced") {
    const Ontology o = small();
    OntologyEdit e;
    e.kind = EditKind::remove;
    e.target_id = "kc_hash";
    auto r = apply_edit(o, e);
    CHECK_FALSE(r.accepted());
    CHECK(r.violations[0].rule == Rule::referenced_entity);

    e.relink_to = "kc_stack";
    r = apply_edit(o, e);
    REQUIRE(r.accepted());
    CHECK(r.ontology.find_lo("lo3")->kc_ids == std::vector<std::string>{"kc_stack"});

    OntologyEdit ch;
    ch.kind = EditKind::remove;
    ch.entity = EntityKind::chapter;
    ch.target_id = "ch2";
    ch.relink_to = "ch1";
    r = apply_edit(o, ch);
    REQUIRE(r.accepted());
    CHECK(r.ontology.chapters.size() == 1);
    CHECK(r.ontology.chapters[0].lo_ids.size() == 3);
}

TEST_CASE("deleting an LO that leaves an orphan KC is rejected") {
    OntologyEdit e;
    e.kind = EditKind::remove;
    e.entity = EntityKind::learning_objective;
    e.target_id = "lo3";
    const auto r = apply_edit(small(), e);
    CHECK_FALSE(r.accepted());
    CHECK(has_rule(r.violations, Rule::orphan_kc, "kc_hash"));
}

TEST_CASE("create and relink") {
    const Ontology o = small();
    OntologyEdit c;
    c.kind = EditKind::create;
    c.entity = EntityKind::learning_objective;
    c.target_id = "lo4";
    c.chapter_id = "ch2";
    c.kc_ids = std::vector<std::string>{"kc_hash", "kc_queue"};
    auto r = apply_edit(o, c);
    REQUIRE(r.accepted());
    CHECK(r.ontology.find_chapter("ch2")->lo_ids.back() == "lo4");

    OntologyEdit k;
    k.kind = EditKind::create;
    k.target_id = "kc_tree";
    k.label = "tree";
    k.lo_ids = {"lo3"};
    r = apply_edit(r.ontology, k);
    REQUIRE(r.accepted());
    CHECK(r.ontology.version == o.version + 2);

    OntologyEdit orphan = k;
    orphan.target_id = "kc_graph";
    orphan.lo_ids = {};
    CHECK(has_rule(apply_edit(o, orphan).violations, Rule::orphan_kc, "kc_graph"));

    OntologyEdit move;
    move.kind = EditKind::relink;
    move.entity = EntityKind::learning_objective;
    move.target_id = "lo2";
    move.chapter_id = "ch2";
    r = apply_edit(o, move);
    REQUIRE(r.accepted());
    CHECK(r.ontology.find_chapter("ch1")->lo_ids == std::vector<std::string>{"lo1"});

    move.chapter_id.reset();
    CHECK(apply_edit(o, move).violations[0].rule == Rule::bad_payload);
}

TEST_CASE("search ranks id matches before labels and descriptions") {
    const Ontology o = small();
    CHECK(search_entities(o, "").empty());
    const auto hits = search_entities(o, "STACK");
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].id == "kc_stack");
    CHECK(hits[0].field == "id");
    CHECK(hits[1].id == "lo1");
    CHECK(hits[1].field == "statement");

    const auto exact = search_entities(o, "lo1");
    REQUIRE_FALSE(exact.empty());
    CHECK(exact[0].id == "lo1");

    const auto desc = search_entities(o, "first out");
    REQUIRE(desc.size() == 2);
    CHECK(desc[0].field == "description");

    const auto cs = search_entities(support::ontology("computer_science"), "binary search");
    REQUIRE_FALSE(cs.empty());
    CHECK(cs[0].id == "cs_kc_binary_search");
}
