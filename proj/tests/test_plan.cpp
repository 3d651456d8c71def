#include <doctest.h>

#include "fixtures.hpp"
#include "posrec/datagen.hpp"
#include "posrec/plan.hpp"

using namespace posrec;
using namespace posrec::test;

namespace {

Catalog edges_catalog(uint32_t payload = 0) {
  Catalog c;
  c["edges"] = edge_schema(payload);
  return c;
}

bool has_rule(const std::vector<Diagnostic>& diags, const std::string& rule) {
  for (const auto& d : diags) {
    if (d.rule == rule) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parse_plan accepts a minimal scan->materialize plan") {
  const auto spec = parse_plan(R"({
    "root": {"op": "materialize", "attrs": ["id", "to"],
             "child": {"op": "scan", "table": "edges"}}
  })");
  CHECK(spec.root->op == "materialize");
  CHECK(spec.root->children[0]->op == "scan");
  CHECK(spec.tables == std::vector<std::string>{"edges"});
  CHECK(spec.block_capacity == 1024);
  CHECK(validate_plan(spec, edges_catalog()).empty());
}

TEST_CASE("parse_plan rejects unknown ops and fields") {
  CHECK_THROWS_WITH_AS(parse_plan(R"({"root": {"op": "sort"}})"),
                       doctest::Contains("UnknownOp"), EngineError);
  CHECK_THROWS_WITH_AS(
      parse_plan(R"({"root": {"op": "scan", "table": "edges", "limit": 5}})"),
      doctest::Contains("unknown field"), EngineError);
  CHECK_THROWS_WITH_AS(parse_plan(R"({"root": {"op": "scan"}})"),
                       doctest::Contains("MissingField"), EngineError);
  CHECK_THROWS_WITH_AS(parse_plan("{nope"), doctest::Contains("JsonError"), EngineError);
}

TEST_CASE("serialize/parse round-trip for every template") {
  for (Experiment e : {Experiment::E1, Experiment::E2, Experiment::E3}) {
    for (EngineKind k : {EngineKind::TRec, EngineKind::PRec}) {
      TemplateConfig cfg;
      cfg.experiment = e;
      cfg.engine = k;
      cfg.depth = 4;
      cfg.payload = 3;
      const auto spec = build_template(cfg);
      const auto text = serialize_plan(spec);
      const auto reparsed = parse_plan(text);
      CHECK(serialize_plan(reparsed) == text);
    }
  }
}

TEST_CASE("every template validates against the catalog") {
  const auto catalog = edges_catalog(8);
  for (Experiment e : {Experiment::E1, Experiment::E2, Experiment::E3}) {
    for (EngineKind k : {EngineKind::TRec, EngineKind::PRec}) {
      for (uint32_t depth : {0u, 4u, 16u}) {
        for (uint32_t payload : {0u, 3u, 8u}) {
          TemplateConfig cfg;
          cfg.experiment = e;
          cfg.engine = k;
          cfg.depth = depth;
          cfg.payload = payload;
          for (SeedPredicate sp : {SeedPredicate::From, SeedPredicate::Id}) {
            cfg.seed_predicate = sp;
            const auto diags = validate_plan(build_template(cfg), catalog);
            CAPTURE(experiment_name(e));
            CAPTURE(engine_name(k));
            CHECK(diags.empty());
          }
        }
      }
    }
  }
}

TEST_CASE("validator diagnostics") {
  const auto catalog = edges_catalog(1);

  SUBCASE("precursive recursive branch ending in materialize is mixed representation") {
    const auto spec = parse_plan(R"({
      "root": {"op": "materialize", "attrs": ["id"], "child":
        {"op": "precursive", "max_depth": 2, "output_table": "edges",
         "seed": {"op": "pos_filter",
                  "predicate": {"column": "from", "cmp": "eq", "value": 0},
                  "child": {"op": "scan", "table": "edges"}},
         "recursive": {"op": "materialize", "attrs": ["id"], "child": {"op": "cte"}}}}
    })");
    CHECK(has_rule(validate_plan(spec, catalog), "MIXED_REPRESENTATION"));
  }

  SUBCASE("computed column below a positional recursion") {
    // A tuple-valued build side inside the positional recursion is legal,
    // but a generated attribute there is not.
    const auto spec = parse_plan(R"({
      "root": {"op": "materialize", "attrs": ["id"], "child":
        {"op": "precursive", "max_depth": 2, "output_table": "edges",
         "seed": {"op": "pos_filter",
                  "predicate": {"column": "from", "cmp": "eq", "value": 0},
                  "child": {"op": "scan", "table": "edges"}},
         "recursive": {"op": "phash_join", "build_key": "key2", "probe_key": "from",
                       "output_table": "edges",
                       "build": {"op": "materialize", "attrs": ["to"],
                                 "computed": [{"name": "key2", "expr": {"add": ["to", 1]}}],
                                 "child": {"op": "cte"}},
                       "probe": {"op": "scan", "table": "edges"}}}}
    })");
    CHECK(has_rule(validate_plan(spec, catalog), "COMPUTED_IN_POSITIONAL"));
  }

  SUBCASE("positional recursion over positions of another table") {
    Catalog two = catalog;
    two["vertices"] = TableSchema{"vertices", {{"vid", ColumnType::int32()}}};
    const auto spec = parse_plan(R"({
      "root": {"op": "materialize", "attrs": ["id"], "child":
        {"op": "precursive", "max_depth": 2, "output_table": "edges",
         "seed": {"op": "scan", "table": "vertices"},
         "recursive": {"op": "phash_join", "build_key": "to", "probe_key": "from",
                       "output_table": "edges",
                       "build": {"op": "cte"},
                       "probe": {"op": "scan", "table": "edges"}}}}
    })");
    CHECK(has_rule(validate_plan(spec, two), "MULTI_TABLE_POSITIONS"));
  }

  SUBCASE("all-positional plan has no materialization point") {
    const auto spec = parse_plan(R"({"root": {"op": "scan", "table": "edges"}})");
    CHECK(has_rule(validate_plan(spec, catalog), "NO_MATERIALIZATION_POINT"));
  }

  SUBCASE("unknown column") {
    const auto spec = parse_plan(R"({
      "root": {"op": "materialize", "attrs": ["id", "weight"],
               "child": {"op": "scan", "table": "edges"}}
    })");
    CHECK(has_rule(validate_plan(spec, catalog), "UNKNOWN_COLUMN"));
  }

  SUBCASE("cte outside a recursive branch") {
    const auto spec = parse_plan(R"({
      "root": {"op": "materialize", "attrs": ["id"], "child": {"op": "cte"}}
    })");
    CHECK(has_rule(validate_plan(spec, catalog), "CTE_PLACEMENT"));
  }

  SUBCASE("seed and recursive schema mismatch") {
    const auto spec = parse_plan(R"({
      "root": {"op": "trecursive", "max_depth": 2,
        "seed": {"op": "materialize", "attrs": ["id", "from", "to"],
                 "child": {"op": "scan", "table": "edges"}},
        "recursive": {"op": "project",
                      "columns": [{"name": "id", "expr": {"col": "id"}}],
                      "child": {"op": "cte"}}}
    })");
    CHECK(has_rule(validate_plan(spec, catalog), "SCHEMA_MISMATCH"));
  }
}

TEST_CASE("template shapes match the experiment definitions") {
  TemplateConfig cfg;
  cfg.depth = 4;

  SUBCASE("E1 PREC: seed filter, positional join, final materialize") {
    cfg.experiment = Experiment::E1;
    cfg.engine = EngineKind::PRec;
    const auto spec = build_template(cfg);
    CHECK(spec.root->op == "materialize");
    CHECK(spec.root->attrs == std::vector<std::string>{"id", "from", "to"});
    const auto& loop = *spec.root->children[0];
    CHECK(loop.op == "precursive");
    CHECK(loop.children[0]->op == "pos_filter");
    CHECK(loop.children[0]->predicate->column == "from");
    CHECK(loop.children[1]->op == "phash_join");
    CHECK(loop.children[1]->build_key == "to");
    CHECK(loop.children[1]->probe_key == "from");
  }

  SUBCASE("E2 TREC carries payload and depth through the recursion") {
    cfg.experiment = Experiment::E2;
    cfg.engine = EngineKind::TRec;
    cfg.payload = 3;
    const auto spec = build_template(cfg);
    const auto& loop = *spec.root->children[0];
    CHECK(loop.op == "trecursive");
    const auto& seed = *loop.children[0];
    CHECK(seed.attrs == std::vector<std::string>{"id", "from", "to", "c1", "c2", "c3"});
    REQUIRE(seed.computed.size() == 1);
    CHECK(seed.computed[0].name == "depth");
    // Residual guard on the CTE side of the join.
    const auto& join = *loop.children[1]->children[0];
    CHECK(join.op == "thash_join");
    CHECK(join.children[0]->op == "tuple_filter");
    CHECK(join.children[0]->predicate->column == "depth");
    CHECK(join.children[0]->predicate->literal == 4);
  }

  SUBCASE("E3 TREC: slim recursion, top-level join on id") {
    cfg.experiment = Experiment::E3;
    cfg.engine = EngineKind::TRec;
    cfg.payload = 2;
    const auto spec = build_template(cfg);
    CHECK(spec.root->op == "thash_join");
    CHECK(spec.root->build_key == "id");
    CHECK(spec.root->probe_key == "id");
    CHECK(spec.root->children[0]->op == "trecursive");
    CHECK(spec.root->children[0]->children[0]->attrs ==
          std::vector<std::string>{"id", "to"});
  }

  SUBCASE("seed predicate flag reproduces the id = 0 reading") {
    cfg.experiment = Experiment::E2;
    cfg.engine = EngineKind::TRec;
    cfg.seed_predicate = SeedPredicate::Id;
    const auto spec = build_template(cfg);
    CHECK(spec.root->children[0]->children[0]->children[0]->predicate->column == "id");
  }
}

TEST_CASE("executor rejects plans whose recursive branch lacks a cte") {
  auto db = [&] {
    const auto dir = temp_dir("plan_nocte");
    write_chain_csv(dir);
    ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir);
    return Database(dir);
  }();
  const auto spec = parse_plan(R"({
    "root": {"op": "trecursive", "max_depth": 1,
      "seed": {"op": "materialize", "attrs": ["id"],
               "child": {"op": "scan", "table": "edges"}},
      "recursive": {"op": "materialize", "attrs": ["id"],
                    "child": {"op": "scan", "table": "edges"}}}
  })");
  QueryMetrics qm;
  CHECK_THROWS_WITH_AS(build_executor(spec, db.tables(), &qm),
                       doctest::Contains("CteUnbound"), EngineError);
}
