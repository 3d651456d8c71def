#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "fixtures.hpp"
#include "posrec/datagen.hpp"
#include "posrec/oracle.hpp"

using namespace posrec;
using namespace posrec::test;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Every node but the root has exactly one incoming edge, and each edge at
// level d starts from a node first reached at level d-1.
void check_tree_shape(const oracle::Table& t) {
  const auto from = t.int_column("from");
  const auto to = t.int_column("to");
  std::unordered_set<int32_t> seen_to(to.begin(), to.end());
  CHECK(seen_to.size() == to.size());  // one parent per node
  CHECK(seen_to.count(0) == 0);        // root never a target

  std::unordered_set<int32_t> frontier{0};
  size_t placed = 0;
  while (placed < t.rows.size()) {
    std::unordered_set<int32_t> next;
    for (size_t i = 0; i < t.rows.size(); ++i) {
      if (frontier.count(from[i])) {
        next.insert(to[i]);
        ++placed;
      }
    }
    REQUIRE_FALSE(next.empty());  // otherwise some edge is unreachable
    frontier = std::move(next);
  }
}

}  // namespace

TEST_CASE("balanced tree edge counts") {
  GenConfig cfg;
  cfg.fanout = 2;
  cfg.height = 2;
  auto dir = temp_dir("gen_small");
  auto summary = generate_tree(cfg, dir);
  CHECK(summary.edge_count == 6);  // 2 + 4
  CHECK(summary.height == 2);

  const auto t = oracle::load_csv(dir / "edges.csv");
  REQUIRE(t.rows.size() == 6);
  CHECK(t.columns == std::vector<std::string>{"id", "from", "to", "name"});
  // BFS numbering: ids equal row order, root's children are 1 and 2.
  CHECK(t.int_column("id") == std::vector<int32_t>{0, 1, 2, 3, 4, 5});
  CHECK(t.int_column("from") == std::vector<int32_t>{0, 0, 1, 1, 2, 2});
  CHECK(t.int_column("to") == std::vector<int32_t>{1, 2, 3, 4, 5, 6});
  check_tree_shape(t);
}

TEST_CASE("height zero produces a header-only dataset") {
  GenConfig cfg;
  cfg.fanout = 3;
  cfg.height = 0;
  auto dir = temp_dir("gen_empty");
  auto summary = generate_tree(cfg, dir);
  CHECK(summary.edge_count == 0);
  const auto t = oracle::load_csv(dir / "edges.csv");
  CHECK(t.rows.empty());
  CHECK(t.columns.size() == 4);
}

TEST_CASE("fanout 10, height 5 yields 111110 edges") {
  GenConfig cfg;
  cfg.fanout = 10;
  cfg.height = 5;
  auto dir = temp_dir("gen_big");
  auto summary = generate_tree(cfg, dir);
  CHECK(summary.edge_count == 111110);  // 10 + 100 + ... + 100000
}

TEST_CASE("payload columns appear in schema and data") {
  GenConfig cfg;
  cfg.fanout = 2;
  cfg.height = 1;
  cfg.payload_cols = 3;
  auto dir = temp_dir("gen_payload");
  generate_tree(cfg, dir);

  const auto schema = schema_from_json_file(dir / "schema.json");
  CHECK(schema == edge_schema(3));
  const auto t = oracle::load_csv(dir / "edges.csv");
  CHECK(t.columns == std::vector<std::string>{"id", "from", "to", "name", "c1", "c2", "c3"});
  for (const auto& row : t.rows) {
    for (size_t c = 3; c < row.size(); ++c) {
      CHECK_FALSE(row[c].empty());
      CHECK(row[c].size() <= (c == 3 ? 15u : 20u));
    }
  }
}

TEST_CASE("generation is deterministic byte for byte") {
  GenConfig cfg;
  cfg.mode = TreeMode::Random;
  cfg.node_count = 500;
  cfg.payload_cols = 2;
  cfg.seed = 42;
  auto a = temp_dir("gen_det_a");
  auto b = temp_dir("gen_det_b");
  generate_tree(cfg, a);
  generate_tree(cfg, b);
  CHECK(slurp(a / "edges.csv") == slurp(b / "edges.csv"));
  CHECK(slurp(a / "schema.json") == slurp(b / "schema.json"));

  cfg.seed = 43;
  auto c = temp_dir("gen_det_c");
  generate_tree(cfg, c);
  CHECK(slurp(a / "edges.csv") != slurp(c / "edges.csv"));
}

TEST_CASE("random trees are valid trees sorted by level") {
  for (uint64_t seed : {1u, 7u, 99u}) {
    GenConfig cfg;
    cfg.mode = TreeMode::Random;
    cfg.node_count = 300;
    cfg.seed = seed;
    auto dir = temp_dir("gen_rand_" + std::to_string(seed));
    auto summary = generate_tree(cfg, dir);
    CHECK(summary.edge_count == 299);  // node_count - 1
    const auto t = oracle::load_csv(dir / "edges.csv");
    check_tree_shape(t);

    // Rows are grouped by BFS level: the oracle's levels must be contiguous
    // prefixes of the row order.
    const auto res = oracle::eval(t, "from", 0, summary.height + 1);
    size_t expect = 0;
    for (const auto& level : res.levels) {
      auto sorted = level;
      std::sort(sorted.begin(), sorted.end());
      for (size_t idx : sorted) CHECK(idx == expect++);
    }
    CHECK(expect == t.rows.size());
  }
}
