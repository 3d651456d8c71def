#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"

using namespace posrec;
using namespace posrec::test;

namespace {

// Independent CSV reader used as the round-trip oracle for load_csv.
std::vector<std::vector<std::string>> naive_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("load_csv round-trips the chain fixture") {
  const auto dir = temp_dir("storage_roundtrip");
  const auto csv = write_chain_csv(dir);
  auto table = ColumnTable::load_csv(csv, chain_schema(), dir);
  REQUIRE(table->row_count() == 3);

  const auto expected = naive_csv(csv);
  const auto schema = chain_schema();
  std::vector<uint64_t> all{0, 1, 2};
  for (size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& col = schema.columns[c];
    const auto values = table->read_slots(col.name, all);
    for (size_t r = 0; r < 3; ++r) {
      if (col.type.kind == ColumnType::Kind::Int32) {
        CHECK(values.ints[r] == std::stoi(expected[r][c]));
      } else {
        CHECK(values.strs[r] == expected[r][c]);
      }
    }
  }
}

TEST_CASE("load_csv header-only CSV yields an empty table") {
  const auto dir = temp_dir("storage_empty");
  std::ofstream(dir / "edges.csv") << "id,from,to,name\n";
  auto table = ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir);
  CHECK(table->row_count() == 0);
}

TEST_CASE("load_csv rejects over-long varchar values") {
  const auto dir = temp_dir("storage_overflow");
  std::ofstream(dir / "edges.csv") << "id,from,to,name\n0,0,1,averylongname12345678\n";
  CHECK_THROWS_WITH_AS(ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir),
                       doctest::Contains("ValueOverflow"), EngineError);
}

TEST_CASE("load_csv rejects a mismatching header") {
  const auto dir = temp_dir("storage_header");
  std::ofstream(dir / "edges.csv") << "id,src,dst,name\n";
  CHECK_THROWS_WITH_AS(ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir),
                       doctest::Contains("SchemaMismatch"), EngineError);
}

TEST_CASE("read_slots follows position order and duplicates") {
  auto table = load_chain("storage_read_slots");

  SUBCASE("selected positions") {
    const auto v = table->read_slots("to", std::vector<uint64_t>{0, 2});
    CHECK(v.ints == std::vector<int32_t>{1, 3});
  }
  SUBCASE("empty positions") {
    const auto v = table->read_slots("to", std::vector<uint64_t>{});
    CHECK(v.ints.empty());
  }
  SUBCASE("duplicate positions preserved") {
    const auto v = table->read_slots("from", std::vector<uint64_t>{1, 1});
    CHECK(v.ints == std::vector<int32_t>{0, 0});
  }
  SUBCASE("position out of range") {
    CHECK_THROWS_WITH_AS(table->read_slots("to", std::vector<uint64_t>{3}),
                         doctest::Contains("PositionOutOfRange"), EngineError);
  }
  SUBCASE("unknown column") {
    CHECK_THROWS_WITH_AS(table->read_slots("nope", std::vector<uint64_t>{0}),
                         doctest::Contains("UnknownColumn"), EngineError);
  }
}

TEST_CASE("values_read counts every requested slot") {
  auto table = load_chain("storage_metrics");
  table->read_slots("to", std::vector<uint64_t>{0, 1, 2});
  table->read_slots("to", std::vector<uint64_t>{1, 1});
  table->read_slots("from", std::vector<uint64_t>{2});
  CHECK(table->values_read("to") == 5);
  CHECK(table->values_read("from") == 1);
  CHECK(table->values_read("id") == 0);
  table->reset_metrics();
  CHECK(table->values_read("to") == 0);
}

TEST_CASE("page cache never exceeds its capacity") {
  // 2050 int32 rows span a page boundary at 32 KiB / 4 B = 8192 slots only
  // with many columns, so shrink the cache to force eviction instead.
  const auto dir = temp_dir("storage_cache");
  {
    std::ofstream csv(dir / "edges.csv");
    csv << "id,from,to,name\n";
    for (int i = 0; i < 20000; ++i) csv << i << ",0," << i + 1 << ",n" << i % 97 << "\n";
  }
  auto cache = std::make_shared<PageCache>(3);
  auto table = ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir, cache);
  std::vector<uint64_t> all(20000);
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  table->read_slots("id", all);
  table->read_slots("name", all);
  CHECK(cache->resident() <= 3);
  CHECK(cache->peak_resident() <= 3);
  // Values still correct under heavy eviction.
  const auto v = table->read_slots("to", std::vector<uint64_t>{19999, 0});
  CHECK(v.ints == std::vector<int32_t>{20000, 1});
}

TEST_CASE("varchar slots straddling page boundaries decode correctly") {
  // 15-byte slots do not divide 32768, so some slots span two pages.
  const auto dir = temp_dir("storage_straddle");
  {
    std::ofstream csv(dir / "edges.csv");
    csv << "id,from,to,name\n";
    for (int i = 0; i < 5000; ++i) csv << i << ",0,1,name" << i << "x\n";
  }
  auto table = ColumnTable::load_csv(dir / "edges.csv", chain_schema(), dir);
  for (uint64_t pos : {2184ULL, 2185ULL, 4369ULL, 4999ULL}) {
    const auto v = table->read_slots("name", std::vector<uint64_t>{pos});
    CHECK(v.strs[0] == "name" + std::to_string(pos) + "x");
  }
}
