#pragma once

// Execution harness: loads a data directory, runs validated plans to
// completion, checks engine output against the oracle and drives benchmarks.

#include <filesystem>
#include <map>
#include <variant>

#include "posrec/oracle.hpp"
#include "posrec/plan.hpp"

namespace posrec {

using Value = std::variant<int32_t, std::string>;
using Row = std::vector<Value>;

// A loaded data directory; tables share one page cache.
class Database {
 public:
  explicit Database(const std::filesystem::path& dir,
                    size_t cache_pages = PageCache::kDefaultCapacity);

  const std::map<std::string, std::shared_ptr<ColumnTable>>& tables() const { return tables_; }
  std::shared_ptr<ColumnTable> table(const std::string& name) const;
  Catalog catalog() const;
  const std::filesystem::path& dir() const { return dir_; }

  void reset_metrics();
  void cold_restart();

 private:
  std::filesystem::path dir_;
  std::shared_ptr<PageCache> cache_;
  std::map<std::string, std::shared_ptr<ColumnTable>> tables_;
};

struct RunMetrics {
  uint64_t result_rows = 0;
  uint64_t rows_materialized = 0;
  uint64_t hash_build_rows = 0;
  uint64_t peak_resident_blocks = 0;
  // values_read per (table, column), in schema order.
  std::map<std::string, std::map<std::string, uint64_t>> values_read;

  uint64_t values_read_total() const;
  uint64_t values_read_matching(const std::string& prefix) const;  // e.g. payload "c"
};

struct RunOptions {
  bool cold = false;          // clear the page cache and reopen files first
  bool track_levels = false;  // record the recursion level of each emitted row
  bool drop_last_row = false; // fault-injection hook for verify's self-test
};

struct RunResult {
  std::vector<std::string> column_names;
  std::vector<Row> rows;
  std::vector<uint32_t> levels;  // only when track_levels
  RunMetrics metrics;
};

// Validates, executes to EndOfStream and collects all emitted rows.
// Throws EngineError(InvalidPlan) with the diagnostics when validation fails.
RunResult run_plan(const PlanSpec& spec, Database& db, const RunOptions& opts = {});

struct VerifyOutcome {
  bool pass = false;
  uint64_t expected_rows = 0;
  uint64_t actual_rows = 0;
  std::vector<std::string> diffs;  // first 10 differing rows, level-annotated
};

// Runs the template query and compares with the oracle as row multisets.
VerifyOutcome verify(const TemplateConfig& cfg, Database& db,
                     const std::filesystem::path& csv_path, const RunOptions& opts = {});

struct BenchRow {
  std::string experiment;
  std::string engine;
  uint32_t depth = 0;
  uint32_t payload_n = 0;
  uint64_t edge_count = 0;
  double mean_ms = 0;
  double stddev_ms = 0;
  std::vector<double> samples_ms;
  RunMetrics metrics;
};

struct BenchConfig {
  Experiment experiment = Experiment::E2;
  std::vector<EngineKind> engines;
  std::vector<uint32_t> depths;
  std::vector<uint32_t> payloads;
  uint32_t repeats = 10;
  bool cold = false;
  SeedPredicate seed_predicate = SeedPredicate::From;
  size_t block_capacity = 1024;
};

std::vector<BenchRow> bench(const BenchConfig& cfg, Database& db);

// CSV header: experiment,engine,depth,payload_n,edge_count,mean_ms,stddev_ms,
// result_rows,values_read_total,rows_materialized,hash_build_rows
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& out_csv);
void write_bench_metrics_json(const std::vector<BenchRow>& rows,
                              const std::filesystem::path& out_json);

}  // namespace posrec
