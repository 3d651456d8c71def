#include "posrec/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace posrec {

using json = nlohmann::json;

Database::Database(const std::filesystem::path& dir, size_t cache_pages)
    : dir_(dir), cache_(std::make_shared<PageCache>(cache_pages)) {
  // A data directory holds one table today (schema.json at top level), but
  // nothing below depends on that.
  if (!std::filesystem::exists(dir / "schema.json")) {
    throw EngineError(ErrorCode::IoError, "no schema.json in " + dir.string());
  }
  auto table = ColumnTable::open(dir, cache_);
  tables_[table->name()] = table;
}

std::shared_ptr<ColumnTable> Database::table(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw EngineError(ErrorCode::UnknownColumn, "table " + name);
  return it->second;
}

Catalog Database::catalog() const {
  Catalog out;
  for (const auto& [name, table] : tables_) out[name] = table->schema();
  return out;
}

void Database::reset_metrics() {
  for (auto& [_, table] : tables_) table->reset_metrics();
}

void Database::cold_restart() {
  for (auto& [_, table] : tables_) table->cold_restart();
}

uint64_t RunMetrics::values_read_total() const {
  uint64_t n = 0;
  for (const auto& [_, cols] : values_read) {
    for (const auto& [__, v] : cols) n += v;
  }
  return n;
}

uint64_t RunMetrics::values_read_matching(const std::string& prefix) const {
  uint64_t n = 0;
  for (const auto& [_, cols] : values_read) {
    for (const auto& [col, v] : cols) {
      if (col.starts_with(prefix)) n += v;
    }
  }
  return n;
}

RunResult run_plan(const PlanSpec& spec, Database& db, const RunOptions& opts) {
  const auto diags = validate_plan(spec, db.catalog());
  if (!diags.empty()) {
    std::ostringstream msg;
    for (const auto& d : diags) msg << d.rule << " at " << d.node_path << ": " << d.message << "; ";
    throw EngineError(ErrorCode::InvalidPlan, msg.str());
  }
  if (opts.cold) db.cold_restart();
  db.reset_metrics();

  QueryMetrics qm;
  std::vector<RecursiveOp*> recursive_nodes;
  auto root = build_executor(spec, db.tables(), &qm, &recursive_nodes);

  RunResult result;
  if (opts.track_levels) {
    for (auto* r : recursive_nodes) r->set_level_log(&result.levels);
  }

  root->open();
  while (auto block = root->next()) {
    auto& tuples = std::get<TupleBlock>(*block);
    if (result.column_names.empty()) {
      for (const auto& col : tuples.schema) result.column_names.push_back(col.name);
    }
    for (size_t row = 0; row < tuples.rows(); ++row) {
      Row out;
      out.reserve(tuples.columns.size());
      for (const auto& col : tuples.columns) {
        if (col.type.kind == ColumnType::Kind::Int32) {
          out.emplace_back(col.ints[row]);
        } else {
          out.emplace_back(col.strs[row]);
        }
      }
      result.rows.push_back(std::move(out));
    }
  }
  root->close();

  if (opts.drop_last_row && !result.rows.empty()) result.rows.pop_back();

  result.metrics.result_rows = result.rows.size();
  result.metrics.rows_materialized = qm.rows_materialized;
  result.metrics.hash_build_rows = qm.hash_build_rows;
  result.metrics.peak_resident_blocks = qm.peak_resident_blocks;
  for (const auto& [name, table] : db.tables()) {
    auto counts = table->values_read();
    auto& per_col = result.metrics.values_read[name];
    for (size_t i = 0; i < counts.size(); ++i) {
      per_col[table->schema().columns[i].name] = counts[i];
    }
  }
  return result;
}

namespace {

std::string row_to_string(const Row& row) {
  std::string out = "(";
  for (size_t i = 0; i < row.size(); ++i) {
    if (i) out += ",";
    if (const auto* v = std::get_if<int32_t>(&row[i])) {
      out += std::to_string(*v);
    } else {
      out += std::get<std::string>(row[i]);
    }
  }
  out += ")";
  return out;
}

// Expected rows from the oracle, projected to the experiment's output schema,
// annotated with their recursion level.
std::vector<std::pair<Row, uint32_t>> oracle_rows(const TemplateConfig& cfg,
                                                  const oracle::Table& table) {
  const std::string seed_col = cfg.seed_predicate == SeedPredicate::From ? "from" : "id";
  const auto result = oracle::eval(table, seed_col, 0, cfg.depth);

  std::vector<int> col_idx;
  std::vector<bool> is_int;
  auto add_col = [&](const std::string& name, bool as_int) {
    const int idx = table.column_index(name);
    if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, "oracle CSV lacks " + name);
    col_idx.push_back(idx);
    is_int.push_back(as_int);
  };
  add_col("id", true);
  add_col("from", true);
  add_col("to", true);
  if (cfg.experiment != Experiment::E1) {
    for (uint32_t i = 1; i <= cfg.payload; ++i) add_col("c" + std::to_string(i), false);
  }

  std::vector<std::pair<Row, uint32_t>> out;
  for (size_t level = 0; level < result.levels.size(); ++level) {
    for (size_t row : result.levels[level]) {
      Row r;
      for (size_t c = 0; c < col_idx.size(); ++c) {
        const auto& s = table.rows[row][static_cast<size_t>(col_idx[c])];
        if (is_int[c]) {
          r.emplace_back(static_cast<int32_t>(std::stol(s)));
        } else {
          r.emplace_back(s);
        }
      }
      out.emplace_back(std::move(r), static_cast<uint32_t>(level));
    }
  }
  return out;
}

}  // namespace

VerifyOutcome verify(const TemplateConfig& cfg, Database& db,
                     const std::filesystem::path& csv_path, const RunOptions& opts) {
  const auto table = oracle::load_csv(csv_path);
  auto expected = oracle_rows(cfg, table);

  auto run = run_plan(build_template(cfg), db, opts);

  VerifyOutcome outcome;
  outcome.expected_rows = expected.size();
  outcome.actual_rows = run.rows.size();

  std::vector<Row> want;
  want.reserve(expected.size());
  for (auto& [row, _] : expected) want.push_back(row);
  std::vector<Row> got = run.rows;
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  if (want == got) {
    outcome.pass = true;
    return outcome;
  }

  // First 10 differing rows, annotated with the oracle level where known.
  auto level_of = [&](const Row& row) -> std::string {
    for (const auto& [r, level] : expected) {
      if (r == row) return std::to_string(level);
    }
    return "?";
  };
  size_t wi = 0, gi = 0;
  while ((wi < want.size() || gi < got.size()) && outcome.diffs.size() < 10) {
    if (gi >= got.size() || (wi < want.size() && want[wi] < got[gi])) {
      outcome.diffs.push_back("missing " + row_to_string(want[wi]) + " level=" +
                              level_of(want[wi]));
      ++wi;
    } else if (wi >= want.size() || got[gi] < want[wi]) {
      outcome.diffs.push_back("unexpected " + row_to_string(got[gi]) + " level=" +
                              level_of(got[gi]));
      ++gi;
    } else {
      ++wi;
      ++gi;
    }
  }
  return outcome;
}

std::vector<BenchRow> bench(const BenchConfig& cfg, Database& db) {
  std::vector<BenchRow> rows;
  const uint64_t edge_count = db.tables().begin()->second->row_count();
  for (EngineKind engine : cfg.engines) {
    for (uint32_t depth : cfg.depths) {
      for (uint32_t payload : cfg.payloads) {
        TemplateConfig tc;
        tc.experiment = cfg.experiment;
        tc.engine = engine;
        tc.depth = depth;
        tc.payload = payload;
        tc.seed_predicate = cfg.seed_predicate;
        tc.block_capacity = cfg.block_capacity;
        const auto spec = build_template(tc);

        BenchRow row;
        row.experiment = experiment_name(cfg.experiment);
        row.engine = engine_name(engine);
        row.depth = depth;
        row.payload_n = payload;
        row.edge_count = edge_count;

        RunOptions opts;
        opts.cold = cfg.cold;
        uint64_t first_result_rows = 0;
        for (uint32_t rep = 0; rep < cfg.repeats; ++rep) {
          const auto t0 = std::chrono::steady_clock::now();
          auto run = run_plan(spec, db, opts);
          const auto t1 = std::chrono::steady_clock::now();
          row.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
          if (rep == 0) {
            first_result_rows = run.metrics.result_rows;
          } else if (run.metrics.result_rows != first_result_rows) {
            throw EngineError(ErrorCode::InvalidPlan, "result_rows varies across repetitions");
          }
          row.metrics = std::move(run.metrics);
        }
        double sum = 0;
        for (double s : row.samples_ms) sum += s;
        row.mean_ms = sum / row.samples_ms.size();
        double var = 0;
        for (double s : row.samples_ms) var += (s - row.mean_ms) * (s - row.mean_ms);
        row.stddev_ms = row.samples_ms.size() > 1
                            ? std::sqrt(var / (static_cast<double>(row.samples_ms.size()) - 1))
                            : 0.0;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& out_csv) {
  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw EngineError(ErrorCode::IoError, "cannot write " + out_csv.string());
  out << "experiment,engine,depth,payload_n,edge_count,mean_ms,stddev_ms,result_rows,"
         "values_read_total,rows_materialized,hash_build_rows\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.engine << ',' << r.depth << ',' << r.payload_n << ','
        << r.edge_count << ',' << r.mean_ms << ',' << r.stddev_ms << ','
        << r.metrics.result_rows << ',' << r.metrics.values_read_total() << ','
        << r.metrics.rows_materialized << ',' << r.metrics.hash_build_rows << "\n";
  }
}

void write_bench_metrics_json(const std::vector<BenchRow>& rows,
                              const std::filesystem::path& out_json) {
  json arr = json::array();
  for (const auto& r : rows) {
    json vr;
    for (const auto& [table, cols] : r.metrics.values_read) {
      for (const auto& [col, v] : cols) vr[table][col] = v;
    }
    arr.push_back({{"experiment", r.experiment},
                   {"engine", r.engine},
                   {"depth", r.depth},
                   {"payload_n", r.payload_n},
                   {"edge_count", r.edge_count},
                   {"mean_ms", r.mean_ms},
                   {"stddev_ms", r.stddev_ms},
                   {"samples_ms", r.samples_ms},
                   {"result_rows", r.metrics.result_rows},
                   {"rows_materialized", r.metrics.rows_materialized},
                   {"hash_build_rows", r.metrics.hash_build_rows},
                   {"peak_resident_blocks", r.metrics.peak_resident_blocks},
                   {"values_read", std::move(vr)}});
  }
  std::ofstream out(out_json, std::ios::trunc);
  if (!out) throw EngineError(ErrorCode::IoError, "cannot write " + out_json.string());
  out << arr.dump(2) << "\n";
}

}  // namespace posrec
