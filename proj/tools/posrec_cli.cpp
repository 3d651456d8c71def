// posrec command line: dataset generation, loading, plan execution, oracle
// verification and the benchmark driver.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posrec/datagen.hpp"
#include "posrec/runner.hpp"

using namespace posrec;
using json = nlohmann::json;

namespace {

Experiment parse_experiment(int e) {
  switch (e) {
    case 1: return Experiment::E1;
    case 2: return Experiment::E2;
    case 3: return Experiment::E3;
  }
  throw CLI::ValidationError("--experiment must be 1, 2 or 3");
}

std::vector<EngineKind> parse_engines(const std::string& s) {
  std::vector<EngineKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "trec") {
      out.push_back(EngineKind::TRec);
    } else if (item == "prec") {
      out.push_back(EngineKind::PRec);
    } else {
      throw CLI::ValidationError("--engines entries must be trec|prec");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--engines is empty");
  return out;
}

std::vector<uint32_t> parse_range(const std::string& s) {
  // "a..b" or a comma list
  const auto dots = s.find("..");
  std::vector<uint32_t> out;
  if (dots != std::string::npos) {
    const uint32_t a = static_cast<uint32_t>(std::stoul(s.substr(0, dots)));
    const uint32_t b = static_cast<uint32_t>(std::stoul(s.substr(dots + 2)));
    for (uint32_t v = a; v <= b; ++v) out.push_back(v);
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(static_cast<uint32_t>(std::stoul(item)));
  }
  if (out.empty()) throw CLI::ValidationError("empty list '" + s + "'");
  return out;
}

json metrics_to_json(const RunMetrics& m) {
  json vr;
  for (const auto& [table, cols] : m.values_read) {
    for (const auto& [col, v] : cols) vr[table][col] = v;
  }
  return {{"result_rows", m.result_rows},
          {"rows_materialized", m.rows_materialized},
          {"hash_build_rows", m.hash_build_rows},
          {"peak_resident_blocks", m.peak_resident_blocks},
          {"values_read", std::move(vr)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"posrec: columnar recursive-query engine and benchmark harness"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a tree dataset (edges.csv + schema.json)");
  GenConfig gen_cfg;
  std::string gen_mode = "balanced";
  std::string gen_out;
  gen->add_option("--fanout", gen_cfg.fanout, "Children per node (balanced)");
  gen->add_option("--height", gen_cfg.height, "Tree height in edge levels (balanced)");
  gen->add_option("--nodes", gen_cfg.node_count, "Node count (random)");
  gen->add_option("--payload", gen_cfg.payload_cols, "Number of c1..cN payload columns");
  gen->add_option("--seed", gen_cfg.seed, "PRNG seed");
  gen->add_option("--mode", gen_mode, "balanced|random")
      ->check(CLI::IsMember({"balanced", "random"}));
  gen->add_option("--out", gen_out, "Output directory")->required();

  // load
  auto* load = app.add_subcommand("load", "Load a CSV into columnar slot files");
  std::string load_csv_path, load_schema, load_out;
  load->add_option("--csv", load_csv_path, "CSV file")->required();
  load->add_option("--schema", load_schema, "schema.json file")->required();
  load->add_option("--out", load_out, "Output directory")->required();

  // run
  auto* run = app.add_subcommand("run", "Execute a JSON plan against a data directory");
  std::string run_plan_path, run_data, run_metrics_path;
  bool run_cold = false;
  run->add_option("--plan", run_plan_path, "Plan JSON file")->required();
  run->add_option("--data", run_data, "Data directory")->required();
  run->add_option("--metrics", run_metrics_path, "Write run metrics JSON here");
  run->add_flag("--cold", run_cold, "Clear the page cache before running");

  // verify
  auto* ver = app.add_subcommand("verify", "Check a template query against the oracle");
  int ver_experiment = 1;
  std::string ver_engine = "trec", ver_data, ver_seed_pred = "from";
  uint32_t ver_depth = 0, ver_payload = 0;
  bool ver_inject = false;
  ver->add_option("--experiment", ver_experiment, "1|2|3")->required();
  ver->add_option("--engine", ver_engine, "trec|prec")
      ->check(CLI::IsMember({"trec", "prec"}))
      ->required();
  ver->add_option("--depth", ver_depth, "Recursion depth bound")->required();
  ver->add_option("--payload", ver_payload, "Payload columns used by the query");
  ver->add_option("--data", ver_data, "Data directory (must contain edges.csv)")->required();
  ver->add_option("--seed-predicate", ver_seed_pred, "id|from")
      ->check(CLI::IsMember({"id", "from"}));
  ver->add_flag("--inject-drop-row", ver_inject, "Fault injection: drop one engine output row");

  // bench
  auto* bn = app.add_subcommand("bench", "Run a benchmark sweep and write a CSV report");
  int bn_experiment = 2;
  std::string bn_engines = "trec,prec", bn_depths = "1..4", bn_payloads = "0", bn_data, bn_out;
  uint32_t bn_repeats = 10;
  bool bn_cold = false;
  bn->add_option("--experiment", bn_experiment, "1|2|3")->required();
  bn->add_option("--engines", bn_engines, "Comma list: trec,prec");
  bn->add_option("--depths", bn_depths, "Range a..b or comma list");
  bn->add_option("--payloads", bn_payloads, "Comma list of payload widths");
  bn->add_option("--repeats", bn_repeats, "Repetitions per configuration");
  bn->add_option("--data", bn_data, "Data directory")->required();
  bn->add_option("--out", bn_out, "Output CSV path")->required();
  bn->add_flag("--cold", bn_cold, "Clear the page cache before every repetition");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      gen_cfg.mode = gen_mode == "balanced" ? TreeMode::Balanced : TreeMode::Random;
      const auto summary = generate_tree(gen_cfg, gen_out);
      json j{{"edge_count", summary.edge_count},
             {"height", summary.height},
             {"csv_bytes", summary.csv_bytes}};
      std::cout << j.dump() << "\n";
    } else if (*load) {
      const auto schema = schema_from_json_file(load_schema);
      auto table = ColumnTable::load_csv(load_csv_path, schema, load_out);
      std::cout << "loaded " << table->row_count() << " rows into " << load_out << "\n";
    } else if (*run) {
      std::ifstream in(run_plan_path);
      if (!in) throw EngineError(ErrorCode::IoError, "cannot open " + run_plan_path);
      std::stringstream buf;
      buf << in.rdbuf();
      const auto spec = parse_plan(buf.str());
      Database db(run_data);
      const auto diags = validate_plan(spec, db.catalog());
      if (!diags.empty()) {
        for (const auto& d : diags) {
          std::cerr << d.rule << " at " << d.node_path << ": " << d.message << "\n";
        }
        return 2;
      }
      RunOptions opts;
      opts.cold = run_cold;
      const auto result = run_plan(spec, db, opts);
      std::cout << "result_rows=" << result.rows.size() << "\n";
      if (!run_metrics_path.empty()) {
        std::ofstream out(run_metrics_path);
        out << metrics_to_json(result.metrics).dump(2) << "\n";
      }
    } else if (*ver) {
      TemplateConfig cfg;
      cfg.experiment = parse_experiment(ver_experiment);
      cfg.engine = ver_engine == "trec" ? EngineKind::TRec : EngineKind::PRec;
      cfg.depth = ver_depth;
      cfg.payload = ver_payload;
      cfg.seed_predicate = ver_seed_pred == "from" ? SeedPredicate::From : SeedPredicate::Id;
      Database db(ver_data);
      RunOptions opts;
      opts.drop_last_row = ver_inject;
      const auto outcome =
          verify(cfg, db, std::filesystem::path(ver_data) / "edges.csv", opts);
      if (outcome.pass) {
        std::cout << "PASS (" << outcome.actual_rows << " rows)\n";
      } else {
        std::cout << "FAIL expected=" << outcome.expected_rows
                  << " actual=" << outcome.actual_rows << "\n";
        for (const auto& d : outcome.diffs) std::cout << "  " << d << "\n";
        return 1;
      }
    } else if (*bn) {
      BenchConfig cfg;
      cfg.experiment = parse_experiment(bn_experiment);
      cfg.engines = parse_engines(bn_engines);
      cfg.depths = parse_range(bn_depths);
      cfg.payloads = parse_range(bn_payloads);
      cfg.repeats = bn_repeats;
      cfg.cold = bn_cold;
      Database db(bn_data);
      const auto rows = bench(cfg, db);
      write_bench_csv(rows, bn_out);
      const auto json_path = std::filesystem::path(bn_out).replace_extension(".metrics.json");
      write_bench_metrics_json(rows, json_path);
      std::cout << "wrote " << bn_out << " and " << json_path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
