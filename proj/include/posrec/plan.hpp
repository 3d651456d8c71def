#pragma once

// JSON plan format: parser, validator (representation typing, single-table
// positional recursion, materialization-point rule) and executor
// instantiation, plus the built-in templates for the three experiments.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "posrec/recursion.hpp"

namespace posrec {

struct PlanNode {
  std::string op;  // scan | pos_filter | materialize | tuple_filter | project |
                   // thash_join | phash_join | trecursive | precursive | cte

  std::string table;                     // scan
  std::optional<Predicate> predicate;    // pos_filter, tuple_filter
  std::vector<std::string> attrs;        // materialize
  std::vector<ComputedColumn> computed;  // materialize
  std::vector<ComputedColumn> columns;   // project
  std::string build_key, probe_key;      // joins
  std::vector<JoinOutputColumn> output;  // thash_join
  std::string output_table;              // phash_join, precursive
  uint32_t max_depth = 0;                // trecursive, precursive

  // Unary ops: children[0]. Joins: {build, probe}. Recursive: {seed, recursive}.
  std::vector<std::unique_ptr<PlanNode>> children;
};

struct PlanSpec {
  std::vector<std::string> tables;  // referenced table names, in first-use order
  std::unique_ptr<PlanNode> root;
  size_t block_capacity = 1024;
};

PlanSpec parse_plan(const std::string& text);
std::string serialize_plan(const PlanSpec& spec);

struct Diagnostic {
  std::string rule;  // MIXED_REPRESENTATION, MULTI_TABLE_POSITIONS,
                     // COMPUTED_IN_POSITIONAL, NO_MATERIALIZATION_POINT, UNKNOWN_COLUMN
  std::string node_path;
  std::string message;
};

using Catalog = std::map<std::string, TableSchema>;

// Empty result means the plan is valid.
std::vector<Diagnostic> validate_plan(const PlanSpec& spec, const Catalog& catalog);

// Instantiates the operator tree. The plan must have passed validate_plan.
// recursive_nodes receives non-owning pointers to the instantiated recursive
// operators (for level tagging).
std::unique_ptr<Operator> build_executor(const PlanSpec& spec,
                                         const std::map<std::string, std::shared_ptr<ColumnTable>>& tables,
                                         QueryMetrics* metrics,
                                         std::vector<RecursiveOp*>* recursive_nodes = nullptr);

enum class Experiment { E1, E2, E3 };
enum class EngineKind { TRec, PRec };
enum class SeedPredicate { From, Id };

struct TemplateConfig {
  Experiment experiment = Experiment::E1;
  EngineKind engine = EngineKind::TRec;
  uint32_t depth = 0;
  uint32_t payload = 0;  // number of c1..cN columns carried by the query
  SeedPredicate seed_predicate = SeedPredicate::From;
  size_t block_capacity = 1024;
  std::string table = "edges";
};

PlanSpec build_template(const TemplateConfig& cfg);

const char* experiment_name(Experiment e);
const char* engine_name(EngineKind e);

}  // namespace posrec
