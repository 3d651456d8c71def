#include "posrec/plan.hpp"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace posrec {

using json = nlohmann::json;

namespace {

// ------------------------------------------------------------------ parsing

[[noreturn]] void missing(const std::string& key, const std::string& op) {
  throw EngineError(ErrorCode::MissingField, "'" + key + "' in op '" + op + "'");
}

void check_keys(const json& obj, const std::string& op,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw EngineError(ErrorCode::JsonError, "unknown field '" + key + "' in op '" + op + "'");
    }
  }
}

Expr parse_expr(const json& e) {
  if (!e.is_object() || e.size() != 1) {
    throw EngineError(ErrorCode::JsonError, "expression must be a single-key object");
  }
  if (e.contains("const_int")) return Expr::const_int(e["const_int"].get<int32_t>());
  if (e.contains("col")) return Expr::column(e["col"].get<std::string>());
  if (e.contains("add")) {
    const auto& a = e["add"];
    if (!a.is_array() || a.size() != 2) {
      throw EngineError(ErrorCode::JsonError, "add expects [column, literal]");
    }
    return Expr::add(a[0].get<std::string>(), a[1].get<int32_t>());
  }
  throw EngineError(ErrorCode::JsonError, "unknown expression: " + e.dump());
}

CmpOp parse_cmp(const std::string& s) {
  if (s == "eq") return CmpOp::Eq;
  if (s == "lt") return CmpOp::Lt;
  if (s == "le") return CmpOp::Le;
  throw EngineError(ErrorCode::JsonError, "unknown comparison '" + s + "'");
}

Predicate parse_predicate(const json& p, const std::string& op) {
  check_keys(p, op + ".predicate", {"column", "cmp", "value"});
  if (!p.contains("column") || !p.contains("cmp") || !p.contains("value")) {
    missing("predicate fields", op);
  }
  return Predicate{p["column"].get<std::string>(), parse_cmp(p["cmp"].get<std::string>()),
                   p["value"].get<int32_t>()};
}

std::vector<ComputedColumn> parse_computed(const json& arr, const std::string& op) {
  std::vector<ComputedColumn> out;
  for (const auto& c : arr) {
    check_keys(c, op + " computed entry", {"name", "expr"});
    if (!c.contains("name") || !c.contains("expr")) missing("name/expr", op);
    out.push_back({c["name"].get<std::string>(), parse_expr(c["expr"])});
  }
  return out;
}

std::unique_ptr<PlanNode> parse_node(const json& j);

std::unique_ptr<PlanNode> parse_child(const json& j, const char* key, const std::string& op) {
  if (!j.contains(key)) missing(key, op);
  return parse_node(j[key]);
}

const std::unordered_set<std::string> kOps = {
    "scan",       "pos_filter", "materialize", "tuple_filter", "project",
    "thash_join", "phash_join", "trecursive",  "precursive",   "cte"};

std::unique_ptr<PlanNode> parse_node(const json& j) {
  if (!j.is_object()) throw EngineError(ErrorCode::JsonError, "plan node must be an object");
  if (!j.contains("op")) missing("op", "<node>");
  auto node = std::make_unique<PlanNode>();
  node->op = j["op"].get<std::string>();
  const std::string& op = node->op;
  if (!kOps.contains(op)) throw EngineError(ErrorCode::UnknownOp, op);

  if (op == "scan") {
    check_keys(j, op, {"op", "table"});
    if (!j.contains("table")) missing("table", op);
    node->table = j["table"].get<std::string>();
  } else if (op == "pos_filter" || op == "tuple_filter") {
    check_keys(j, op, {"op", "predicate", "child"});
    if (!j.contains("predicate")) missing("predicate", op);
    node->predicate = parse_predicate(j["predicate"], op);
    node->children.push_back(parse_child(j, "child", op));
  } else if (op == "materialize") {
    check_keys(j, op, {"op", "attrs", "computed", "child"});
    if (!j.contains("attrs")) missing("attrs", op);
    for (const auto& a : j["attrs"]) node->attrs.push_back(a.get<std::string>());
    if (j.contains("computed")) node->computed = parse_computed(j["computed"], op);
    node->children.push_back(parse_child(j, "child", op));
  } else if (op == "project") {
    check_keys(j, op, {"op", "columns", "child"});
    if (!j.contains("columns")) missing("columns", op);
    node->columns = parse_computed(j["columns"], op);
    node->children.push_back(parse_child(j, "child", op));
  } else if (op == "thash_join") {
    check_keys(j, op, {"op", "build_key", "probe_key", "output", "build", "probe"});
    if (!j.contains("build_key") || !j.contains("probe_key") || !j.contains("output")) {
      missing("build_key/probe_key/output", op);
    }
    node->build_key = j["build_key"].get<std::string>();
    node->probe_key = j["probe_key"].get<std::string>();
    for (const auto& o : j["output"]) {
      check_keys(o, op + " output entry", {"side", "column"});
      const auto side = o.at("side").get<std::string>();
      if (side != "build" && side != "probe") {
        throw EngineError(ErrorCode::JsonError, "join output side must be build|probe");
      }
      node->output.push_back(
          {side == "build" ? JoinSide::Build : JoinSide::Probe, o.at("column").get<std::string>()});
    }
    node->children.push_back(parse_child(j, "build", op));
    node->children.push_back(parse_child(j, "probe", op));
  } else if (op == "phash_join") {
    check_keys(j, op, {"op", "build_key", "probe_key", "output_table", "build", "probe"});
    if (!j.contains("build_key") || !j.contains("probe_key") || !j.contains("output_table")) {
      missing("build_key/probe_key/output_table", op);
    }
    node->build_key = j["build_key"].get<std::string>();
    node->probe_key = j["probe_key"].get<std::string>();
    node->output_table = j["output_table"].get<std::string>();
    node->children.push_back(parse_child(j, "build", op));
    node->children.push_back(parse_child(j, "probe", op));
  } else if (op == "trecursive" || op == "precursive") {
    if (op == "trecursive") {
      check_keys(j, op, {"op", "max_depth", "seed", "recursive"});
    } else {
      check_keys(j, op, {"op", "max_depth", "output_table", "seed", "recursive"});
      if (!j.contains("output_table")) missing("output_table", op);
      node->output_table = j["output_table"].get<std::string>();
    }
    if (!j.contains("max_depth")) missing("max_depth", op);
    node->max_depth = j["max_depth"].get<uint32_t>();
    node->children.push_back(parse_child(j, "seed", op));
    node->children.push_back(parse_child(j, "recursive", op));
  } else {  // cte
    check_keys(j, op, {"op"});
  }
  return node;
}

json expr_to_json(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::ConstInt: return json{{"const_int", e.literal}};
    case Expr::Kind::Col: return json{{"col", e.col}};
    case Expr::Kind::Add: return json{{"add", json::array({e.col, e.literal})}};
  }
  return {};
}

const char* cmp_name(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "eq";
    case CmpOp::Lt: return "lt";
    case CmpOp::Le: return "le";
  }
  return "eq";
}

json computed_to_json(const std::vector<ComputedColumn>& cs) {
  json arr = json::array();
  for (const auto& c : cs) arr.push_back({{"name", c.name}, {"expr", expr_to_json(c.expr)}});
  return arr;
}

json node_to_json(const PlanNode& node) {
  json j{{"op", node.op}};
  if (node.op == "scan") {
    j["table"] = node.table;
  } else if (node.op == "pos_filter" || node.op == "tuple_filter") {
    j["predicate"] = {{"column", node.predicate->column},
                      {"cmp", cmp_name(node.predicate->op)},
                      {"value", node.predicate->literal}};
    j["child"] = node_to_json(*node.children[0]);
  } else if (node.op == "materialize") {
    j["attrs"] = node.attrs;
    if (!node.computed.empty()) j["computed"] = computed_to_json(node.computed);
    j["child"] = node_to_json(*node.children[0]);
  } else if (node.op == "project") {
    j["columns"] = computed_to_json(node.columns);
    j["child"] = node_to_json(*node.children[0]);
  } else if (node.op == "thash_join") {
    j["build_key"] = node.build_key;
    j["probe_key"] = node.probe_key;
    json out = json::array();
    for (const auto& o : node.output) {
      out.push_back({{"side", o.side == JoinSide::Build ? "build" : "probe"},
                     {"column", o.column}});
    }
    j["output"] = std::move(out);
    j["build"] = node_to_json(*node.children[0]);
    j["probe"] = node_to_json(*node.children[1]);
  } else if (node.op == "phash_join") {
    j["build_key"] = node.build_key;
    j["probe_key"] = node.probe_key;
    j["output_table"] = node.output_table;
    j["build"] = node_to_json(*node.children[0]);
    j["probe"] = node_to_json(*node.children[1]);
  } else if (node.op == "trecursive" || node.op == "precursive") {
    j["max_depth"] = node.max_depth;
    if (node.op == "precursive") j["output_table"] = node.output_table;
    j["seed"] = node_to_json(*node.children[0]);
    j["recursive"] = node_to_json(*node.children[1]);
  }
  return j;
}

void collect_tables(const PlanNode& node, std::vector<std::string>& out) {
  auto add = [&](const std::string& t) {
    if (!t.empty() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  };
  add(node.table);
  add(node.output_table);
  for (const auto& c : node.children) collect_tables(*c, out);
}

}  // namespace

PlanSpec parse_plan(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw EngineError(ErrorCode::JsonError, e.what());
  }
  if (!doc.is_object()) throw EngineError(ErrorCode::JsonError, "plan must be an object");
  check_keys(doc, "<plan>", {"block_capacity", "root"});
  if (!doc.contains("root")) missing("root", "<plan>");
  PlanSpec spec;
  if (doc.contains("block_capacity")) spec.block_capacity = doc["block_capacity"].get<size_t>();
  try {
    spec.root = parse_node(doc["root"]);
  } catch (const json::exception& e) {
    throw EngineError(ErrorCode::JsonError, e.what());
  }
  collect_tables(*spec.root, spec.tables);
  return spec;
}

std::string serialize_plan(const PlanSpec& spec) {
  json doc{{"block_capacity", spec.block_capacity}, {"root", node_to_json(*spec.root)}};
  return doc.dump(2);
}

// --------------------------------------------------------------- validation

namespace {

enum class Rep { Positions, Tuples, Invalid };

struct NodeInfo {
  Rep rep = Rep::Invalid;
  std::vector<std::string> covered;  // Positions only
  OutSchema schema;                  // Tuples only
};

struct Validator {
  const Catalog& catalog;
  std::vector<Diagnostic>& diags;

  void emit(const std::string& rule, const std::string& path, const std::string& msg) {
    diags.push_back({rule, path, msg});
  }

  // Context for the cte leaf inside a recursive branch.
  struct CteContext {
    NodeInfo info;
    bool positional = false;
    int* uses = nullptr;
  };

  std::optional<ColumnType> column_type(const std::vector<std::string>& covered,
                                        const std::string& column) const {
    for (const auto& t : covered) {
      auto it = catalog.find(t);
      if (it == catalog.end()) continue;
      const int idx = it->second.column_index(column);
      if (idx >= 0) return it->second.columns[static_cast<size_t>(idx)].type;
    }
    return std::nullopt;
  }

  bool check_expr(const Expr& e, const OutSchema& schema, const std::string& path) {
    if (e.kind == Expr::Kind::ConstInt) return true;
    const int idx = schema_index(schema, e.col);
    if (idx < 0) {
      emit("UNKNOWN_COLUMN", path, "expression references unknown column '" + e.col + "'");
      return false;
    }
    if (e.kind == Expr::Kind::Add &&
        schema[static_cast<size_t>(idx)].type.kind != ColumnType::Kind::Int32) {
      emit("EXPRESSION_TYPE", path, "add() over non-int32 column '" + e.col + "'");
      return false;
    }
    return true;
  }

  NodeInfo walk(const PlanNode& node, const std::string& path, CteContext* cte,
                bool in_positional_recursion) {
    NodeInfo info;
    if (node.op == "scan") {
      auto it = catalog.find(node.table);
      if (it == catalog.end()) {
        emit("UNKNOWN_COLUMN", path, "unknown table '" + node.table + "'");
        return info;
      }
      info.rep = Rep::Positions;
      info.covered = {node.table};
      return info;
    }
    if (node.op == "cte") {
      if (!cte) {
        emit("CTE_PLACEMENT", path, "cte node outside a recursive branch");
        return info;
      }
      ++*cte->uses;
      return cte->info;
    }
    if (node.op == "pos_filter") {
      auto child = walk(*node.children[0], path + ".child", cte, in_positional_recursion);
      if (child.rep == Rep::Invalid) return info;
      if (child.rep != Rep::Positions) {
        emit("MIXED_REPRESENTATION", path, "pos_filter over a tuple child");
        return info;
      }
      auto type = column_type(child.covered, node.predicate->column);
      if (!type) {
        emit("UNKNOWN_COLUMN", path, "predicate column '" + node.predicate->column + "'");
        return info;
      }
      if (type->kind != ColumnType::Kind::Int32) {
        emit("EXPRESSION_TYPE", path, "predicate over non-int32 column");
        return info;
      }
      return child;
    }
    if (node.op == "materialize") {
      auto child = walk(*node.children[0], path + ".child", cte, in_positional_recursion);
      if (child.rep == Rep::Invalid) return info;
      if (child.rep != Rep::Positions) {
        emit("MIXED_REPRESENTATION", path, "materialize over a tuple child");
        return info;
      }
      if (in_positional_recursion && !node.computed.empty()) {
        emit("COMPUTED_IN_POSITIONAL", path,
             "computed column inside a positional recursion branch");
        return info;
      }
      info.rep = Rep::Tuples;
      for (const auto& attr : node.attrs) {
        auto type = column_type(child.covered, attr);
        if (!type) {
          emit("UNKNOWN_COLUMN", path, "attribute '" + attr + "'");
          return NodeInfo{};
        }
        info.schema.push_back({attr, *type});
      }
      for (const auto& c : node.computed) {
        if (!check_expr(c.expr, info.schema, path)) return NodeInfo{};
        info.schema.push_back({c.name, c.expr.kind == Expr::Kind::Col
                                           ? info.schema[static_cast<size_t>(schema_index(
                                                             info.schema, c.expr.col))].type
                                           : ColumnType::int32()});
      }
      return info;
    }
    if (node.op == "tuple_filter") {
      auto child = walk(*node.children[0], path + ".child", cte, in_positional_recursion);
      if (child.rep == Rep::Invalid) return info;
      if (child.rep != Rep::Tuples) {
        emit("MIXED_REPRESENTATION", path, "tuple_filter over a positional child");
        return info;
      }
      const int idx = schema_index(child.schema, node.predicate->column);
      if (idx < 0) {
        emit("UNKNOWN_COLUMN", path, "predicate column '" + node.predicate->column + "'");
        return info;
      }
      return child;
    }
    if (node.op == "project") {
      auto child = walk(*node.children[0], path + ".child", cte, in_positional_recursion);
      if (child.rep == Rep::Invalid) return info;
      if (child.rep != Rep::Tuples) {
        emit("MIXED_REPRESENTATION", path, "project over a positional child");
        return info;
      }
      if (in_positional_recursion) {
        for (const auto& c : node.columns) {
          if (c.expr.kind != Expr::Kind::Col) {
            emit("COMPUTED_IN_POSITIONAL", path,
                 "computed projection inside a positional recursion branch");
            return info;
          }
        }
      }
      info.rep = Rep::Tuples;
      for (const auto& c : node.columns) {
        if (!check_expr(c.expr, child.schema, path)) return NodeInfo{};
        ColumnType type = ColumnType::int32();
        if (c.expr.kind == Expr::Kind::Col) {
          type = child.schema[static_cast<size_t>(schema_index(child.schema, c.expr.col))].type;
        }
        info.schema.push_back({c.name, type});
      }
      return info;
    }
    if (node.op == "thash_join") {
      auto build = walk(*node.children[0], path + ".build", cte, in_positional_recursion);
      auto probe = walk(*node.children[1], path + ".probe", cte, in_positional_recursion);
      if (build.rep == Rep::Invalid || probe.rep == Rep::Invalid) return info;
      if (build.rep != Rep::Tuples || probe.rep != Rep::Tuples) {
        emit("MIXED_REPRESENTATION", path, "thash_join requires tuple children");
        return info;
      }
      for (const auto& [key, side, schema] :
           {std::tuple{node.build_key, "build", &build.schema},
            std::tuple{node.probe_key, "probe", &probe.schema}}) {
        const int idx = schema_index(*schema, key);
        if (idx < 0) {
          emit("UNKNOWN_COLUMN", path, std::string(side) + " key '" + key + "'");
          return NodeInfo{};
        }
        if ((*schema)[static_cast<size_t>(idx)].type.kind != ColumnType::Kind::Int32) {
          emit("EXPRESSION_TYPE", path, std::string(side) + " key must be int32");
          return NodeInfo{};
        }
      }
      info.rep = Rep::Tuples;
      for (const auto& o : node.output) {
        const OutSchema& schema = o.side == JoinSide::Build ? build.schema : probe.schema;
        const int idx = schema_index(schema, o.column);
        if (idx < 0) {
          emit("UNKNOWN_COLUMN", path, "join output column '" + o.column + "'");
          return NodeInfo{};
        }
        info.schema.push_back(schema[static_cast<size_t>(idx)]);
      }
      return info;
    }
    if (node.op == "phash_join") {
      auto build = walk(*node.children[0], path + ".build", cte, in_positional_recursion);
      auto probe = walk(*node.children[1], path + ".probe", cte, in_positional_recursion);
      if (build.rep == Rep::Invalid || probe.rep == Rep::Invalid) return info;
      if (probe.rep != Rep::Positions) {
        emit("MIXED_REPRESENTATION", path, "phash_join probe must be positional");
        return info;
      }
      if (probe.covered.size() != 1 || probe.covered.front() != node.output_table) {
        emit("MULTI_TABLE_POSITIONS", path,
             "probe must cover exactly table '" + node.output_table + "'");
        return info;
      }
      if (build.rep == Rep::Positions) {
        if (build.covered.size() != 1) {
          emit("MULTI_TABLE_POSITIONS", path, "positional build must cover exactly one table");
          return info;
        }
        if (!column_type(build.covered, node.build_key)) {
          emit("UNKNOWN_COLUMN", path, "build key '" + node.build_key + "'");
          return info;
        }
      } else if (schema_index(build.schema, node.build_key) < 0) {
        emit("UNKNOWN_COLUMN", path, "build key '" + node.build_key + "'");
        return info;
      }
      if (!column_type(probe.covered, node.probe_key)) {
        emit("UNKNOWN_COLUMN", path, "probe key '" + node.probe_key + "'");
        return info;
      }
      info.rep = Rep::Positions;
      info.covered = {node.output_table};
      return info;
    }
    if (node.op == "trecursive" || node.op == "precursive") {
      const bool positional = node.op == "precursive";
      auto seed = walk(*node.children[0], path + ".seed", cte, in_positional_recursion);
      if (seed.rep == Rep::Invalid) return info;
      if (positional && seed.rep != Rep::Positions) {
        emit("MIXED_REPRESENTATION", path, "precursive seed must be positional");
        return info;
      }
      if (!positional && seed.rep != Rep::Tuples) {
        emit("MIXED_REPRESENTATION", path, "trecursive seed must produce tuples");
        return info;
      }
      if (positional &&
          (seed.covered.size() != 1 || seed.covered.front() != node.output_table)) {
        emit("MULTI_TABLE_POSITIONS", path,
             "seed must cover exactly table '" + node.output_table + "'");
        return info;
      }
      int uses = 0;
      CteContext inner{seed, positional, &uses};
      auto rec = walk(*node.children[1], path + ".recursive", &inner,
                      in_positional_recursion || positional);
      if (uses != 1) {
        emit("CTE_PLACEMENT", path,
             "recursive branch must contain exactly one cte node (found " +
                 std::to_string(uses) + ")");
        return info;
      }
      if (rec.rep == Rep::Invalid) return info;
      if (positional) {
        if (rec.rep != Rep::Positions) {
          emit("MIXED_REPRESENTATION", path, "precursive recursive branch must stay positional");
          return info;
        }
        if (rec.covered.size() != 1 || rec.covered.front() != node.output_table) {
          emit("MULTI_TABLE_POSITIONS", path,
               "recursive branch must cover exactly table '" + node.output_table + "'");
          return info;
        }
      } else {
        if (rec.rep != Rep::Tuples) {
          emit("MIXED_REPRESENTATION", path, "trecursive recursive branch must produce tuples");
          return info;
        }
        if (rec.schema != seed.schema) {
          emit("SCHEMA_MISMATCH", path, "seed and recursive branch schemas differ");
          return info;
        }
      }
      return seed;
    }
    emit("UNKNOWN_OP", path, node.op);
    return info;
  }
};

}  // namespace

std::vector<Diagnostic> validate_plan(const PlanSpec& spec, const Catalog& catalog) {
  std::vector<Diagnostic> diags;
  Validator v{catalog, diags};
  auto root = v.walk(*spec.root, "root", nullptr, false);
  if (diags.empty() && root.rep != Rep::Tuples) {
    diags.push_back({"NO_MATERIALIZATION_POINT", "root",
                     "plan root must produce tuples; add a materialize operator"});
  }
  return diags;
}

// ------------------------------------------------------------ instantiation

namespace {

struct Builder {
  const std::map<std::string, std::shared_ptr<ColumnTable>>& tables;
  size_t capacity;
  QueryMetrics* metrics;
  std::vector<RecursiveOp*>* recursive_nodes;

  struct Built {
    std::unique_ptr<Operator> op;
    bool positional = false;
    std::string table;  // covered table when positional
  };

  struct CteSlot {
    CteOp* cte = nullptr;
    bool positional = false;
    std::string table;
  };

  std::shared_ptr<ColumnTable> table_of(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw EngineError(ErrorCode::UnknownColumn, "table " + name);
    return it->second;
  }

  Built build(const PlanNode& node, CteSlot* cte) {
    if (node.op == "scan") {
      return {std::make_unique<DataSourceOp>(table_of(node.table), capacity), true, node.table};
    }
    if (node.op == "cte") {
      if (!cte) throw EngineError(ErrorCode::CteUnbound, "cte node outside a recursive branch");
      auto op = std::make_unique<CteOp>();
      cte->cte = op.get();
      return {std::move(op), cte->positional, cte->table};
    }
    if (node.op == "pos_filter") {
      auto child = build(*node.children[0], cte);
      auto table = table_of(child.table);
      return {std::make_unique<PosFilterOp>(std::move(child.op), std::move(table),
                                            *node.predicate),
              true, child.table};
    }
    if (node.op == "materialize") {
      auto child = build(*node.children[0], cte);
      auto table = table_of(child.table);
      std::vector<AttributeReader> readers;
      readers.reserve(node.attrs.size());
      for (const auto& attr : node.attrs) readers.emplace_back(table, attr);
      return {std::make_unique<MaterializeOp>(std::move(child.op), std::move(readers),
                                              node.computed, metrics),
              false, ""};
    }
    if (node.op == "tuple_filter") {
      auto child = build(*node.children[0], cte);
      return {std::make_unique<TupleFilterOp>(std::move(child.op), *node.predicate), false, ""};
    }
    if (node.op == "project") {
      auto child = build(*node.children[0], cte);
      return {std::make_unique<ProjectOp>(std::move(child.op), node.columns), false, ""};
    }
    if (node.op == "thash_join") {
      auto build_side = build(*node.children[0], cte);
      auto probe_side = build(*node.children[1], cte);
      return {std::make_unique<THashJoinOp>(std::move(build_side.op), std::move(probe_side.op),
                                            node.build_key, node.probe_key, node.output, metrics),
              false, ""};
    }
    if (node.op == "phash_join") {
      auto build_side = build(*node.children[0], cte);
      auto probe_side = build(*node.children[1], cte);
      auto build_table =
          build_side.positional ? table_of(build_side.table) : std::shared_ptr<ColumnTable>();
      return {std::make_unique<PHashJoinOp>(std::move(build_side.op), std::move(probe_side.op),
                                            node.build_key, node.probe_key, node.output_table,
                                            table_of(node.output_table), std::move(build_table),
                                            metrics),
              true, node.output_table};
    }
    if (node.op == "trecursive" || node.op == "precursive") {
      const bool positional = node.op == "precursive";
      auto seed = build(*node.children[0], cte);
      CteSlot slot{nullptr, positional, node.output_table};
      auto rec = build(*node.children[1], &slot);
      if (!slot.cte) throw EngineError(ErrorCode::CteUnbound, "recursive branch has no cte node");
      RecursiveConfig cfg;
      cfg.max_depth = node.max_depth;
      cfg.representation = positional ? Representation::Positional : Representation::Tuple;
      cfg.output_table = node.output_table;
      auto op = std::make_unique<RecursiveOp>(std::move(seed.op), std::move(rec.op),
                                              std::move(cfg), metrics);
      op->bind_cte(slot.cte);
      if (recursive_nodes) recursive_nodes->push_back(op.get());
      return {std::move(op), positional, node.output_table};
    }
    throw EngineError(ErrorCode::UnknownOp, node.op);
  }
};

}  // namespace

std::unique_ptr<Operator> build_executor(
    const PlanSpec& spec, const std::map<std::string, std::shared_ptr<ColumnTable>>& tables,
    QueryMetrics* metrics, std::vector<RecursiveOp*>* recursive_nodes) {
  Builder builder{tables, spec.block_capacity, metrics, recursive_nodes};
  return builder.build(*spec.root, nullptr).op;
}

// ---------------------------------------------------------------- templates

namespace {

std::unique_ptr<PlanNode> make_node(std::string op) {
  auto n = std::make_unique<PlanNode>();
  n->op = std::move(op);
  return n;
}

std::unique_ptr<PlanNode> scan(const std::string& table) {
  auto n = make_node("scan");
  n->table = table;
  return n;
}

std::unique_ptr<PlanNode> pos_filter(std::unique_ptr<PlanNode> child, Predicate pred) {
  auto n = make_node("pos_filter");
  n->predicate = std::move(pred);
  n->children.push_back(std::move(child));
  return n;
}

std::unique_ptr<PlanNode> materialize(std::unique_ptr<PlanNode> child,
                                      std::vector<std::string> attrs,
                                      std::vector<ComputedColumn> computed = {}) {
  auto n = make_node("materialize");
  n->attrs = std::move(attrs);
  n->computed = std::move(computed);
  n->children.push_back(std::move(child));
  return n;
}

std::unique_ptr<PlanNode> tuple_filter(std::unique_ptr<PlanNode> child, Predicate pred) {
  auto n = make_node("tuple_filter");
  n->predicate = std::move(pred);
  n->children.push_back(std::move(child));
  return n;
}

std::unique_ptr<PlanNode> project(std::unique_ptr<PlanNode> child,
                                  std::vector<ComputedColumn> columns) {
  auto n = make_node("project");
  n->columns = std::move(columns);
  n->children.push_back(std::move(child));
  return n;
}

std::unique_ptr<PlanNode> thash_join(std::unique_ptr<PlanNode> build,
                                     std::unique_ptr<PlanNode> probe, std::string build_key,
                                     std::string probe_key, std::vector<JoinOutputColumn> output) {
  auto n = make_node("thash_join");
  n->build_key = std::move(build_key);
  n->probe_key = std::move(probe_key);
  n->output = std::move(output);
  n->children.push_back(std::move(build));
  n->children.push_back(std::move(probe));
  return n;
}

std::unique_ptr<PlanNode> phash_join(std::unique_ptr<PlanNode> build,
                                     std::unique_ptr<PlanNode> probe, std::string build_key,
                                     std::string probe_key, std::string output_table) {
  auto n = make_node("phash_join");
  n->build_key = std::move(build_key);
  n->probe_key = std::move(probe_key);
  n->output_table = std::move(output_table);
  n->children.push_back(std::move(build));
  n->children.push_back(std::move(probe));
  return n;
}

std::unique_ptr<PlanNode> recursive(bool positional, uint32_t max_depth,
                                    const std::string& output_table,
                                    std::unique_ptr<PlanNode> seed,
                                    std::unique_ptr<PlanNode> rec) {
  auto n = make_node(positional ? "precursive" : "trecursive");
  n->max_depth = max_depth;
  if (positional) n->output_table = output_table;
  n->children.push_back(std::move(seed));
  n->children.push_back(std::move(rec));
  return n;
}

std::vector<std::string> payload_names(uint32_t n) {
  std::vector<std::string> out;
  for (uint32_t i = 1; i <= n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

}  // namespace

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::E1: return "E1";
    case Experiment::E2: return "E2";
    case Experiment::E3: return "E3";
  }
  return "?";
}

const char* engine_name(EngineKind e) {
  return e == EngineKind::TRec ? "trec" : "prec";
}

PlanSpec build_template(const TemplateConfig& cfg) {
  const std::string& t = cfg.table;
  const Predicate seed_pred{cfg.seed_predicate == SeedPredicate::From ? "from" : "id", CmpOp::Eq,
                            0};
  const int32_t depth_val = static_cast<int32_t>(cfg.depth);
  const bool prec = cfg.engine == EngineKind::PRec;

  PlanSpec spec;
  spec.block_capacity = cfg.block_capacity;

  auto with_payload = [&](std::vector<std::string> base) {
    for (auto& c : payload_names(cfg.payload)) base.push_back(std::move(c));
    return base;
  };
  auto probe_cols = [&](std::vector<std::string> names) {
    std::vector<JoinOutputColumn> out;
    for (auto& n : names) out.push_back({JoinSide::Probe, std::move(n)});
    return out;
  };
  auto pass_through = [&](std::vector<std::string> names) {
    std::vector<ComputedColumn> out;
    for (auto& n : names) out.push_back({n, Expr::column(n)});
    return out;
  };

  if (prec) {
    // Positions flow through the recursion; payload (and id) are only read
    // at the final materialization.
    auto seed = pos_filter(scan(t), seed_pred);
    auto rec = phash_join(make_node("cte"), scan(t), "to", "from", t);
    auto loop = recursive(true, cfg.depth, t, std::move(seed), std::move(rec));
    std::vector<std::string> final_attrs =
        cfg.experiment == Experiment::E1 ? std::vector<std::string>{"id", "from", "to"}
                                         : with_payload({"id", "from", "to"});
    spec.root = materialize(std::move(loop), std::move(final_attrs));
    collect_tables(*spec.root, spec.tables);
    return spec;
  }

  if (cfg.experiment == Experiment::E1) {
    auto seed = materialize(pos_filter(scan(t), seed_pred), {"id", "from", "to"});
    auto rec = thash_join(make_node("cte"), materialize(scan(t), {"id", "from", "to"}), "to",
                          "from", probe_cols({"id", "from", "to"}));
    spec.root = recursive(false, cfg.depth, "", std::move(seed), std::move(rec));
    collect_tables(*spec.root, spec.tables);
    return spec;
  }

  if (cfg.experiment == Experiment::E2) {
    // Recursion carries the full width plus a depth column; the depth guard
    // is expressed both as the residual tuple filter and as max_depth.
    auto carried = with_payload({"id", "from", "to"});
    auto seed = materialize(pos_filter(scan(t), seed_pred), carried,
                            {{"depth", Expr::const_int(0)}});
    auto join_out = probe_cols(carried);
    join_out.push_back({JoinSide::Build, "depth"});
    auto join = thash_join(tuple_filter(make_node("cte"), {"depth", CmpOp::Lt, depth_val}),
                           materialize(scan(t), carried), "to", "from", std::move(join_out));
    auto rec_cols = pass_through(carried);
    rec_cols.push_back({"depth", Expr::add("depth", 1)});
    auto rec = project(std::move(join), std::move(rec_cols));
    auto loop = recursive(false, cfg.depth, "", std::move(seed), std::move(rec));
    spec.root = project(std::move(loop), pass_through(carried));  // drop depth
    collect_tables(*spec.root, spec.tables);
    return spec;
  }

  // E3: recursion carries only (id, to, depth); the payload is joined back in
  // once at the top, keyed on id, with the working set on the build side.
  auto seed = materialize(pos_filter(scan(t), seed_pred), {"id", "to"},
                          {{"depth", Expr::const_int(0)}});
  auto join = thash_join(tuple_filter(make_node("cte"), {"depth", CmpOp::Lt, depth_val}),
                         materialize(scan(t), {"id", "from", "to"}), "to", "from",
                         {{JoinSide::Probe, "id"},
                          {JoinSide::Probe, "to"},
                          {JoinSide::Build, "depth"}});
  auto rec = project(std::move(join), {{"id", Expr::column("id")},
                                       {"to", Expr::column("to")},
                                       {"depth", Expr::add("depth", 1)}});
  auto loop = recursive(false, cfg.depth, "", std::move(seed), std::move(rec));
  spec.root = thash_join(std::move(loop), materialize(scan(t), with_payload({"id", "from", "to"})),
                         "id", "id", probe_cols(with_payload({"id", "from", "to"})));
  collect_tables(*spec.root, spec.tables);
  return spec;
}

}  // namespace posrec
