#pragma once

// Intermediate representations exchanged between operators: position blocks
// (generalized join index) and tuple blocks, plus the attribute readers and
// the small scalar expression language bridging them.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "posrec/storage.hpp"

namespace posrec {

// Generalized join index: one position array per covered table, rows aligned.
struct PositionBlock {
  std::vector<std::string> covered_tables;
  std::vector<std::vector<uint64_t>> positions;  // one array per covered table

  size_t rows() const { return positions.empty() ? 0 : positions.front().size(); }

  // Index of `table` among covered tables, or throws TableNotCovered.
  size_t slot_of(const std::string& table) const;
};

struct OutColumn {
  std::string name;
  ColumnType type;
  bool operator==(const OutColumn&) const = default;
};

using OutSchema = std::vector<OutColumn>;

int schema_index(const OutSchema& schema, const std::string& name);  // -1 if absent

struct TupleBlock {
  OutSchema schema;
  std::vector<ValueColumn> columns;  // aligned with schema

  size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

using AnyBlock = std::variant<PositionBlock, TupleBlock>;

// Reads one attribute of one covered table for every row of a PositionBlock.
class AttributeReader {
 public:
  AttributeReader(std::shared_ptr<ColumnTable> table, std::string column);

  const std::string& column() const { return column_; }
  const std::shared_ptr<ColumnTable>& table() const { return table_; }
  ColumnType type() const { return type_; }

  ValueColumn fetch(const PositionBlock& block) const;

 private:
  std::shared_ptr<ColumnTable> table_;
  std::string column_;
  ColumnType type_;
};

// Scalar expressions: const_int(k) | col(name) | add(col, k).
struct Expr {
  enum class Kind { ConstInt, Col, Add };
  Kind kind = Kind::ConstInt;
  std::string col;
  int32_t literal = 0;

  static Expr const_int(int32_t k) { return {Kind::ConstInt, "", k}; }
  static Expr column(std::string name) { return {Kind::Col, std::move(name), 0}; }
  static Expr add(std::string name, int32_t k) { return {Kind::Add, std::move(name), k}; }

  bool operator==(const Expr&) const = default;
};

struct ComputedColumn {
  std::string name;
  Expr expr;
  bool operator==(const ComputedColumn&) const = default;
};

enum class CmpOp { Eq, Lt, Le };

struct Predicate {
  std::string column;
  CmpOp op = CmpOp::Eq;
  int32_t literal = 0;
  bool operator==(const Predicate&) const = default;
};

inline bool cmp_apply(CmpOp op, int32_t lhs, int32_t rhs) {
  switch (op) {
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Le: return lhs <= rhs;
  }
  return false;
}

// Evaluates an expression against already-fetched columns of `block`.
// `rows` is passed explicitly so constant columns work on attr-less blocks.
ValueColumn eval_expr(const Expr& expr, const TupleBlock& block, size_t rows);

// Converts positions into a tuple block: one column per reader, then one per
// computed expression (computed may reference the fetched columns).
TupleBlock materialize_positions(const PositionBlock& block,
                                 const std::vector<AttributeReader>& attrs,
                                 const std::vector<ComputedColumn>& computed);

}  // namespace posrec
