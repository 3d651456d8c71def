#include "posrec/blocks.hpp"

namespace posrec {

size_t PositionBlock::slot_of(const std::string& table) const {
  for (size_t i = 0; i < covered_tables.size(); ++i) {
    if (covered_tables[i] == table) return i;
  }
  throw EngineError(ErrorCode::TableNotCovered, table);
}

int schema_index(const OutSchema& schema, const std::string& name) {
  for (size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

AttributeReader::AttributeReader(std::shared_ptr<ColumnTable> table, std::string column)
    : table_(std::move(table)), column_(std::move(column)) {
  const int idx = table_->schema().column_index(column_);
  if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, column_);
  type_ = table_->schema().columns[static_cast<size_t>(idx)].type;
}

ValueColumn AttributeReader::fetch(const PositionBlock& block) const {
  const size_t slot = block.slot_of(table_->name());
  return table_->read_slots(column_, block.positions[slot]);
}

ValueColumn eval_expr(const Expr& expr, const TupleBlock& block, size_t rows) {
  ValueColumn out;
  out.type = ColumnType::int32();
  const size_t n = rows;
  switch (expr.kind) {
    case Expr::Kind::ConstInt:
      out.ints.assign(n, expr.literal);
      return out;
    case Expr::Kind::Col:
    case Expr::Kind::Add: {
      const int idx = schema_index(block.schema, expr.col);
      if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, expr.col);
      const auto& src = block.columns[static_cast<size_t>(idx)];
      if (expr.kind == Expr::Kind::Col && src.type.kind == ColumnType::Kind::Varchar) {
        out.type = src.type;
        out.strs = src.strs;
        return out;
      }
      if (src.type.kind != ColumnType::Kind::Int32) {
        throw EngineError(ErrorCode::ExpressionTypeError, "add() needs an int32 column");
      }
      out.ints = src.ints;
      if (expr.kind == Expr::Kind::Add) {
        for (auto& v : out.ints) v += expr.literal;
      }
      return out;
    }
  }
  throw EngineError(ErrorCode::ExpressionTypeError, "unreachable expression kind");
}

TupleBlock materialize_positions(const PositionBlock& block,
                                 const std::vector<AttributeReader>& attrs,
                                 const std::vector<ComputedColumn>& computed) {
  TupleBlock out;
  for (const auto& reader : attrs) {
    out.schema.push_back({reader.column(), reader.type()});
    out.columns.push_back(reader.fetch(block));
  }
  for (const auto& c : computed) {
    auto col = eval_expr(c.expr, out, block.rows());
    out.schema.push_back({c.name, col.type});
    out.columns.push_back(std::move(col));
  }
  return out;
}

}  // namespace posrec
