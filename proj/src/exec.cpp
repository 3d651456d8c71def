#include "posrec/exec.hpp"

#include <algorithm>

namespace posrec {

std::optional<AnyBlock> Operator::next() {
  if (done_) return std::nullopt;
  auto block = produce();
  if (!block) {
    done_ = true;
    return std::nullopt;
  }
  metrics_.blocks_out++;
  metrics_.rows_out += std::visit([](const auto& b) { return b.rows(); }, *block);
  return block;
}

PositionBlock& expect_positions(AnyBlock& block) {
  if (auto* p = std::get_if<PositionBlock>(&block)) return *p;
  throw EngineError(ErrorCode::InvalidPlan, "expected a position block");
}

TupleBlock& expect_tuples(AnyBlock& block) {
  if (auto* t = std::get_if<TupleBlock>(&block)) return *t;
  throw EngineError(ErrorCode::InvalidPlan, "expected a tuple block");
}

// --------------------------------------------------------------- DataSource

DataSourceOp::DataSourceOp(std::shared_ptr<ColumnTable> table, size_t capacity)
    : table_(std::move(table)), capacity_(std::max<size_t>(capacity, 1)) {}

void DataSourceOp::reset() {
  done_ = false;
  next_pos_ = 0;
}

std::optional<AnyBlock> DataSourceOp::produce() {
  if (next_pos_ >= table_->row_count()) return std::nullopt;
  const uint64_t n = std::min<uint64_t>(capacity_, table_->row_count() - next_pos_);
  PositionBlock block;
  block.covered_tables = {table_->name()};
  block.positions.emplace_back();
  auto& positions = block.positions.back();
  positions.resize(n);
  for (uint64_t i = 0; i < n; ++i) positions[i] = next_pos_ + i;
  next_pos_ += n;
  return AnyBlock(std::move(block));
}

// ---------------------------------------------------------------- PosFilter

PosFilterOp::PosFilterOp(std::unique_ptr<Operator> child, std::shared_ptr<ColumnTable> table,
                         Predicate predicate)
    : child_(std::move(child)), reader_(std::move(table), predicate.column),
      predicate_(std::move(predicate)) {
  if (reader_.type().kind != ColumnType::Kind::Int32) {
    throw EngineError(ErrorCode::ExpressionTypeError,
                      "filter predicate needs an int32 column: " + predicate_.column);
  }
}

void PosFilterOp::reset() {
  done_ = false;
  child_->reset();
}

std::optional<AnyBlock> PosFilterOp::produce() {
  // Zero-length blocks are never emitted; skip to the next nonempty one.
  while (auto in = child_->next()) {
    auto& block = expect_positions(*in);
    const auto values = reader_.fetch(block);
    PositionBlock out;
    out.covered_tables = block.covered_tables;
    out.positions.resize(block.positions.size());
    for (size_t row = 0; row < block.rows(); ++row) {
      if (cmp_apply(predicate_.op, values.ints[row], predicate_.literal)) {
        for (size_t t = 0; t < block.positions.size(); ++t) {
          out.positions[t].push_back(block.positions[t][row]);
        }
      }
    }
    if (out.rows() > 0) return AnyBlock(std::move(out));
  }
  return std::nullopt;
}

// -------------------------------------------------------------- Materialize

MaterializeOp::MaterializeOp(std::unique_ptr<Operator> child, std::vector<AttributeReader> attrs,
                             std::vector<ComputedColumn> computed, QueryMetrics* metrics)
    : child_(std::move(child)), attrs_(std::move(attrs)), computed_(std::move(computed)),
      query_metrics_(metrics) {}

void MaterializeOp::reset() {
  done_ = false;
  child_->reset();
}

std::optional<AnyBlock> MaterializeOp::produce() {
  auto in = child_->next();
  if (!in) return std::nullopt;
  auto& block = expect_positions(*in);
  auto out = materialize_positions(block, attrs_, computed_);
  if (query_metrics_) query_metrics_->rows_materialized += block.rows();
  return AnyBlock(std::move(out));
}

// -------------------------------------------------------------- TupleFilter

TupleFilterOp::TupleFilterOp(std::unique_ptr<Operator> child, Predicate predicate)
    : child_(std::move(child)), predicate_(std::move(predicate)) {}

void TupleFilterOp::reset() {
  done_ = false;
  child_->reset();
}

namespace {

void append_row(TupleBlock& dst, const TupleBlock& src, size_t row) {
  for (size_t c = 0; c < src.columns.size(); ++c) {
    if (src.columns[c].type.kind == ColumnType::Kind::Int32) {
      dst.columns[c].ints.push_back(src.columns[c].ints[row]);
    } else {
      dst.columns[c].strs.push_back(src.columns[c].strs[row]);
    }
  }
}

TupleBlock empty_like(const OutSchema& schema) {
  TupleBlock out;
  out.schema = schema;
  out.columns.resize(schema.size());
  for (size_t i = 0; i < schema.size(); ++i) out.columns[i].type = schema[i].type;
  return out;
}

}  // namespace

std::optional<AnyBlock> TupleFilterOp::produce() {
  while (auto in = child_->next()) {
    auto& block = expect_tuples(*in);
    const int idx = schema_index(block.schema, predicate_.column);
    if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, predicate_.column);
    const auto& col = block.columns[static_cast<size_t>(idx)];
    if (col.type.kind != ColumnType::Kind::Int32) {
      throw EngineError(ErrorCode::ExpressionTypeError,
                        "filter predicate needs an int32 column: " + predicate_.column);
    }
    TupleBlock out = empty_like(block.schema);
    for (size_t row = 0; row < block.rows(); ++row) {
      if (cmp_apply(predicate_.op, col.ints[row], predicate_.literal)) {
        append_row(out, block, row);
      }
    }
    if (out.rows() > 0) return AnyBlock(std::move(out));
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ Project

ProjectOp::ProjectOp(std::unique_ptr<Operator> child, std::vector<ComputedColumn> outputs)
    : child_(std::move(child)), outputs_(std::move(outputs)) {}

void ProjectOp::reset() {
  done_ = false;
  child_->reset();
}

std::optional<AnyBlock> ProjectOp::produce() {
  auto in = child_->next();
  if (!in) return std::nullopt;
  auto& block = expect_tuples(*in);
  TupleBlock out;
  for (const auto& o : outputs_) {
    auto col = eval_expr(o.expr, block, block.rows());
    out.schema.push_back({o.name, col.type});
    out.columns.push_back(std::move(col));
  }
  return AnyBlock(std::move(out));
}

// ---------------------------------------------------------------- THashJoin

THashJoinOp::THashJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe,
                         std::string build_key, std::string probe_key,
                         std::vector<JoinOutputColumn> output, QueryMetrics* metrics)
    : build_(std::move(build)), probe_(std::move(probe)), build_key_(std::move(build_key)),
      probe_key_(std::move(probe_key)), output_(std::move(output)), query_metrics_(metrics) {}

void THashJoinOp::open() {
  build_->open();
  probe_->open();
}

void THashJoinOp::close() {
  build_->close();
  probe_->close();
}

void THashJoinOp::reset() {
  done_ = false;
  built_ = false;
  build_blocks_.clear();
  table_.clear();
  build_->reset();
  probe_->reset();
}

void THashJoinOp::drain_build() {
  uint64_t build_rows = 0;
  while (auto in = build_->next()) {
    auto& block = expect_tuples(*in);
    const int key_idx = schema_index(block.schema, build_key_);
    if (key_idx < 0) throw EngineError(ErrorCode::UnknownColumn, build_key_);
    const auto& key_col = block.columns[static_cast<size_t>(key_idx)];
    if (key_col.type.kind != ColumnType::Kind::Int32) {
      throw EngineError(ErrorCode::KeyTypeError, build_key_ + " is not int32");
    }
    const uint32_t block_idx = static_cast<uint32_t>(build_blocks_.size());
    for (size_t row = 0; row < block.rows(); ++row) {
      table_[key_col.ints[row]].emplace_back(block_idx, static_cast<uint32_t>(row));
    }
    build_rows += block.rows();
    build_blocks_.push_back(std::move(block));
  }
  if (query_metrics_) query_metrics_->hash_build_rows += build_rows;
  built_ = true;
}

std::optional<AnyBlock> THashJoinOp::produce() {
  if (!built_) drain_build();
  if (table_.empty()) return std::nullopt;  // no probe blocks are pulled
  while (auto in = probe_->next()) {
    auto& probe_block = expect_tuples(*in);
    const int key_idx = schema_index(probe_block.schema, probe_key_);
    if (key_idx < 0) throw EngineError(ErrorCode::UnknownColumn, probe_key_);
    const auto& key_col = probe_block.columns[static_cast<size_t>(key_idx)];
    if (key_col.type.kind != ColumnType::Kind::Int32) {
      throw EngineError(ErrorCode::KeyTypeError, probe_key_ + " is not int32");
    }

    // Resolve output columns once per probe block.
    TupleBlock out;
    std::vector<std::pair<JoinSide, size_t>> sources;
    for (const auto& o : output_) {
      const OutSchema& schema =
          o.side == JoinSide::Probe
              ? probe_block.schema
              : (build_blocks_.empty() ? OutSchema{} : build_blocks_.front().schema);
      const int idx = schema_index(schema, o.column);
      if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, o.column);
      out.schema.push_back(schema[static_cast<size_t>(idx)]);
      out.columns.emplace_back();
      out.columns.back().type = schema[static_cast<size_t>(idx)].type;
      sources.emplace_back(o.side, static_cast<size_t>(idx));
    }

    for (size_t row = 0; row < probe_block.rows(); ++row) {
      auto it = table_.find(key_col.ints[row]);
      if (it == table_.end()) continue;
      for (const auto& [bblock, brow] : it->second) {
        for (size_t c = 0; c < sources.size(); ++c) {
          const auto& [side, idx] = sources[c];
          const auto& src = side == JoinSide::Probe ? probe_block.columns[idx]
                                                    : build_blocks_[bblock].columns[idx];
          const size_t src_row = side == JoinSide::Probe ? row : brow;
          if (src.type.kind == ColumnType::Kind::Int32) {
            out.columns[c].ints.push_back(src.ints[src_row]);
          } else {
            out.columns[c].strs.push_back(src.strs[src_row]);
          }
        }
      }
    }
    if (out.rows() > 0) return AnyBlock(std::move(out));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- PHashJoin

PHashJoinOp::PHashJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe,
                         std::string build_key, std::string probe_key, std::string output_table,
                         std::shared_ptr<ColumnTable> probe_table,
                         std::shared_ptr<ColumnTable> build_table, QueryMetrics* metrics)
    : build_(std::move(build)), probe_(std::move(probe)), build_key_(std::move(build_key)),
      probe_key_(std::move(probe_key)), output_table_(std::move(output_table)),
      probe_reader_(std::move(probe_table), probe_key_), build_table_(std::move(build_table)),
      query_metrics_(metrics) {
  if (probe_reader_.type().kind != ColumnType::Kind::Int32) {
    throw EngineError(ErrorCode::KeyTypeError, probe_key_ + " is not int32");
  }
}

void PHashJoinOp::open() {
  build_->open();
  probe_->open();
}

void PHashJoinOp::close() {
  build_->close();
  probe_->close();
}

void PHashJoinOp::reset() {
  done_ = false;
  built_ = false;
  key_counts_.clear();
  build_->reset();
  probe_->reset();
}

void PHashJoinOp::drain_build() {
  uint64_t build_rows = 0;
  while (auto in = build_->next()) {
    if (auto* positions = std::get_if<PositionBlock>(&*in)) {
      if (!build_table_) {
        throw EngineError(ErrorCode::InvalidPlan, "positional build side without a build table");
      }
      AttributeReader reader(build_table_, build_key_);
      if (reader.type().kind != ColumnType::Kind::Int32) {
        throw EngineError(ErrorCode::KeyTypeError, build_key_ + " is not int32");
      }
      const auto values = reader.fetch(*positions);
      for (int32_t v : values.ints) key_counts_[v]++;
      build_rows += positions->rows();
    } else {
      auto& block = std::get<TupleBlock>(*in);
      const int idx = schema_index(block.schema, build_key_);
      if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, build_key_);
      const auto& col = block.columns[static_cast<size_t>(idx)];
      if (col.type.kind != ColumnType::Kind::Int32) {
        throw EngineError(ErrorCode::KeyTypeError, build_key_ + " is not int32");
      }
      for (int32_t v : col.ints) key_counts_[v]++;
      build_rows += block.rows();
    }
  }
  if (query_metrics_) query_metrics_->hash_build_rows += build_rows;
  built_ = true;
}

std::optional<AnyBlock> PHashJoinOp::produce() {
  if (!built_) drain_build();
  if (key_counts_.empty()) return std::nullopt;
  while (auto in = probe_->next()) {
    auto& block = expect_positions(*in);
    if (block.covered_tables.size() != 1 || block.covered_tables.front() != output_table_) {
      throw EngineError(ErrorCode::TableMismatch,
                        "probe must cover exactly table " + output_table_);
    }
    const auto values = probe_reader_.fetch(block);
    PositionBlock out;
    out.covered_tables = {output_table_};
    out.positions.emplace_back();
    for (size_t row = 0; row < block.rows(); ++row) {
      auto it = key_counts_.find(values.ints[row]);
      if (it == key_counts_.end()) continue;
      // One emission per matching build occurrence (UNION ALL multiplicity).
      for (uint32_t k = 0; k < it->second; ++k) {
        out.positions.front().push_back(block.positions.front()[row]);
      }
    }
    if (out.rows() > 0) return AnyBlock(std::move(out));
  }
  return std::nullopt;
}

}  // namespace posrec
