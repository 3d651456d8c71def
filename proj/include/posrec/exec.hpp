#pragma once

// Pull-based operator contract and the non-recursive operators: datasource,
// positional filter, materialize, project, tuple filter and the two hash
// joins (tuple-tuple and positional).

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "posrec/blocks.hpp"

namespace posrec {

// Counters that belong to the whole query rather than a single operator.
struct QueryMetrics {
  uint64_t rows_materialized = 0;
  uint64_t hash_build_rows = 0;
  uint64_t peak_resident_blocks = 0;
};

struct OpMetrics {
  uint64_t blocks_out = 0;
  uint64_t rows_out = 0;
};

class Operator {
 public:
  virtual ~Operator() = default;

  virtual void open() {}
  // nullopt = EndOfStream; stays EndOfStream until reset().
  std::optional<AnyBlock> next();
  virtual void close() {}
  // Restores the operator (recursively) to the freshly opened state.
  virtual void reset() = 0;

  const OpMetrics& metrics() const { return metrics_; }

 protected:
  virtual std::optional<AnyBlock> produce() = 0;

  bool done_ = false;
  OpMetrics metrics_;
};

// Helpers; throw InvalidPlan when an operator receives the wrong block kind.
PositionBlock& expect_positions(AnyBlock& block);
TupleBlock& expect_tuples(AnyBlock& block);

class DataSourceOp : public Operator {
 public:
  DataSourceOp(std::shared_ptr<ColumnTable> table, size_t capacity);
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  std::shared_ptr<ColumnTable> table_;
  size_t capacity_;
  uint64_t next_pos_ = 0;
};

class PosFilterOp : public Operator {
 public:
  PosFilterOp(std::unique_ptr<Operator> child, std::shared_ptr<ColumnTable> table,
              Predicate predicate);
  void open() override { child_->open(); }
  void close() override { child_->close(); }
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  std::unique_ptr<Operator> child_;
  AttributeReader reader_;
  Predicate predicate_;
};

class MaterializeOp : public Operator {
 public:
  MaterializeOp(std::unique_ptr<Operator> child, std::vector<AttributeReader> attrs,
                std::vector<ComputedColumn> computed, QueryMetrics* metrics);
  void open() override { child_->open(); }
  void close() override { child_->close(); }
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  std::unique_ptr<Operator> child_;
  std::vector<AttributeReader> attrs_;
  std::vector<ComputedColumn> computed_;
  QueryMetrics* query_metrics_;
};

class TupleFilterOp : public Operator {
 public:
  TupleFilterOp(std::unique_ptr<Operator> child, Predicate predicate);
  void open() override { child_->open(); }
  void close() override { child_->close(); }
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  std::unique_ptr<Operator> child_;
  Predicate predicate_;
};

class ProjectOp : public Operator {
 public:
  ProjectOp(std::unique_ptr<Operator> child, std::vector<ComputedColumn> outputs);
  void open() override { child_->open(); }
  void close() override { child_->close(); }
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  std::unique_ptr<Operator> child_;
  std::vector<ComputedColumn> outputs_;
};

enum class JoinSide { Build, Probe };

struct JoinOutputColumn {
  JoinSide side = JoinSide::Probe;
  std::string column;
  bool operator==(const JoinOutputColumn&) const = default;
};

// Tuple-tuple equi-join on Int32 keys. Drains the build child into a hash
// table on first next(), then streams probe blocks. Output order is probe
// outermost, build insertion order innermost.
class THashJoinOp : public Operator {
 public:
  THashJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe,
              std::string build_key, std::string probe_key,
              std::vector<JoinOutputColumn> output, QueryMetrics* metrics);
  void open() override;
  void close() override;
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  void drain_build();

  std::unique_ptr<Operator> build_;
  std::unique_ptr<Operator> probe_;
  std::string build_key_;
  std::string probe_key_;
  std::vector<JoinOutputColumn> output_;
  QueryMetrics* query_metrics_;

  bool built_ = false;
  std::vector<TupleBlock> build_blocks_;
  std::unordered_map<int32_t, std::vector<std::pair<uint32_t, uint32_t>>> table_;
};

// Positional join: build side supplies key values (read through a reader if
// positional), probe side is positional; emits probe-table positions, one per
// matching build occurrence.
class PHashJoinOp : public Operator {
 public:
  // build_table is used to read build_key when the build side is positional;
  // it may be null when the build side emits tuples.
  PHashJoinOp(std::unique_ptr<Operator> build, std::unique_ptr<Operator> probe,
              std::string build_key, std::string probe_key, std::string output_table,
              std::shared_ptr<ColumnTable> probe_table, std::shared_ptr<ColumnTable> build_table,
              QueryMetrics* metrics);
  void open() override;
  void close() override;
  void reset() override;

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  void drain_build();

  std::unique_ptr<Operator> build_;
  std::unique_ptr<Operator> probe_;
  std::string build_key_;
  std::string probe_key_;
  std::string output_table_;
  AttributeReader probe_reader_;
  std::shared_ptr<ColumnTable> build_table_;

  QueryMetrics* query_metrics_;
  bool built_ = false;
  std::unordered_map<int32_t, uint32_t> key_counts_;
};

}  // namespace posrec
