#pragma once

// Level-by-level recursive evaluation: the Recursive operator owns the
// working levels (curLevel/nextLevel) and its companion CTE leaf serves the
// current level to the recursive branch.

#include <memory>
#include <vector>

#include "posrec/exec.hpp"

namespace posrec {

enum class Representation { Tuple, Positional };

struct RecursiveConfig {
  uint32_t max_depth = 0;  // mandatory; seed = level 0, levels 0..max_depth emitted
  Representation representation = Representation::Tuple;
  std::string output_table;  // Positional only
};

class RecursiveOp;

// Leaf inside the recursive branch; pulls current-level blocks from its owner.
class CteOp : public Operator {
 public:
  void bind(RecursiveOp* owner) { owner_ = owner; }
  void reset() override { done_ = false; }

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  RecursiveOp* owner_ = nullptr;
  friend class RecursiveOp;
};

// Shared control flow for TRecursive and PRecursive; the representation only
// changes which block kind flows through and which checks apply.
class RecursiveOp : public Operator {
 public:
  RecursiveOp(std::unique_ptr<Operator> seed, std::unique_ptr<Operator> recursive_child,
              RecursiveConfig cfg, QueryMetrics* metrics);

  // Must be called before execution; the executor wires the CTE leaf found
  // in the recursive branch to this operator.
  void bind_cte(CteOp* cte);

  void open() override;
  void close() override;
  void reset() override;

  // When set, the level of every row emitted upward is appended here.
  void set_level_log(std::vector<uint32_t>* log) { level_log_ = log; }

  uint32_t current_depth() const { return depth_; }

 protected:
  std::optional<AnyBlock> produce() override;

 private:
  void drain_seed();
  void run_recursion_pass();
  void check_block(const AnyBlock& block) const;
  std::optional<AnyBlock> serve_cte();

  std::unique_ptr<Operator> seed_;
  std::unique_ptr<Operator> recursive_;
  RecursiveConfig cfg_;
  QueryMetrics* query_metrics_;
  CteOp* cte_ = nullptr;

  std::vector<AnyBlock> cur_level_;
  std::vector<AnyBlock> next_level_;
  size_t up_cursor_ = 0;
  size_t cte_cursor_ = 0;
  uint32_t depth_ = 0;
  bool seeded_ = false;
  bool in_recursion_pass_ = false;

  std::vector<uint32_t>* level_log_ = nullptr;

  friend class CteOp;
};

}  // namespace posrec
