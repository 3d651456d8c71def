#include "posrec/recursion.hpp"

#include <algorithm>

namespace posrec {

std::optional<AnyBlock> CteOp::produce() {
  if (!owner_) throw EngineError(ErrorCode::CteUnbound, "cte leaf has no owning recursive node");
  return owner_->serve_cte();
}

RecursiveOp::RecursiveOp(std::unique_ptr<Operator> seed, std::unique_ptr<Operator> recursive_child,
                         RecursiveConfig cfg, QueryMetrics* metrics)
    : seed_(std::move(seed)), recursive_(std::move(recursive_child)), cfg_(std::move(cfg)),
      query_metrics_(metrics) {}

void RecursiveOp::bind_cte(CteOp* cte) {
  cte_ = cte;
  cte->bind(this);
}

void RecursiveOp::open() {
  if (!cte_) {
    throw EngineError(ErrorCode::CteUnbound, "recursive branch contains no bound cte node");
  }
  seed_->open();
  recursive_->open();
}

void RecursiveOp::close() {
  seed_->close();
  recursive_->close();
}

void RecursiveOp::reset() {
  done_ = false;
  seeded_ = false;
  in_recursion_pass_ = false;
  cur_level_.clear();
  next_level_.clear();
  up_cursor_ = 0;
  cte_cursor_ = 0;
  depth_ = 0;
  seed_->reset();
  recursive_->reset();
}

void RecursiveOp::check_block(const AnyBlock& block) const {
  if (cfg_.representation == Representation::Positional) {
    const auto* positions = std::get_if<PositionBlock>(&block);
    if (!positions) {
      throw EngineError(ErrorCode::TableMismatch, "positional recursion received a tuple block");
    }
    if (positions->covered_tables.size() != 1 ||
        positions->covered_tables.front() != cfg_.output_table) {
      throw EngineError(ErrorCode::TableMismatch,
                        "positional recursion requires positions of table " + cfg_.output_table);
    }
  } else {
    const auto* tuples = std::get_if<TupleBlock>(&block);
    if (!tuples) {
      throw EngineError(ErrorCode::SchemaMismatch, "tuple recursion received a position block");
    }
    if (!cur_level_.empty()) {
      const auto& first = std::get<TupleBlock>(cur_level_.front());
      if (tuples->schema != first.schema) {
        throw EngineError(ErrorCode::SchemaMismatch,
                          "seed and recursive branch schemas differ");
      }
    }
  }
}

void RecursiveOp::drain_seed() {
  while (auto block = seed_->next()) {
    check_block(*block);
    cur_level_.push_back(std::move(*block));
  }
  seeded_ = true;
  if (query_metrics_) {
    query_metrics_->peak_resident_blocks =
        std::max<uint64_t>(query_metrics_->peak_resident_blocks, cur_level_.size());
  }
}

void RecursiveOp::run_recursion_pass() {
  in_recursion_pass_ = true;
  cte_cursor_ = 0;
  recursive_->reset();
  while (auto block = recursive_->next()) {
    const size_t rows = std::visit([](const auto& b) { return b.rows(); }, *block);
    if (rows == 0) continue;
    check_block(*block);
    next_level_.push_back(std::move(*block));
    if (query_metrics_) {
      query_metrics_->peak_resident_blocks = std::max<uint64_t>(
          query_metrics_->peak_resident_blocks, cur_level_.size() + next_level_.size());
    }
  }
  in_recursion_pass_ = false;
  // curLevel is replaced with nextLevel; the new level starts from its front.
  cur_level_ = std::move(next_level_);
  next_level_.clear();
  up_cursor_ = 0;
  ++depth_;
}

std::optional<AnyBlock> RecursiveOp::produce() {
  if (!seeded_) drain_seed();
  while (true) {
    if (up_cursor_ < cur_level_.size()) {
      const AnyBlock& block = cur_level_[up_cursor_++];
      if (level_log_) {
        const size_t rows = std::visit([](const auto& b) { return b.rows(); }, block);
        level_log_->insert(level_log_->end(), rows, depth_);
      }
      return block;  // copy; cur_level_ is retained for the recursion pass
    }
    if (cur_level_.empty() || depth_ >= cfg_.max_depth) return std::nullopt;
    run_recursion_pass();
    if (cur_level_.empty()) return std::nullopt;
  }
}

std::optional<AnyBlock> RecursiveOp::serve_cte() {
  if (!in_recursion_pass_) {
    throw EngineError(ErrorCode::ProtocolViolation,
                      "cte pulled outside the owner's recursion pass");
  }
  if (cte_cursor_ >= cur_level_.size()) return std::nullopt;
  return cur_level_[cte_cursor_++];
}

}  // namespace posrec
