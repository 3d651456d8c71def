#pragma once

// Independent ground-truth evaluator for the recursive queries. Reads the
// CSV directly and evaluates the fixpoint level by level with UNION ALL
// duplicate semantics. Deliberately shares no code with the engine's
// operators (see tests/check_oracle_isolation.sh).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace posrec::oracle {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Int-parsed copies of the named column, one entry per row.
  std::vector<int32_t> int_column(const std::string& name) const;
  int column_index(const std::string& name) const;
};

Table load_csv(const std::filesystem::path& path);

// Levels of row indices into the table; duplicates preserved. levels[0] is
// the seed (rows whose seed_column equals seed_value), levels[k+1] joins
// levels[k].to against table.from.
struct Result {
  std::vector<std::vector<size_t>> levels;

  std::vector<size_t> flattened() const;
  uint64_t total_rows() const;
};

Result eval(const Table& table, const std::string& seed_column, int32_t seed_value,
            uint32_t max_depth);

}  // namespace posrec::oracle
