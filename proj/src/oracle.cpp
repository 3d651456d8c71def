#include "posrec/oracle.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace posrec::oracle {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

int32_t to_int(const std::string& s) {
  int32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::runtime_error("oracle: bad int '" + s + "'");
  }
  return v;
}

}  // namespace

int Table::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int32_t> Table::int_column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw std::runtime_error("oracle: unknown column " + name);
  std::vector<int32_t> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(to_int(row[static_cast<size_t>(idx)]));
  return out;
}

Table load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("oracle: cannot open " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("oracle: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

std::vector<size_t> Result::flattened() const {
  std::vector<size_t> out;
  for (const auto& level : levels) out.insert(out.end(), level.begin(), level.end());
  return out;
}

uint64_t Result::total_rows() const {
  uint64_t n = 0;
  for (const auto& level : levels) n += level.size();
  return n;
}

Result eval(const Table& table, const std::string& seed_column, int32_t seed_value,
            uint32_t max_depth) {
  const auto seed_vals = table.int_column(seed_column);
  const auto from_vals = table.int_column("from");
  const auto to_vals = table.int_column("to");

  // from-value -> row indices, in row order.
  std::unordered_map<int32_t, std::vector<size_t>> by_from;
  for (size_t i = 0; i < from_vals.size(); ++i) by_from[from_vals[i]].push_back(i);

  Result result;
  std::vector<size_t> level;
  for (size_t i = 0; i < seed_vals.size(); ++i) {
    if (seed_vals[i] == seed_value) level.push_back(i);
  }
  if (level.empty()) return result;
  result.levels.push_back(level);

  for (uint32_t depth = 0; depth < max_depth; ++depth) {
    std::vector<size_t> next;
    for (size_t row : result.levels.back()) {
      auto it = by_from.find(to_vals[row]);
      if (it == by_from.end()) continue;
      next.insert(next.end(), it->second.begin(), it->second.end());
    }
    if (next.empty()) break;
    result.levels.push_back(std::move(next));
  }
  return result;
}

}  // namespace posrec::oracle
