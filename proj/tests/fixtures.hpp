#pragma once

// Shared test fixtures: the 3-edge chain and the diamond DAG with a tail.

#include <filesystem>
#include <fstream>
#include <string>

#include "posrec/runner.hpp"

namespace posrec::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("posrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// id,from,to,name over vertices 0..3: 0->1, 0->2, 1->3.
// from = [0,0,1], to = [1,2,3].
inline std::filesystem::path write_chain_csv(const std::filesystem::path& dir) {
  const auto path = dir / "edges.csv";
  std::ofstream out(path);
  out << "id,from,to,name\n"
      << "0,0,1,alpha\n"
      << "1,0,2,beta\n"
      << "2,1,3,gamma\n";
  return path;
}

// Diamond a->b, a->c, b->d, c->d plus tail d->e; vertices a..e = 0..4.
// Two level-1 edges reach d, so the tail edge appears twice at level 2.
inline std::filesystem::path write_diamond_csv(const std::filesystem::path& dir) {
  const auto path = dir / "edges.csv";
  std::ofstream out(path);
  out << "id,from,to,name\n"
      << "0,0,1,ab\n"
      << "1,0,2,ac\n"
      << "2,1,3,bd\n"
      << "3,2,3,cd\n"
      << "4,3,4,de\n";
  return path;
}

inline TableSchema chain_schema() {
  TableSchema schema;
  schema.table_name = "edges";
  schema.columns = {{"id", ColumnType::int32()},
                    {"from", ColumnType::int32()},
                    {"to", ColumnType::int32()},
                    {"name", ColumnType::varchar(15)}};
  return schema;
}

inline std::shared_ptr<ColumnTable> load_chain(const std::string& name) {
  const auto dir = temp_dir(name);
  const auto csv = write_chain_csv(dir);
  return ColumnTable::load_csv(csv, chain_schema(), dir);
}

}  // namespace posrec::test
