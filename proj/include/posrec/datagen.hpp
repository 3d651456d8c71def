#pragma once

// Deterministic tree dataset generator: edges.csv + schema.json. Same config
// always produces byte-identical output; the PRNG is documented in
// docs/data-format.md so other tools can reproduce it.

#include <cstdint>
#include <filesystem>
#include <string>

#include "posrec/storage.hpp"

namespace posrec {

// splitmix64; the de-facto standard 64-bit state mixer.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by modulo; bias is irrelevant for test data.
  uint64_t below(uint64_t bound) { return next() % bound; }

 private:
  uint64_t state_;
};

enum class TreeMode { Balanced, Random };

struct GenConfig {
  TreeMode mode = TreeMode::Balanced;
  uint32_t fanout = 2;       // Balanced: children per node, >= 1
  uint32_t height = 1;       // Balanced: levels of edges, >= 0
  uint64_t node_count = 0;   // Random: number of nodes, >= 1
  uint32_t payload_cols = 0; // c1..cN varchar(20) columns
  uint64_t seed = 0;
};

struct DatasetSummary {
  uint64_t edge_count = 0;
  uint32_t height = 0;
  uint64_t csv_bytes = 0;
};

TableSchema edge_schema(uint32_t payload_cols, const std::string& table_name = "edges");

// Writes out_dir/edges.csv and out_dir/schema.json.
DatasetSummary generate_tree(const GenConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace posrec
