#include "posrec/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <vector>

namespace posrec {

namespace {

constexpr char kAlnum[] = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

std::string random_word(SplitMix64& rng, uint32_t max_len) {
  const uint32_t len = 1 + static_cast<uint32_t>(rng.below(max_len));
  std::string out;
  out.reserve(len);
  for (uint32_t i = 0; i < len; ++i) out.push_back(kAlnum[rng.below(62)]);
  return out;
}

struct Edge {
  uint64_t from;
  uint64_t to;
  uint32_t level;  // level of the edge; seed edges from the root are level 1
};

}  // namespace

TableSchema edge_schema(uint32_t payload_cols, const std::string& table_name) {
  TableSchema schema;
  schema.table_name = table_name;
  schema.columns = {{"id", ColumnType::int32()},
                    {"from", ColumnType::int32()},
                    {"to", ColumnType::int32()},
                    {"name", ColumnType::varchar(15)}};
  for (uint32_t i = 1; i <= payload_cols; ++i) {
    schema.columns.push_back({"c" + std::to_string(i), ColumnType::varchar(20)});
  }
  return schema;
}

DatasetSummary generate_tree(const GenConfig& cfg, const std::filesystem::path& out_dir) {
  std::vector<Edge> edges;
  uint32_t height = 0;

  if (cfg.mode == TreeMode::Balanced) {
    if (cfg.fanout < 1) throw EngineError(ErrorCode::InvalidConfig, "fanout must be >= 1");
    // Nodes get BFS ids: parents of level l occupy a contiguous range.
    uint64_t level_start = 0;  // first node id of the current level
    uint64_t level_size = 1;
    uint64_t next_id = 1;
    for (uint32_t level = 1; level <= cfg.height; ++level) {
      for (uint64_t p = 0; p < level_size; ++p) {
        for (uint32_t c = 0; c < cfg.fanout; ++c) {
          edges.push_back({level_start + p, next_id++, level});
        }
      }
      level_start = next_id - level_size * cfg.fanout;
      level_size = level_size * cfg.fanout;
      height = level;
    }
  } else {
    if (cfg.node_count < 1) throw EngineError(ErrorCode::InvalidConfig, "node_count must be >= 1");
    SplitMix64 rng(cfg.seed);
    std::vector<uint32_t> depth(cfg.node_count, 0);
    edges.reserve(cfg.node_count - 1);
    for (uint64_t node = 1; node < cfg.node_count; ++node) {
      const uint64_t parent = rng.below(node);  // strictly smaller id
      depth[node] = depth[parent] + 1;
      height = std::max(height, depth[node]);
      edges.push_back({parent, node, depth[node]});
    }
    // Edge ids in BFS order: stable sort keeps sibling order by child id.
    std::stable_sort(edges.begin(), edges.end(),
                     [](const Edge& a, const Edge& b) { return a.level < b.level; });
  }

  const auto schema = edge_schema(cfg.payload_cols);
  std::filesystem::create_directories(out_dir);
  const auto csv_path = out_dir / "edges.csv";
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw EngineError(ErrorCode::IoError, "cannot write " + csv_path.string());

  csv << "id,from,to,name";
  for (uint32_t i = 1; i <= cfg.payload_cols; ++i) csv << ",c" << i;
  csv << "\n";

  SplitMix64 value_rng(cfg.seed ^ 0xa0761d6478bd642fULL);  // independent of the shape stream
  for (size_t i = 0; i < edges.size(); ++i) {
    csv << i << ',' << edges[i].from << ',' << edges[i].to << ','
        << random_word(value_rng, 15);
    for (uint32_t c = 0; c < cfg.payload_cols; ++c) csv << ',' << random_word(value_rng, 20);
    csv << "\n";
  }
  csv.flush();
  if (!csv) throw EngineError(ErrorCode::IoError, "write failed for " + csv_path.string());

  schema_to_json_file(schema, out_dir / "schema.json");

  DatasetSummary summary;
  summary.edge_count = edges.size();
  summary.height = height;
  summary.csv_bytes = std::filesystem::file_size(csv_path);
  return summary;
}

}  // namespace posrec
