#pragma once

// Columnar on-disk storage: fixed-width slot files, a paged LRU cache over
// them, the schema catalog and the CSV loader.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "posrec/common.hpp"

namespace posrec {

struct ColumnType {
  enum class Kind { Int32, Varchar };

  Kind kind = Kind::Int32;
  uint32_t max_len = 0;  // Varchar only

  static ColumnType int32() { return {Kind::Int32, 0}; }
  static ColumnType varchar(uint32_t max_len) { return {Kind::Varchar, max_len}; }

  uint32_t slot_width() const { return kind == Kind::Int32 ? 4u : max_len; }
  bool operator==(const ColumnType&) const = default;
};

struct SchemaColumn {
  std::string name;
  ColumnType type;
  bool operator==(const SchemaColumn&) const = default;
};

struct TableSchema {
  std::string table_name;
  std::vector<SchemaColumn> columns;

  int column_index(const std::string& name) const;  // -1 if absent
  void check() const;                               // throws InvalidConfig

  bool operator==(const TableSchema&) const = default;
};

TableSchema schema_from_json_file(const std::filesystem::path& path);
void schema_to_json_file(const TableSchema& schema, const std::filesystem::path& path);

// One value vector, typed like the column it came from.
struct ValueColumn {
  ColumnType type;
  std::vector<int32_t> ints;
  std::vector<std::string> strs;

  size_t size() const { return type.kind == ColumnType::Kind::Int32 ? ints.size() : strs.size(); }
};

// Shared LRU cache of 32 KiB file pages. Keys are (file id, page number).
class PageCache {
 public:
  static constexpr size_t kPageSize = 32 * 1024;
  static constexpr size_t kDefaultCapacity = 4096;

  explicit PageCache(size_t capacity = kDefaultCapacity);

  using Page = std::vector<char>;
  using Loader = std::function<Page()>;

  std::shared_ptr<const Page> get(uint64_t file_id, uint64_t page_no, const Loader& load);

  size_t resident() const;
  size_t capacity() const { return capacity_; }
  size_t peak_resident() const;
  void clear();

 private:
  struct Key {
    uint64_t file_id;
    uint64_t page_no;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return std::hash<uint64_t>()(k.file_id * 0x9e3779b97f4a7c15ULL ^ k.page_no);
    }
  };
  struct Entry {
    std::list<Key>::iterator lru_it;
    std::shared_ptr<const Page> page;
  };

  size_t capacity_;
  mutable std::mutex mu_;
  std::list<Key> lru_;  // front = most recent
  std::unordered_map<Key, Entry, KeyHash> pages_;
  size_t peak_ = 0;
};

// Read-only handle on one PCOL slot file. Reads go through the page cache.
class ColumnFile {
 public:
  ColumnFile(std::filesystem::path path, std::shared_ptr<PageCache> cache);
  ~ColumnFile();

  ColumnFile(const ColumnFile&) = delete;
  ColumnFile& operator=(const ColumnFile&) = delete;

  ColumnType type() const { return type_; }
  uint64_t row_count() const { return row_count_; }

  void read_slots(std::span<const uint64_t> positions, ValueColumn& out) const;

  // Drops the fd and reopens it; used by cold runs together with cache.clear().
  void reopen();

 private:
  PageCache::Page load_page(uint64_t page_no) const;

  std::filesystem::path path_;
  std::shared_ptr<PageCache> cache_;
  int fd_ = -1;
  uint64_t file_id_ = 0;
  ColumnType type_;
  uint64_t row_count_ = 0;
  uint64_t slot_width_ = 0;
};

constexpr uint32_t kColumnFileVersion = 1;

// Immutable columnar table: schema + one slot file per column.
class ColumnTable {
 public:
  // Opens an already-written table directory (schema.json + <col>.pcol).
  static std::shared_ptr<ColumnTable> open(const std::filesystem::path& dir,
                                           std::shared_ptr<PageCache> cache = nullptr);

  // Parses the CSV, writes slot files + schema.json into out_dir, then opens.
  static std::shared_ptr<ColumnTable> load_csv(const std::filesystem::path& csv_path,
                                               const TableSchema& schema,
                                               const std::filesystem::path& out_dir,
                                               std::shared_ptr<PageCache> cache = nullptr);

  const TableSchema& schema() const { return schema_; }
  const std::string& name() const { return schema_.table_name; }
  uint64_t row_count() const { return row_count_; }
  PageCache& page_cache() { return *cache_; }

  ValueColumn read_slots(const std::string& column, std::span<const uint64_t> positions) const;

  // values_read accounting, per column, in schema order.
  std::vector<uint64_t> values_read() const;
  uint64_t values_read(const std::string& column) const;
  void reset_metrics();

  // Closes and reopens column files and clears the page cache.
  void cold_restart();

 private:
  ColumnTable() = default;

  TableSchema schema_;
  uint64_t row_count_ = 0;
  std::shared_ptr<PageCache> cache_;
  std::vector<std::unique_ptr<ColumnFile>> files_;  // schema order
  mutable std::vector<std::unique_ptr<std::atomic<uint64_t>>> values_read_;
};

// Splits one CSV line on commas; the generator guarantees no quoting.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace posrec
