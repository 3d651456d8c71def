#include "posrec/storage.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace posrec {

using json = nlohmann::json;

int TableSchema::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void TableSchema::check() const {
  if (columns.empty()) {
    throw EngineError(ErrorCode::InvalidConfig, "schema '" + table_name + "' has no columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& col : columns) {
    if (!seen.insert(col.name).second) {
      throw EngineError(ErrorCode::InvalidConfig, "duplicate column name '" + col.name + "'");
    }
    if (col.type.kind == ColumnType::Kind::Varchar && col.type.max_len < 1) {
      throw EngineError(ErrorCode::InvalidConfig, "varchar max_len must be >= 1");
    }
  }
}

TableSchema schema_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EngineError(ErrorCode::IoError, "cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw EngineError(ErrorCode::JsonError, e.what());
  }
  TableSchema schema;
  try {
    schema.table_name = doc.at("table_name").get<std::string>();
    for (const auto& c : doc.at("columns")) {
      SchemaColumn col;
      col.name = c.at("name").get<std::string>();
      const auto type = c.at("type").get<std::string>();
      if (type == "int32") {
        col.type = ColumnType::int32();
      } else if (type == "varchar") {
        col.type = ColumnType::varchar(c.at("max_len").get<uint32_t>());
      } else {
        throw EngineError(ErrorCode::JsonError, "unknown column type '" + type + "'");
      }
      schema.columns.push_back(std::move(col));
    }
  } catch (const json::exception& e) {
    throw EngineError(ErrorCode::JsonError, e.what());
  }
  schema.check();
  return schema;
}

void schema_to_json_file(const TableSchema& schema, const std::filesystem::path& path) {
  json cols = json::array();
  for (const auto& c : schema.columns) {
    json col{{"name", c.name}};
    if (c.type.kind == ColumnType::Kind::Int32) {
      col["type"] = "int32";
    } else {
      col["type"] = "varchar";
      col["max_len"] = c.type.max_len;
    }
    cols.push_back(std::move(col));
  }
  json doc{{"table_name", schema.table_name}, {"columns", std::move(cols)}};
  std::ofstream out(path);
  if (!out) throw EngineError(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------- PageCache

PageCache::PageCache(size_t capacity) : capacity_(std::max<size_t>(capacity, 1)) {}

std::shared_ptr<const PageCache::Page> PageCache::get(uint64_t file_id, uint64_t page_no,
                                                      const Loader& load) {
  Key key{file_id, page_no};
  {
    std::lock_guard lock(mu_);
    auto it = pages_.find(key);
    if (it != pages_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.lru_it);
      return it->second.page;
    }
  }
  // Load outside the lock; a racing loader for the same page is harmless.
  auto page = std::make_shared<const Page>(load());
  std::lock_guard lock(mu_);
  auto it = pages_.find(key);
  if (it != pages_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second.lru_it);
    return it->second.page;
  }
  while (pages_.size() >= capacity_) {
    pages_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(key);
  pages_.emplace(key, Entry{lru_.begin(), page});
  peak_ = std::max(peak_, pages_.size());
  return page;
}

size_t PageCache::resident() const {
  std::lock_guard lock(mu_);
  return pages_.size();
}

size_t PageCache::peak_resident() const {
  std::lock_guard lock(mu_);
  return peak_;
}

void PageCache::clear() {
  std::lock_guard lock(mu_);
  pages_.clear();
  lru_.clear();
}

// --------------------------------------------------------------- ColumnFile

namespace {

std::atomic<uint64_t> g_next_file_id{1};

struct FileHeader {
  char magic[4];
  uint32_t version;
  uint32_t type_tag;
  uint32_t slot_width;
  uint64_t row_count;
};
static_assert(sizeof(FileHeader) == 24);

}  // namespace

ColumnFile::ColumnFile(std::filesystem::path path, std::shared_ptr<PageCache> cache)
    : path_(std::move(path)), cache_(std::move(cache)), file_id_(g_next_file_id.fetch_add(1)) {
  fd_ = ::open(path_.c_str(), O_RDONLY);
  if (fd_ < 0) throw EngineError(ErrorCode::IoError, "cannot open " + path_.string());
  FileHeader hdr{};
  if (::pread(fd_, &hdr, sizeof(hdr), 0) != sizeof(hdr)) {
    throw EngineError(ErrorCode::IoError, "short header in " + path_.string());
  }
  if (std::memcmp(hdr.magic, "PCOL", 4) != 0 || hdr.version != kColumnFileVersion) {
    throw EngineError(ErrorCode::IoError, "bad column file " + path_.string());
  }
  type_ = hdr.type_tag == 0 ? ColumnType::int32() : ColumnType::varchar(hdr.slot_width);
  slot_width_ = hdr.slot_width;
  row_count_ = hdr.row_count;
}

ColumnFile::~ColumnFile() {
  if (fd_ >= 0) ::close(fd_);
}

PageCache::Page ColumnFile::load_page(uint64_t page_no) const {
  const uint64_t payload_bytes = row_count_ * slot_width_;
  const uint64_t offset = page_no * PageCache::kPageSize;
  const size_t len =
      static_cast<size_t>(std::min<uint64_t>(PageCache::kPageSize, payload_bytes - offset));
  PageCache::Page page(len);
  ssize_t got = ::pread(fd_, page.data(), len, static_cast<off_t>(sizeof(FileHeader) + offset));
  if (got != static_cast<ssize_t>(len)) {
    throw EngineError(ErrorCode::IoError, "short read from " + path_.string());
  }
  return page;
}

void ColumnFile::read_slots(std::span<const uint64_t> positions, ValueColumn& out) const {
  out.type = type_;
  std::shared_ptr<const PageCache::Page> cached;
  uint64_t cached_no = UINT64_MAX;
  char slot[64];
  std::vector<char> big_slot;
  for (uint64_t pos : positions) {
    if (pos >= row_count_) {
      throw EngineError(ErrorCode::PositionOutOfRange,
                        "position " + std::to_string(pos) + " in " + path_.string());
    }
    const uint64_t byte = pos * slot_width_;
    char* dst = slot_width_ <= sizeof(slot)
                    ? slot
                    : (big_slot.resize(slot_width_), big_slot.data());
    uint64_t need = slot_width_;
    uint64_t at = byte;
    while (need > 0) {
      const uint64_t page_no = at / PageCache::kPageSize;
      const uint64_t in_page = at % PageCache::kPageSize;
      if (page_no != cached_no) {
        cached = cache_->get(file_id_, page_no, [this, page_no] { return load_page(page_no); });
        cached_no = page_no;
      }
      const uint64_t take = std::min<uint64_t>(need, cached->size() - in_page);
      std::memcpy(dst + (slot_width_ - need), cached->data() + in_page, take);
      need -= take;
      at += take;
    }
    if (type_.kind == ColumnType::Kind::Int32) {
      int32_t v;
      std::memcpy(&v, dst, 4);
      out.ints.push_back(v);
    } else {
      size_t len = 0;
      while (len < slot_width_ && dst[len] != '\0') ++len;
      out.strs.emplace_back(dst, len);
    }
  }
}

void ColumnFile::reopen() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_RDONLY);
  if (fd_ < 0) throw EngineError(ErrorCode::IoError, "cannot reopen " + path_.string());
}

// -------------------------------------------------------------- ColumnTable

std::shared_ptr<ColumnTable> ColumnTable::open(const std::filesystem::path& dir,
                                               std::shared_ptr<PageCache> cache) {
  auto table = std::shared_ptr<ColumnTable>(new ColumnTable());
  table->schema_ = schema_from_json_file(dir / "schema.json");
  table->cache_ = cache ? std::move(cache) : std::make_shared<PageCache>();
  for (const auto& col : table->schema_.columns) {
    auto file = std::make_unique<ColumnFile>(dir / (col.name + ".pcol"), table->cache_);
    if (file->type() != col.type) {
      throw EngineError(ErrorCode::SchemaMismatch, "column file type mismatch for " + col.name);
    }
    table->files_.push_back(std::move(file));
    table->values_read_.push_back(std::make_unique<std::atomic<uint64_t>>(0));
  }
  table->row_count_ = table->files_.front()->row_count();
  for (const auto& f : table->files_) {
    if (f->row_count() != table->row_count_) {
      throw EngineError(ErrorCode::SchemaMismatch, "column files disagree on row count");
    }
  }
  return table;
}

namespace {

void append_header(std::vector<char>& buf, ColumnType type, uint64_t row_count) {
  FileHeader hdr{};
  std::memcpy(hdr.magic, "PCOL", 4);
  hdr.version = kColumnFileVersion;
  hdr.type_tag = type.kind == ColumnType::Kind::Int32 ? 0 : 1;
  hdr.slot_width = type.slot_width();
  hdr.row_count = row_count;
  const char* p = reinterpret_cast<const char*>(&hdr);
  buf.insert(buf.begin(), p, p + sizeof(hdr));
}

}  // namespace

std::shared_ptr<ColumnTable> ColumnTable::load_csv(const std::filesystem::path& csv_path,
                                                   const TableSchema& schema,
                                                   const std::filesystem::path& out_dir,
                                                   std::shared_ptr<PageCache> cache) {
  schema.check();
  std::ifstream in(csv_path);
  if (!in) throw EngineError(ErrorCode::IoError, "cannot open " + csv_path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw EngineError(ErrorCode::SchemaMismatch, "CSV has no header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.size() != schema.columns.size()) {
    throw EngineError(ErrorCode::SchemaMismatch, "CSV header arity differs from schema");
  }
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] != schema.columns[i].name) {
      throw EngineError(ErrorCode::SchemaMismatch,
                        "CSV header column '" + header[i] + "' != '" + schema.columns[i].name + "'");
    }
  }

  const size_t ncols = schema.columns.size();
  std::vector<std::vector<char>> payload(ncols);
  uint64_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != ncols) {
      throw EngineError(ErrorCode::SchemaMismatch,
                        "CSV row " + std::to_string(rows) + " has wrong arity");
    }
    for (size_t i = 0; i < ncols; ++i) {
      const auto& type = schema.columns[i].type;
      if (type.kind == ColumnType::Kind::Int32) {
        int32_t v = 0;
        const auto& s = fields[i];
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
          throw EngineError(ErrorCode::ValueOverflow, "bad int32 value '" + s + "'");
        }
        const char* b = reinterpret_cast<const char*>(&v);
        payload[i].insert(payload[i].end(), b, b + 4);
      } else {
        if (fields[i].size() > type.max_len) {
          throw EngineError(ErrorCode::ValueOverflow, "varchar value too long: '" + fields[i] + "'");
        }
        payload[i].insert(payload[i].end(), fields[i].begin(), fields[i].end());
        payload[i].insert(payload[i].end(), type.max_len - fields[i].size(), '\0');
      }
    }
    ++rows;
  }

  std::filesystem::create_directories(out_dir);
  for (size_t i = 0; i < ncols; ++i) {
    append_header(payload[i], schema.columns[i].type, rows);
    const auto path = out_dir / (schema.columns[i].name + ".pcol");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw EngineError(ErrorCode::IoError, "cannot write " + path.string());
    out.write(payload[i].data(), static_cast<std::streamsize>(payload[i].size()));
    if (!out) throw EngineError(ErrorCode::IoError, "write failed for " + path.string());
  }
  schema_to_json_file(schema, out_dir / "schema.json");
  return open(out_dir, std::move(cache));
}

ValueColumn ColumnTable::read_slots(const std::string& column,
                                    std::span<const uint64_t> positions) const {
  const int idx = schema_.column_index(column);
  if (idx < 0) {
    throw EngineError(ErrorCode::UnknownColumn, column + " in table " + schema_.table_name);
  }
  ValueColumn out;
  files_[idx]->read_slots(positions, out);
  values_read_[idx]->fetch_add(positions.size(), std::memory_order_relaxed);
  return out;
}

std::vector<uint64_t> ColumnTable::values_read() const {
  std::vector<uint64_t> out;
  out.reserve(values_read_.size());
  for (const auto& c : values_read_) out.push_back(c->load());
  return out;
}

uint64_t ColumnTable::values_read(const std::string& column) const {
  const int idx = schema_.column_index(column);
  if (idx < 0) throw EngineError(ErrorCode::UnknownColumn, column);
  return values_read_[idx]->load();
}

void ColumnTable::reset_metrics() {
  for (auto& c : values_read_) c->store(0);
}

void ColumnTable::cold_restart() {
  cache_->clear();
  for (auto& f : files_) f->reopen();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace posrec
