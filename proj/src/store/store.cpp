#include "varembed/store/store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include "varembed/core/errors.hpp"
#include "varembed/core/half.hpp"
#include "varembed/core/hash.hpp"

static_assert(std::endian::native == std::endian::little, "store I/O assumes a little-endian host");

namespace varembed::store {
namespace {

using nlohmann::json;

constexpr char kLongKeyMarker = '\x01';

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string shard_name(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard-%05zu.%s", index, ext);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void validate_key(KeyKind kind, std::string_view key) {
  if (key.empty()) throw PreconditionError("empty store key");
  if (key.find('\0') != std::string_view::npos || key.find('\n') != std::string_view::npos ||
      key.find('\t') != std::string_view::npos) {
    throw PreconditionError("store key contains NUL, tab or newline");
  }
  if (kind == KeyKind::Variant) (void)VariantKey::parse(key);
}

}  // namespace

std::string_view to_string(DType dtype) noexcept { return dtype == DType::F16 ? "f16" : "f32"; }

DType parse_dtype(std::string_view text) {
  if (text == "f32" || text == "float32") return DType::F32;
  if (text == "f16" || text == "float16") return DType::F16;
  throw ConfigError("unknown dtype '" + std::string(text) + "'");
}

std::size_t dtype_size(DType dtype) noexcept { return dtype == DType::F16 ? 2 : 4; }

std::string_view to_string(KeyKind kind) noexcept {
  return kind == KeyKind::Sample ? "sample" : "variant";
}

KeyKind parse_key_kind(std::string_view text) {
  if (text == "variant") return KeyKind::Variant;
  if (text == "sample") return KeyKind::Sample;
  throw ConfigError("unknown key kind '" + std::string(text) + "'");
}

std::string order_bytes(KeyKind kind, std::string_view key) {
  if (kind == KeyKind::Sample) return std::string(key);
  return VariantKey::parse(key).sort_bytes();
}

KeyRange KeyRange::chromosome(Chromosome chrom) {
  KeyRange r;
  r.lo = std::string(1, static_cast<char>(chrom.rank()));
  if (chrom.rank() + 1 < Chromosome::kCount) r.hi = std::string(1, static_cast<char>(chrom.rank() + 1));
  return r;
}

// ---------------------------------------------------------------- manifest

json Manifest::to_json() const {
  json shard_list = json::array();
  for (const auto& s : shards) {
    json j{{"file_name", s.file_name}, {"first_key", s.first_key}, {"last_key", s.last_key},
           {"count", s.count},         {"checksum", s.checksum}};
    if (s.long_keys_file) {
      j["long_keys_file"] = *s.long_keys_file;
      j["long_keys_checksum"] = s.long_keys_checksum.value_or("");
    }
    shard_list.push_back(std::move(j));
  }
  return json{{"version", version},
              {"model_id", model_id},
              {"dim", dim},
              {"dtype", std::string(store::to_string(dtype))},
              {"key_kind", std::string(store::to_string(key_kind))},
              {"record_count", record_count},
              {"records_per_shard", records_per_shard},
              {"normalized", normalized},
              {"shards", shard_list}};
}

Manifest Manifest::from_json(const json& j) {
  Manifest m;
  try {
    m.version = j.at("version").get<int>();
    if (m.version != kFormatVersion) {
      throw FormatError("unsupported store version " + std::to_string(m.version));
    }
    m.model_id = j.at("model_id").get<std::string>();
    m.dim = j.at("dim").get<std::size_t>();
    m.dtype = parse_dtype(j.at("dtype").get<std::string>());
    m.key_kind = parse_key_kind(j.value("key_kind", std::string("variant")));
    m.record_count = j.at("record_count").get<std::uint64_t>();
    m.records_per_shard = j.value("records_per_shard", kDefaultRecordsPerShard);
    m.normalized = j.value("normalized", false);
    for (const auto& s : j.at("shards")) {
      ShardInfo info;
      info.file_name = s.at("file_name").get<std::string>();
      info.first_key = s.at("first_key").get<std::string>();
      info.last_key = s.at("last_key").get<std::string>();
      info.count = s.at("count").get<std::uint64_t>();
      info.checksum = s.at("checksum").get<std::string>();
      if (s.contains("long_keys_file")) {
        info.long_keys_file = s.at("long_keys_file").get<std::string>();
        info.long_keys_checksum = s.value("long_keys_checksum", std::string());
      }
      m.shards.push_back(std::move(info));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  }
  if (m.dim == 0) throw FormatError("bad manifest: dim must be positive");
  std::uint64_t total = 0;
  std::string prev;
  for (const auto& s : m.shards) {
    if (s.count == 0) throw FormatError("bad manifest: empty shard " + s.file_name);
    const auto first = order_bytes(m.key_kind, s.first_key);
    const auto last = order_bytes(m.key_kind, s.last_key);
    if (last < first || (!prev.empty() && first <= prev)) {
      throw FormatError("bad manifest: shard ranges overlap or descend at " + s.file_name);
    }
    prev = last;
    total += s.count;
  }
  if (total != m.record_count) throw FormatError("bad manifest: shard counts do not sum to record_count");
  return m;
}

Manifest Manifest::load(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw FormatError("no manifest in " + dir.string() + " (store missing or incomplete)");
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError("manifest " + path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------------ writer

struct StoreWriter::ShardState {
  std::size_t index = 0;
  std::ofstream out;
  Xxh64Stream hash;
  ShardInfo info;
  std::vector<std::pair<std::uint64_t, std::string>> long_keys;
};

StoreWriter::StoreWriter(std::filesystem::path dir, std::size_t dim, std::string model_id,
                         WriteOptions options)
    : dir_(std::move(dir)), options_(options) {
  if (dim == 0) throw PreconditionError("store dim must be positive");
  if (options.records_per_shard == 0) throw PreconditionError("records_per_shard must be >= 1");
  manifest_.model_id = std::move(model_id);
  manifest_.dim = dim;
  manifest_.dtype = options.dtype;
  manifest_.key_kind = options.key_kind;
  manifest_.records_per_shard = options.records_per_shard;
  manifest_.normalized = options.normalize;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create store dir " + dir_.string() + ": " + ec.message());
  // Unpublish any previous store before touching shard files.
  std::filesystem::remove(dir_ / "manifest.json", ec);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().filename().string().rfind("shard-", 0) == 0) std::filesystem::remove(entry.path(), ec);
  }
}

StoreWriter::~StoreWriter() = default;

void StoreWriter::open_shard() {
  auto s = std::make_unique<ShardState>();
  s->index = manifest_.shards.size();
  s->info.file_name = shard_name(s->index, "bin");
  s->out.open(dir_ / s->info.file_name, std::ios::binary | std::ios::trunc);
  if (!s->out) throw IoError("cannot create shard " + (dir_ / s->info.file_name).string());
  shard_ = std::move(s);
}

void StoreWriter::close_shard() {
  if (!shard_) return;
  auto& s = *shard_;
  s.out.flush();
  if (!s.out) throw IoError("write failed for shard " + s.info.file_name);
  s.out.close();
  s.info.checksum = hex64(s.hash.digest());
  if (!s.long_keys.empty()) {
    std::string table;
    for (const auto& [i, k] : s.long_keys) table += std::to_string(i) + "\t" + k + "\n";
    const auto name = shard_name(s.index, "keys");
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    out << table;
    out.flush();
    if (!out) throw IoError("write failed for " + name);
    s.info.long_keys_file = name;
    s.info.long_keys_checksum = hex64(xxh64(table));
  }
  manifest_.shards.push_back(std::move(s.info));
  shard_.reset();
}

void StoreWriter::add(std::string_view key, std::span<const float> values) {
  if (finished_) throw PreconditionError("store writer already finished");
  validate_key(options_.key_kind, key);
  if (values.size() != manifest_.dim) {
    throw DimMismatch("record " + std::string(key) + ": expected dim " + std::to_string(manifest_.dim) +
                      ", got " + std::to_string(values.size()));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw DimMismatch("record " + std::string(key) + ": non-finite value");
  }
  auto order = order_bytes(options_.key_kind, key);
  if (any_ && order <= last_order_) {
    throw UnsortedInput("store keys must strictly ascend: " + std::string(key) + " after " +
                        (shard_ ? shard_->info.last_key : manifest_.shards.back().last_key));
  }
  last_order_ = std::move(order);
  any_ = true;

  if (!shard_) open_shard();
  auto& s = *shard_;
  std::string record(manifest_.record_size(), '\0');
  if (key.size() <= kKeyBytes) {
    std::memcpy(record.data(), key.data(), key.size());
  } else {
    record[0] = kLongKeyMarker;
    s.long_keys.emplace_back(s.info.count, std::string(key));
  }
  double scale = 1.0;
  if (options_.normalize) {
    double norm = 0.0;
    for (float v : values) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) scale = 1.0 / norm;
  }
  char* dst = record.data() + kKeyBytes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = options_.normalize ? static_cast<float>(values[i] * scale) : values[i];
    if (options_.dtype == DType::F32) {
      std::memcpy(dst + i * 4, &v, 4);
    } else {
      const std::uint16_t h = float_to_half(v);
      std::memcpy(dst + i * 2, &h, 2);
    }
  }
  s.out.write(record.data(), static_cast<std::streamsize>(record.size()));
  s.hash.update(record.data(), record.size());
  if (s.info.count == 0) s.info.first_key = std::string(key);
  s.info.last_key = std::string(key);
  ++s.info.count;
  ++manifest_.record_count;
  if (s.info.count == options_.records_per_shard) close_shard();
}

void StoreWriter::add(const VariantKey& key, const EmbeddingVector& vector) {
  if (manifest_.model_id.empty()) manifest_.model_id = vector.model_id;
  add(key.to_string(), vector.values);
}

Manifest StoreWriter::finish() {
  if (finished_) return manifest_;
  close_shard();
  const auto tmp = dir_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << manifest_.to_json().dump(2) << "\n";
    out.flush();
    if (!out) throw IoError("cannot write manifest in " + dir_.string());
  }
  std::filesystem::rename(tmp, dir_ / "manifest.json");
  finished_ = true;
  return manifest_;
}

Manifest write_shards(const std::vector<std::pair<VariantKey, EmbeddingVector>>& records,
                      const std::filesystem::path& dir, WriteOptions options) {
  const std::size_t dim = records.empty() ? 1 : records.front().second.dim();
  const std::string model = records.empty() ? "" : records.front().second.model_id;
  StoreWriter writer(dir, dim, model, options);
  for (const auto& [k, v] : records) {
    if (v.model_id != model) throw DimMismatch("mixed model ids in one store");
    writer.add(k, v);
  }
  return writer.finish();
}

// ------------------------------------------------------------------ reader

struct EmbeddingStore::Shard {
  ShardInfo info;
  std::filesystem::path path;
  std::filesystem::path long_keys_path;
  std::size_t record_size = 0;
  mutable std::once_flag once;
  mutable const unsigned char* data = nullptr;
  mutable std::size_t mapped = 0;
  mutable std::vector<std::pair<std::uint64_t, std::string>> long_keys;

  ~Shard() {
    if (data && mapped) munmap(const_cast<unsigned char*>(data), mapped);
  }

  void load() const {
    const int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw ChecksumError("shard " + info.file_name + " missing");
    struct stat st {};
    if (fstat(fd, &st) != 0) {
      ::close(fd);
      throw IoError("cannot stat " + path.string());
    }
    const auto expected = info.count * record_size;
    if (static_cast<std::uint64_t>(st.st_size) != expected) {
      ::close(fd);
      throw ChecksumError("shard " + info.file_name + " has " + std::to_string(st.st_size) +
                          " bytes, expected " + std::to_string(expected));
    }
    void* p = mmap(nullptr, expected, PROT_READ, MAP_PRIVATE, fd, 0);
    ::close(fd);
    if (p == MAP_FAILED) throw IoError("cannot map " + path.string());
    const auto* bytes = static_cast<const unsigned char*>(p);
    if (hex64(xxh64(bytes, expected)) != info.checksum) {
      munmap(p, expected);
      throw ChecksumError("shard " + info.file_name + " checksum mismatch");
    }
    if (info.long_keys_file) {
      std::string table;
      try {
        table = read_file(long_keys_path);
      } catch (const IoError&) {
        munmap(p, expected);
        throw ChecksumError("long-key table " + *info.long_keys_file + " missing");
      }
      if (hex64(xxh64(table)) != info.long_keys_checksum.value_or("")) {
        munmap(p, expected);
        throw ChecksumError("long-key table " + *info.long_keys_file + " checksum mismatch");
      }
      std::istringstream in(table);
      std::string line;
      while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        long_keys.emplace_back(std::stoull(line.substr(0, tab)), line.substr(tab + 1));
      }
    }
    data = bytes;
    mapped = expected;
  }

  void ensure() const { std::call_once(once, [this] { load(); }); }
};

EmbeddingStore::EmbeddingStore(EmbeddingStore&&) noexcept = default;
EmbeddingStore& EmbeddingStore::operator=(EmbeddingStore&&) noexcept = default;
EmbeddingStore::~EmbeddingStore() = default;

EmbeddingStore EmbeddingStore::open(const std::filesystem::path& dir) {
  EmbeddingStore store;
  store.dir_ = dir;
  store.manifest_ = Manifest::load(dir);
  for (const auto& info : store.manifest_.shards) {
    auto s = std::make_unique<Shard>();
    s->info = info;
    s->path = dir / info.file_name;
    if (info.long_keys_file) s->long_keys_path = dir / *info.long_keys_file;
    s->record_size = store.manifest_.record_size();
    store.shard_last_order_.push_back(order_bytes(store.manifest_.key_kind, info.last_key));
    store.shards_.push_back(std::move(s));
  }
  return store;
}

const EmbeddingStore::Shard& EmbeddingStore::shard(std::size_t index) const {
  const auto& s = *shards_[index];
  s.ensure();
  return s;
}

std::string EmbeddingStore::key_at(const Shard& s, std::uint64_t i) const {
  const auto* field = reinterpret_cast<const char*>(s.data + i * s.record_size);
  if (field[0] == kLongKeyMarker) {
    auto it = std::lower_bound(s.long_keys.begin(), s.long_keys.end(), i,
                               [](const auto& e, std::uint64_t v) { return e.first < v; });
    if (it == s.long_keys.end() || it->first != i) {
      throw ChecksumError("shard " + s.info.file_name + ": long key entry missing");
    }
    return it->second;
  }
  return std::string(field, strnlen(field, kKeyBytes));
}

void EmbeddingStore::values_at(const Shard& s, std::uint64_t i, float* out) const {
  const unsigned char* p = s.data + i * s.record_size + kKeyBytes;
  if (manifest_.dtype == DType::F32) {
    std::memcpy(out, p, manifest_.dim * 4);
    return;
  }
  for (std::size_t d = 0; d < manifest_.dim; ++d) {
    std::uint16_t h;
    std::memcpy(&h, p + d * 2, 2);
    out[d] = half_to_float(h);
  }
}

std::optional<std::vector<float>> EmbeddingStore::get(std::string_view key) const {
  std::string target;
  try {
    target = order_bytes(manifest_.key_kind, key);
  } catch (const Error&) {
    return std::nullopt;
  }
  auto it = std::lower_bound(shard_last_order_.begin(), shard_last_order_.end(), target);
  if (it == shard_last_order_.end()) return std::nullopt;
  const auto& s = shard(static_cast<std::size_t>(it - shard_last_order_.begin()));
  std::uint64_t lo = 0, hi = s.info.count;
  while (lo < hi) {
    const auto mid = lo + (hi - lo) / 2;
    if (order_bytes(manifest_.key_kind, key_at(s, mid)) < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == s.info.count || key_at(s, lo) != key) return std::nullopt;
  std::vector<float> out(manifest_.dim);
  values_at(s, lo, out.data());
  return out;
}

std::optional<EmbeddingVector> EmbeddingStore::get_embedding(const VariantKey& key) const {
  auto v = get(key.to_string());
  if (!v) return std::nullopt;
  return EmbeddingVector{std::move(*v), manifest_.model_id};
}

void EmbeddingStore::scan(const KeyRange& range, const ScanFn& fn) const {
  if (range.lo && range.hi && *range.hi <= *range.lo) return;
  std::size_t first = 0;
  if (range.lo) {
    first = static_cast<std::size_t>(
        std::lower_bound(shard_last_order_.begin(), shard_last_order_.end(), *range.lo) -
        shard_last_order_.begin());
  }
  std::vector<float> buf(manifest_.dim);
  for (std::size_t si = first; si < shards_.size(); ++si) {
    const auto& s = shard(si);
    std::uint64_t i = 0;
    if (range.lo) {
      std::uint64_t lo = 0, hi = s.info.count;
      while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        if (order_bytes(manifest_.key_kind, key_at(s, mid)) < *range.lo) {
          lo = mid + 1;
        } else {
          hi = mid;
        }
      }
      i = lo;
    }
    for (; i < s.info.count; ++i) {
      auto key = key_at(s, i);
      if (range.hi && order_bytes(manifest_.key_kind, key) >= *range.hi) return;
      values_at(s, i, buf.data());
      fn(key, buf);
    }
  }
}

std::vector<std::string> EmbeddingStore::verify() const {
  std::vector<std::string> problems;
  std::string prev;
  for (std::size_t si = 0; si < shards_.size(); ++si) {
    const auto& info = shards_[si]->info;
    try {
      const auto& s = shard(si);
      for (std::uint64_t i = 0; i < s.info.count; ++i) {
        auto key = key_at(s, i);
        auto order = order_bytes(manifest_.key_kind, key);
        if (!prev.empty() && order <= prev) {
          problems.push_back(info.file_name + ": key order violated at record " + std::to_string(i));
        }
        if (i == 0 && key != info.first_key) problems.push_back(info.file_name + ": first_key mismatch");
        if (i + 1 == s.info.count && key != info.last_key) {
          problems.push_back(info.file_name + ": last_key mismatch");
        }
        prev = std::move(order);
      }
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

// ------------------------------------------------------- export / import

ExportFormat parse_export_format(std::string_view text) {
  if (text == "jsonl") return ExportFormat::Jsonl;
  if (text == "tsv") return ExportFormat::Tsv;
  throw ConfigError("unknown export format '" + std::string(text) + "'");
}

std::uint64_t export_store(const EmbeddingStore& store, std::ostream& out, ExportFormat format) {
  std::uint64_t n = 0;
  store.scan(KeyRange::all(), [&](std::string_view key, std::span<const float> values) {
    if (format == ExportFormat::Jsonl) {
      json vals = json::array();
      for (float v : values) vals.push_back(v);
      out << json{{"key", key}, {"values", vals}}.dump() << "\n";
    } else {
      out << key;
      char buf[32];
      for (float v : values) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << '\t' << std::string_view(buf, static_cast<std::size_t>(p - buf));
      }
      out << "\n";
    }
    ++n;
  });
  if (!out) throw IoError("export write failed");
  return n;
}

Manifest import_jsonl(std::istream& in, const std::filesystem::path& dir, ImportOptions options) {
  struct Row {
    std::string order;
    std::string key;
    std::vector<float> values;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      Row r;
      r.key = j.at("key").get<std::string>();
      r.values = j.at("values").get<std::vector<float>>();
      r.order = order_bytes(options.write.key_kind, r.key);
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError("import line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.order < b.order; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].order == rows[i - 1].order) throw DuplicateKey("import: duplicate key " + rows[i].key);
  }
  StoreWriter writer(dir, rows.empty() ? 1 : rows.front().values.size(), options.model_id, options.write);
  for (const auto& r : rows) writer.add(r.key, r.values);
  return writer.finish();
}

}  // namespace varembed::store
