#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varembed/core/types.hpp"

namespace varembed::store {

enum class DType { F32, F16 };
std::string_view to_string(DType dtype) noexcept;
DType parse_dtype(std::string_view text);
std::size_t dtype_size(DType dtype) noexcept;

/// Variant stores hold "CHROM-POS-REF-ALT" keys in canonical order; sample
/// stores (individual-level embeddings) hold sample ids in byte order.
enum class KeyKind { Variant, Sample };
std::string_view to_string(KeyKind kind) noexcept;
KeyKind parse_key_kind(std::string_view text);

constexpr std::size_t kKeyBytes = 32;
constexpr int kFormatVersion = 1;
constexpr std::uint64_t kDefaultRecordsPerShard = 1'000'000;

struct ShardInfo {
  std::string file_name;
  std::string first_key;
  std::string last_key;
  std::uint64_t count = 0;
  std::string checksum;  // xxh64 of the shard file, 16 hex digits
  /// Side table for keys longer than kKeyBytes: "<record index>\t<key>" lines.
  std::optional<std::string> long_keys_file;
  std::optional<std::string> long_keys_checksum;

  friend bool operator==(const ShardInfo&, const ShardInfo&) = default;
};

struct Manifest {
  int version = kFormatVersion;
  std::string model_id;
  std::size_t dim = 0;
  DType dtype = DType::F32;
  KeyKind key_kind = KeyKind::Variant;
  std::uint64_t record_count = 0;
  std::uint64_t records_per_shard = kDefaultRecordsPerShard;
  bool normalized = false;
  std::vector<ShardInfo> shards;

  std::size_t record_size() const noexcept { return kKeyBytes + dim * dtype_size(dtype); }

  nlohmann::json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
  /// Throws FormatError when the manifest is missing or malformed.
  static Manifest load(const std::filesystem::path& dir);

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct WriteOptions {
  std::uint64_t records_per_shard = kDefaultRecordsPerShard;
  DType dtype = DType::F32;
  KeyKind key_kind = KeyKind::Variant;
  /// L2-normalize vectors before writing.
  bool normalize = false;
};

/// Byte string whose memcmp order is the store order for `kind`.
std::string order_bytes(KeyKind kind, std::string_view key);

/// Streams sorted records into shards. The manifest is published by finish();
/// until then the directory never holds a manifest.
class StoreWriter {
 public:
  StoreWriter(std::filesystem::path dir, std::size_t dim, std::string model_id,
              WriteOptions options = {});
  ~StoreWriter();
  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  /// Throws UnsortedInput unless keys strictly ascend; DimMismatch on bad vectors.
  void add(std::string_view key, std::span<const float> values);
  void add(const VariantKey& key, const EmbeddingVector& vector);
  Manifest finish();
  std::uint64_t count() const noexcept { return manifest_.record_count; }

 private:
  void open_shard();
  void close_shard();

  std::filesystem::path dir_;
  WriteOptions options_;
  Manifest manifest_;
  std::string last_order_;
  bool any_ = false;
  bool finished_ = false;
  struct ShardState;
  std::unique_ptr<ShardState> shard_;
};

Manifest write_shards(const std::vector<std::pair<VariantKey, EmbeddingVector>>& records,
                      const std::filesystem::path& dir, WriteOptions options = {});

/// [lo, hi) over order bytes; empty bounds are open.
struct KeyRange {
  std::optional<std::string> lo;
  std::optional<std::string> hi;

  static KeyRange all() { return {}; }
  static KeyRange chromosome(Chromosome chrom);
};

using ScanFn = std::function<void(std::string_view key, std::span<const float> values)>;

/// Read-only store over memory-mapped shards; safe for concurrent readers.
class EmbeddingStore {
 public:
  static EmbeddingStore open(const std::filesystem::path& dir);
  EmbeddingStore(EmbeddingStore&&) noexcept;
  EmbeddingStore& operator=(EmbeddingStore&&) noexcept;
  ~EmbeddingStore();

  const Manifest& manifest() const noexcept { return manifest_; }
  std::size_t dim() const noexcept { return manifest_.dim; }
  std::uint64_t size() const noexcept { return manifest_.record_count; }

  std::optional<std::vector<float>> get(std::string_view key) const;
  std::optional<EmbeddingVector> get_embedding(const VariantKey& key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }
  void scan(const KeyRange& range, const ScanFn& fn) const;

  /// Checks every shard eagerly; returns human-readable problems (empty = ok).
  std::vector<std::string> verify() const;

 private:
  EmbeddingStore() = default;
  struct Shard;
  const Shard& shard(std::size_t index) const;
  std::string key_at(const Shard& s, std::uint64_t i) const;
  void values_at(const Shard& s, std::uint64_t i, float* out) const;

  std::filesystem::path dir_;
  Manifest manifest_;
  std::vector<std::string> shard_last_order_;
  std::vector<std::unique_ptr<Shard>> shards_;
};

enum class ExportFormat { Jsonl, Tsv };
ExportFormat parse_export_format(std::string_view text);

/// Writes every record in store order; returns the record count.
std::uint64_t export_store(const EmbeddingStore& store, std::ostream& out, ExportFormat format);

struct ImportOptions {
  std::string model_id = "imported";
  WriteOptions write;
};

/// Reads {"key", "values"} JSON lines (any order) into a new store.
Manifest import_jsonl(std::istream& in, const std::filesystem::path& dir, ImportOptions options = {});

}  // namespace varembed::store
