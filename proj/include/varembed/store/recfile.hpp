#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

namespace varembed::store {

/// Typed intermediate record files passed between pipeline stages.
///
/// Layout (little-endian):
///   "VERECFIL" | u32 version | u32 kind
///   frames: u32 payload_len | payload (CBOR) | u32 low half of xxh64(payload)
///
/// Writers publish atomically: data goes to "<path>.partial" and is renamed
/// on close(), so a crashed stage never leaves a complete-looking file.
enum class RecordKind : std::uint32_t {
  Generic = 0,
  Favor = 1,
  ClinVar = 2,
  Gwas = 3,
  Joined = 4,
};

std::string_view to_string(RecordKind kind) noexcept;

class RecordWriter {
 public:
  RecordWriter(std::filesystem::path path, RecordKind kind);
  ~RecordWriter();
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  void write(const nlohmann::json& record);
  void write_bytes(std::string_view payload);
  /// Flushes and publishes the file. Without close() the partial file is removed.
  void close();
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  std::ofstream out_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

class RecordReader {
 public:
  explicit RecordReader(const std::filesystem::path& path,
                        std::optional<RecordKind> expected = std::nullopt);

  RecordKind kind() const noexcept { return kind_; }
  bool next(nlohmann::json& record);
  bool next_bytes(std::string& payload);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  RecordKind kind_ = RecordKind::Generic;
  std::uint64_t index_ = 0;
};

}  // namespace varembed::store
