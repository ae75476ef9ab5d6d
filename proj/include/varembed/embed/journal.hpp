#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

namespace varembed::embed {

/// Append-only checkpoint of completed batches, in plan order.
///
///   header: "VEJRNL01" | u64 plan fingerprint | u32 dim | u32 0
///   entry:  u32 batch index | u32 item count | count*dim f32 | u64 xxh64(entry so far)
///
/// A torn or corrupt tail (crash mid-append) is truncated on open.
class Journal {
 public:
  struct Entry {
    std::uint32_t batch = 0;
    std::vector<float> values;  // item-major, count * dim
  };

  /// Opens or creates. Throws ConfigError if an existing journal was written
  /// for a different plan or dim.
  Journal(std::filesystem::path path, std::uint64_t fingerprint, std::uint32_t dim);

  /// Completed entries recovered on open, in order (batch 0, 1, ...).
  const std::vector<Entry>& recovered() const noexcept { return recovered_; }
  std::uint64_t truncated_bytes() const noexcept { return truncated_; }

  void append(std::uint32_t batch, const std::vector<float>& values);

 private:
  std::filesystem::path path_;
  std::uint32_t dim_;
  std::vector<Entry> recovered_;
  std::uint64_t truncated_ = 0;
  std::ofstream out_;
};

}  // namespace varembed::embed
