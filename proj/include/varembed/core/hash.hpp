#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace varembed {

/// XXH64, bit-compatible with the reference implementation.
std::uint64_t xxh64(const void* data, std::size_t size, std::uint64_t seed = 0) noexcept;

inline std::uint64_t xxh64(std::string_view bytes, std::uint64_t seed = 0) noexcept {
  return xxh64(bytes.data(), bytes.size(), seed);
}

/// Streaming XXH64 for files too large to hash in one call.
class Xxh64Stream {
 public:
  explicit Xxh64Stream(std::uint64_t seed = 0) noexcept;
  void update(const void* data, std::size_t size) noexcept;
  std::uint64_t digest() const noexcept;

 private:
  std::uint64_t v_[4];
  std::uint64_t seed_;
  std::uint64_t total_ = 0;
  unsigned char buffer_[32];
  std::size_t buffered_ = 0;
};

}  // namespace varembed
