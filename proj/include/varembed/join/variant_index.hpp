#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "varembed/core/variant_key.hpp"
#include "varembed/ingest/parsers.hpp"

namespace varembed::join {

/// Pull source: fills the argument and returns true, or returns false at end.
template <typename T>
using Source = std::function<bool(T&)>;

template <typename T>
Source<T> from_vector(const std::vector<T>& items) {
  return [&items, i = std::size_t{0}](T& out) mutable {
    if (i >= items.size()) return false;
    out = items[i++];
    return true;
  };
}

struct IndexBuildOptions {
  /// Keys are promised in canonical order; violations raise UnsortedInput.
  bool sorted = false;
  /// Duplicate positional keys raise DuplicateKey instead of last-writer-wins.
  bool strict = false;
};

/// In-memory FAVOR index with positional and rsID lookup. Immutable (and
/// shareable across threads) once build() returns.
class VariantIndex {
 public:
  using BuildOptions = IndexBuildOptions;

  static VariantIndex build(const Source<ingest::FavorRecord>& favor, BuildOptions options);
  static VariantIndex build(const std::vector<ingest::FavorRecord>& favor,
                            BuildOptions options = {});

  std::optional<std::size_t> find(const VariantKey& key) const;
  bool contains(const VariantKey& key) const { return find(key).has_value(); }
  const ingest::FavorRecord& record(std::size_t offset) const { return records_[offset]; }
  /// Positional keys sharing `rsid`, in canonical order.
  const std::vector<VariantKey>& keys_for_rsid(const std::string& rsid) const;

  std::size_t size() const noexcept { return records_.size(); }
  std::uint64_t duplicates() const noexcept { return duplicates_; }
  /// Record offsets in canonical key order.
  const std::vector<std::size_t>& canonical_order() const noexcept { return order_; }

 private:
  void insert(ingest::FavorRecord record, bool strict);
  void finish();

  std::vector<ingest::FavorRecord> records_;
  std::unordered_map<VariantKey, std::size_t, VariantKeyHash> positional_;
  std::unordered_map<std::string, std::vector<VariantKey>> by_rsid_;
  std::vector<std::size_t> order_;
  std::uint64_t duplicates_ = 0;
};

enum class MatchKind { Direct, Flipped, None };

std::string_view to_string(MatchKind kind) noexcept;

struct MatchResult {
  MatchKind kind = MatchKind::None;
  /// The stored key; set unless kind == None.
  std::optional<VariantKey> key;
};

/// Direct if the exact key is present, else Flipped if the ref/alt-exchanged
/// key is present, else None.
MatchResult match_with_flip(const VariantKey& query,
                            const std::function<bool(const VariantKey&)>& contains);
MatchResult match_with_flip(const VariantKey& query, const VariantIndex& index);

}  // namespace varembed::join
