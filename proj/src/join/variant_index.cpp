#include "varembed/join/variant_index.hpp"

#include <algorithm>
#include <numeric>

#include "varembed/core/errors.hpp"

namespace varembed::join {

VariantIndex VariantIndex::build(const Source<ingest::FavorRecord>& favor, BuildOptions options) {
  VariantIndex index;
  ingest::FavorRecord record{VariantKey::make("1", 1, "A", "C"), {}};
  std::optional<VariantKey> previous;
  while (favor(record)) {
    if (options.sorted && previous && record.key < *previous) {
      throw UnsortedInput(record.key.to_string() + " after " + previous->to_string());
    }
    previous = record.key;
    index.insert(record, options.strict);
  }
  index.finish();
  return index;
}

VariantIndex VariantIndex::build(const std::vector<ingest::FavorRecord>& favor,
                                 BuildOptions options) {
  return build(from_vector(favor), options);
}

void VariantIndex::insert(ingest::FavorRecord record, bool strict) {
  auto [it, inserted] = positional_.try_emplace(record.key, records_.size());
  if (inserted) {
    if (record.key.rsid()) by_rsid_[*record.key.rsid()].push_back(record.key);
    records_.push_back(std::move(record));
    return;
  }
  if (strict) throw DuplicateKey(record.key.to_string());
  ++duplicates_;
  auto& slot = records_[it->second];
  if (slot.key.rsid() != record.key.rsid()) {
    if (slot.key.rsid()) {
      auto& keys = by_rsid_[*slot.key.rsid()];
      keys.erase(std::remove(keys.begin(), keys.end(), slot.key), keys.end());
      if (keys.empty()) by_rsid_.erase(*slot.key.rsid());
    }
    if (record.key.rsid()) by_rsid_[*record.key.rsid()].push_back(record.key);
  }
  slot = std::move(record);
}

void VariantIndex::finish() {
  order_.resize(records_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(),
            [this](std::size_t a, std::size_t b) { return records_[a].key < records_[b].key; });
  for (auto& [rsid, keys] : by_rsid_) std::sort(keys.begin(), keys.end());
}

std::optional<std::size_t> VariantIndex::find(const VariantKey& key) const {
  auto it = positional_.find(key);
  if (it == positional_.end()) return std::nullopt;
  return it->second;
}

const std::vector<VariantKey>& VariantIndex::keys_for_rsid(const std::string& rsid) const {
  static const std::vector<VariantKey> kEmpty;
  auto it = by_rsid_.find(rsid);
  return it == by_rsid_.end() ? kEmpty : it->second;
}

std::string_view to_string(MatchKind kind) noexcept {
  switch (kind) {
    case MatchKind::Direct: return "direct";
    case MatchKind::Flipped: return "flipped";
    case MatchKind::None: return "none";
  }
  return "none";
}

MatchResult match_with_flip(const VariantKey& query,
                            const std::function<bool(const VariantKey&)>& contains) {
  if (contains(query)) return {MatchKind::Direct, query};
  VariantKey flipped = query.flipped();
  if (contains(flipped)) return {MatchKind::Flipped, std::move(flipped)};
  return {};
}

MatchResult match_with_flip(const VariantKey& query, const VariantIndex& index) {
  if (auto offset = index.find(query)) return {MatchKind::Direct, index.record(*offset).key};
  if (auto offset = index.find(query.flipped())) {
    return {MatchKind::Flipped, index.record(*offset).key};
  }
  return {};
}

}  // namespace varembed::join
