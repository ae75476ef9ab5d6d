#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "varembed/core/types.hpp"

namespace varembed::ingest {

/// Maps ClinVar review-status wording onto star tiers 0-4. Loaded from a data
/// file so upstream wording changes need no code change.
class ReviewTierTable {
 public:
  static ReviewTierTable load(const std::filesystem::path& path);
  static ReviewTierTable parse(std::istream& in);
  /// data/clinvar_review_tiers.tsv from the data directory.
  static ReviewTierTable load_default();

  std::optional<ReviewStatus> lookup(std::string_view status) const;
  std::size_t size() const noexcept { return tiers_.size(); }
  const std::map<std::string, int>& entries() const noexcept { return tiers_; }

  /// Lowercase, "_" -> " ", whitespace runs collapsed, trimmed.
  static std::string normalize(std::string_view status);

 private:
  std::map<std::string, int> tiers_;
};

/// Directory holding shipped data files; $VAREMBED_DATA_DIR overrides the
/// compiled-in default.
std::filesystem::path data_dir();

}  // namespace varembed::ingest
