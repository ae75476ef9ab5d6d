#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace varembed {

/// One of the 25 canonical GRCh38 labels: 1-22, X, Y, MT.
/// Rank follows that order and defines the chromosome component of the
/// canonical variant ordering.
class Chromosome {
 public:
  static constexpr int kCount = 25;
  static constexpr int kAutosomes = 22;

  /// Accepts any alias ("chr5", "CHRX", "chrM", "M", ...). Throws
  /// UnknownChromosome for labels outside the canonical set.
  static Chromosome from_label(std::string_view label);
  static std::optional<Chromosome> try_from_label(std::string_view label) noexcept;
  static Chromosome from_rank(int rank);

  std::string_view label() const noexcept;
  int rank() const noexcept { return rank_; }
  bool is_autosome() const noexcept { return rank_ < kAutosomes; }

  friend bool operator==(Chromosome, Chromosome) = default;
  friend auto operator<=>(Chromosome, Chromosome) = default;

 private:
  explicit Chromosome(int rank) : rank_(static_cast<std::uint8_t>(rank)) {}
  std::uint8_t rank_ = 0;
};

/// Normalizes a raw chromosome label to its canonical form.
std::string normalize_chromosome(std::string_view label);

bool is_valid_rsid(std::string_view rsid) noexcept;
bool is_valid_allele(std::string_view allele) noexcept;

/// Canonical identity of a variant. Equality, hashing and ordering use the
/// positional part only; the rsID is advisory metadata.
class VariantKey {
 public:
  /// Validates all invariants; throws InvalidVariant (or UnknownChromosome).
  VariantKey(Chromosome chromosome, std::uint32_t position, std::string ref, std::string alt,
             std::optional<std::string> rsid = std::nullopt);

  static VariantKey make(std::string_view chromosome, std::uint32_t position, std::string_view ref,
                         std::string_view alt, std::optional<std::string> rsid = std::nullopt);

  /// Parses "CHROM-POS-REF-ALT".
  static VariantKey parse(std::string_view text);
  static std::optional<VariantKey> try_parse(std::string_view text) noexcept;

  Chromosome chromosome() const noexcept { return chromosome_; }
  std::uint32_t position() const noexcept { return position_; }
  const std::string& ref() const noexcept { return ref_; }
  const std::string& alt() const noexcept { return alt_; }
  const std::optional<std::string>& rsid() const noexcept { return rsid_; }

  bool is_snv() const noexcept { return ref_.size() == 1 && alt_.size() == 1; }
  bool is_indel() const noexcept { return !is_snv(); }

  /// Same site with ref and alt exchanged (rsID kept).
  VariantKey flipped() const;
  VariantKey with_rsid(std::optional<std::string> rsid) const;

  std::string to_string() const;

  /// Order-preserving byte encoding: memcmp order equals canonical order.
  std::string sort_bytes() const;

  friend bool operator==(const VariantKey& a, const VariantKey& b) noexcept {
    return a.chromosome_ == b.chromosome_ && a.position_ == b.position_ && a.ref_ == b.ref_ &&
           a.alt_ == b.alt_;
  }
  friend std::strong_ordering operator<=>(const VariantKey& a, const VariantKey& b) noexcept;

 private:
  Chromosome chromosome_;
  std::uint32_t position_;
  std::string ref_;
  std::string alt_;
  std::optional<std::string> rsid_;
};

struct VariantKeyHash {
  std::size_t operator()(const VariantKey& key) const noexcept;
};

}  // namespace varembed

template <>
struct std::hash<varembed::VariantKey> : varembed::VariantKeyHash {};
