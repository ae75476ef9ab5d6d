#include "varembed/core/variant_key.hpp"

#include <array>
#include <charconv>

#include "varembed/core/errors.hpp"

namespace varembed {
namespace {

constexpr std::array<std::string_view, Chromosome::kCount> kLabels = {
    "1",  "2",  "3",  "4",  "5",  "6",  "7",  "8",  "9",  "10", "11", "12", "13",
    "14", "15", "16", "17", "18", "19", "20", "21", "22", "X",  "Y",  "MT"};

bool iequals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'a' && x <= 'z') x = static_cast<char>(x - 'a' + 'A');
    if (y >= 'a' && y <= 'z') y = static_cast<char>(y - 'a' + 'A');
    if (x != y) return false;
  }
  return true;
}

std::optional<int> rank_of(std::string_view label) noexcept {
  if (label.size() > 3 && iequals(label.substr(0, 3), "chr")) label.remove_prefix(3);
  if (label.empty()) return std::nullopt;
  if (iequals(label, "M") || iequals(label, "MT")) return 24;
  if (iequals(label, "X")) return 22;
  if (iequals(label, "Y")) return 23;
  // Plain decimal 1-22 without leading zeros.
  if (label.size() > 2 || label[0] == '0') return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), value);
  if (ec != std::errc{} || ptr != label.data() + label.size()) return std::nullopt;
  if (value < 1 || value > 22) return std::nullopt;
  return value - 1;
}

}  // namespace

std::optional<Chromosome> Chromosome::try_from_label(std::string_view label) noexcept {
  if (auto r = rank_of(label)) return Chromosome(*r);
  return std::nullopt;
}

Chromosome Chromosome::from_label(std::string_view label) {
  if (label.empty()) throw PreconditionError("empty chromosome label");
  if (auto r = rank_of(label)) return Chromosome(*r);
  throw UnknownChromosome(std::string(label));
}

Chromosome Chromosome::from_rank(int rank) {
  if (rank < 0 || rank >= kCount) throw UnknownChromosome("rank " + std::to_string(rank));
  return Chromosome(rank);
}

std::string_view Chromosome::label() const noexcept { return kLabels[rank_]; }

std::string normalize_chromosome(std::string_view label) {
  return std::string(Chromosome::from_label(label).label());
}

bool is_valid_rsid(std::string_view rsid) noexcept {
  if (rsid.size() < 3 || rsid[0] != 'r' || rsid[1] != 's') return false;
  for (std::size_t i = 2; i < rsid.size(); ++i) {
    if (rsid[i] < '0' || rsid[i] > '9') return false;
  }
  return true;
}

bool is_valid_allele(std::string_view allele) noexcept {
  if (allele.empty()) return false;
  for (char c : allele) {
    if (c != 'A' && c != 'C' && c != 'G' && c != 'T') return false;
  }
  return true;
}

VariantKey::VariantKey(Chromosome chromosome, std::uint32_t position, std::string ref,
                       std::string alt, std::optional<std::string> rsid)
    : chromosome_(chromosome),
      position_(position),
      ref_(std::move(ref)),
      alt_(std::move(alt)),
      rsid_(std::move(rsid)) {
  if (position_ < 1) throw InvalidVariant("position must be >= 1");
  if (!is_valid_allele(ref_)) throw InvalidVariant("bad reference allele '" + ref_ + "'");
  if (!is_valid_allele(alt_)) throw InvalidVariant("bad alternate allele '" + alt_ + "'");
  if (ref_ == alt_) throw InvalidVariant("reference equals alternate allele '" + ref_ + "'");
  if (rsid_ && !is_valid_rsid(*rsid_)) throw InvalidVariant("bad rsID '" + *rsid_ + "'");
}

VariantKey VariantKey::make(std::string_view chromosome, std::uint32_t position,
                            std::string_view ref, std::string_view alt,
                            std::optional<std::string> rsid) {
  return VariantKey(Chromosome::from_label(chromosome), position, std::string(ref),
                    std::string(alt), std::move(rsid));
}

VariantKey VariantKey::parse(std::string_view text) {
  std::array<std::string_view, 4> parts;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    auto dash = text.find('-', start);
    if (dash == std::string_view::npos) {
      throw InvalidVariant("expected CHROM-POS-REF-ALT, got '" + std::string(text) + "'");
    }
    parts[i] = text.substr(start, dash - start);
    start = dash + 1;
  }
  parts[3] = text.substr(start);
  std::uint32_t pos = 0;
  auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), pos);
  if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size() || parts[1].empty()) {
    throw InvalidVariant("bad position in '" + std::string(text) + "'");
  }
  return make(parts[0], pos, parts[2], parts[3]);
}

std::optional<VariantKey> VariantKey::try_parse(std::string_view text) noexcept {
  try {
    return parse(text);
  } catch (...) {
    return std::nullopt;
  }
}

VariantKey VariantKey::flipped() const {
  return VariantKey(chromosome_, position_, alt_, ref_, rsid_);
}

VariantKey VariantKey::with_rsid(std::optional<std::string> rsid) const {
  return VariantKey(chromosome_, position_, ref_, alt_, std::move(rsid));
}

std::string VariantKey::to_string() const {
  std::string out;
  out.reserve(16 + ref_.size() + alt_.size());
  out.append(chromosome_.label());
  out.push_back('-');
  out.append(std::to_string(position_));
  out.push_back('-');
  out.append(ref_);
  out.push_back('-');
  out.append(alt_);
  return out;
}

std::string VariantKey::sort_bytes() const {
  std::string out;
  out.reserve(7 + ref_.size() + alt_.size());
  out.push_back(static_cast<char>(chromosome_.rank()));
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((position_ >> shift) & 0xff));
  }
  out.append(ref_);
  out.push_back('\0');
  out.append(alt_);
  out.push_back('\0');
  return out;
}

std::strong_ordering operator<=>(const VariantKey& a, const VariantKey& b) noexcept {
  if (auto c = a.chromosome_ <=> b.chromosome_; c != 0) return c;
  if (auto c = a.position_ <=> b.position_; c != 0) return c;
  if (auto c = a.ref_.compare(b.ref_); c != 0) return c <=> 0;
  return a.alt_.compare(b.alt_) <=> 0;
}

std::size_t VariantKeyHash::operator()(const VariantKey& key) const noexcept {
  std::size_t h = std::hash<std::string>{}(key.ref());
  h ^= std::hash<std::string>{}(key.alt()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  std::uint64_t site = (static_cast<std::uint64_t>(key.chromosome().rank()) << 32) | key.position();
  h ^= std::hash<std::uint64_t>{}(site) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace varembed
