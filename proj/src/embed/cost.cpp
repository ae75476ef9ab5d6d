#include "varembed/embed/cost.hpp"

#include <cstdio>

#include "varembed/core/errors.hpp"

namespace varembed::embed {
namespace {

std::string u128_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

/// Renders `value` scaled down by 10^decimals, with all decimals kept.
std::string fixed_point(unsigned __int128 value, int decimals) {
  auto digits = u128_to_string(value);
  if (digits.size() <= static_cast<std::size_t>(decimals)) {
    digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
  return digits;
}

}  // namespace

UnitPrice UnitPrice::parse_usd_per_million(std::string_view text) {
  const auto fail = [&] {
    throw ConfigError("unit price must be a decimal USD amount with at most 6 fractional digits: '" +
                      std::string(text) + "'");
  };
  if (text.empty()) fail();
  std::uint64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool dot = false, any = false;
  for (char c : text) {
    if (c == '.') {
      if (dot) fail();
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') fail();
    any = true;
    if (dot) {
      if (++frac_digits > 6) fail();
      frac = frac * 10 + static_cast<std::uint64_t>(c - '0');
    } else {
      if (whole > 1'000'000'000ULL) fail();
      whole = whole * 10 + static_cast<std::uint64_t>(c - '0');
    }
  }
  if (!any) fail();
  for (int i = frac_digits; i < 6; ++i) frac *= 10;
  return UnitPrice{whole * 1'000'000ULL + frac};
}

std::string UnitPrice::usd_per_million() const { return fixed_point(micro_usd_per_million, 6); }

std::string CostEstimate::usd() const { return fixed_point(pico_usd, 12); }

nlohmann::json CostEstimate::to_json() const {
  return {{"tokens", tokens},
          {"usd_per_million_tokens", price.usd_per_million()},
          {"pico_usd", u128_to_string(pico_usd)},
          {"usd", usd()}};
}

CostEstimate estimate_cost(std::uint64_t tokens, UnitPrice price) {
  CostEstimate c;
  c.tokens = tokens;
  c.price = price;
  c.pico_usd = static_cast<unsigned __int128>(tokens) * price.micro_usd_per_million;
  return c;
}

}  // namespace varembed::embed
