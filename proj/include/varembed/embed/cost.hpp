#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

namespace varembed::embed {

/// Price in integer micro-USD per million tokens (numerically equal to
/// pico-USD per token), so estimates are exact integer arithmetic.
struct UnitPrice {
  std::uint64_t micro_usd_per_million = 65'000;  // 0.065 USD / 1M tokens

  /// Parses a decimal USD-per-million-tokens string such as "0.13".
  static UnitPrice parse_usd_per_million(std::string_view text);
  std::string usd_per_million() const;
};

struct CostEstimate {
  std::uint64_t tokens = 0;
  UnitPrice price;
  unsigned __int128 pico_usd = 0;

  /// Exact decimal rendering, e.g. "8.677500000000".
  std::string usd() const;
  nlohmann::json to_json() const;
};

/// tokens × unit price, exactly.
CostEstimate estimate_cost(std::uint64_t tokens, UnitPrice price = {});

}  // namespace varembed::embed
