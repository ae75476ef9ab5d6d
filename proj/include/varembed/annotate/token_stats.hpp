#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <vector>

namespace varembed::annotate {

struct HistogramBin {
  std::uint64_t bin_start = 0;
  std::uint64_t bin_end = 0;  // exclusive
  std::uint64_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct TokenStats {
  std::uint64_t count = 0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<HistogramBin> histogram;

  nlohmann::json to_json() const;
};

/// Streaming mean/variance (Welford) with associative merge (Chan et al.).
class TokenStatsAccumulator {
 public:
  /// Throws PreconditionError when bin_width is 0.
  explicit TokenStatsAccumulator(std::uint64_t bin_width = 10);

  void add(std::uint64_t tokens);
  void merge(const TokenStatsAccumulator& other);
  std::uint64_t count() const noexcept { return n_; }
  /// Throws EmptyCorpus when nothing was added.
  TokenStats finish() const;

 private:
  std::uint64_t bin_width_;
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::uint64_t min_ = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t max_ = 0;
  std::map<std::uint64_t, std::uint64_t> bins_;
};

TokenStats summarize_tokens(const std::vector<std::uint64_t>& counts, std::uint64_t bin_width = 10);

}  // namespace varembed::annotate
