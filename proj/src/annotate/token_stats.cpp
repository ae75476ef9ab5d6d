#include "varembed/annotate/token_stats.hpp"

#include <algorithm>
#include <cmath>

#include "varembed/core/errors.hpp"

namespace varembed::annotate {

nlohmann::json TokenStats::to_json() const {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : histogram) bins.push_back({b.bin_start, b.bin_end, b.count});
  return nlohmann::json{{"count", count}, {"min", min}, {"max", max},
                        {"mean", mean},   {"std", std}, {"histogram", bins}};
}

TokenStatsAccumulator::TokenStatsAccumulator(std::uint64_t bin_width) : bin_width_(bin_width) {
  if (bin_width == 0) throw PreconditionError("bin_width must be >= 1");
}

void TokenStatsAccumulator::add(std::uint64_t tokens) {
  ++n_;
  const double x = static_cast<double>(tokens);
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
  min_ = std::min(min_, tokens);
  max_ = std::max(max_, tokens);
  ++bins_[tokens / bin_width_];
}

void TokenStatsAccumulator::merge(const TokenStatsAccumulator& other) {
  if (other.bin_width_ != bin_width_) throw PreconditionError("merging stats with different bin widths");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
  for (const auto& [bin, c] : other.bins_) bins_[bin] += c;
}

TokenStats TokenStatsAccumulator::finish() const {
  if (n_ == 0) throw EmptyCorpus("no annotations to summarize");
  TokenStats s;
  s.count = n_;
  s.min = min_;
  s.max = max_;
  s.mean = std::clamp(mean_, static_cast<double>(min_), static_cast<double>(max_));
  s.std = std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_)));
  const std::uint64_t last = max_ / bin_width_;
  for (std::uint64_t b = 0; b <= last; ++b) {
    auto it = bins_.find(b);
    s.histogram.push_back({b * bin_width_, (b + 1) * bin_width_, it == bins_.end() ? 0 : it->second});
  }
  return s;
}

TokenStats summarize_tokens(const std::vector<std::uint64_t>& counts, std::uint64_t bin_width) {
  TokenStatsAccumulator acc(bin_width);
  for (auto c : counts) acc.add(c);
  return acc.finish();
}

}  // namespace varembed::annotate
