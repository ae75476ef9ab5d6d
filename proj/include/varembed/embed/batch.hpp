#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varembed/core/types.hpp"

namespace varembed::embed {

struct BatchLimits {
  std::size_t max_items = 256;
  std::uint64_t max_tokens = 8192;
};

/// Half-open index range into the planned annotation list.
struct Batch {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::uint64_t tokens = 0;
  /// Single item larger than max_tokens, passed through untruncated.
  bool oversize = false;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Batch&, const Batch&) = default;
};

struct BatchPlan {
  BatchLimits limits;
  std::vector<Batch> batches;
  std::size_t items = 0;
};

/// Greedy in-order packing: a batch closes when the next item would break
/// either limit. Throws PreconditionError on zero limits.
BatchPlan plan_batches(const std::vector<AnnotationText>& annotations, BatchLimits limits);

}  // namespace varembed::embed
