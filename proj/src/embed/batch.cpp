#include "varembed/embed/batch.hpp"

#include "varembed/core/errors.hpp"

namespace varembed::embed {

BatchPlan plan_batches(const std::vector<AnnotationText>& annotations, BatchLimits limits) {
  if (limits.max_items == 0 || limits.max_tokens == 0) {
    throw PreconditionError("batch limits must be positive");
  }
  BatchPlan plan;
  plan.limits = limits;
  plan.items = annotations.size();
  std::size_t begin = 0;
  std::uint64_t tokens = 0;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::uint64_t t = annotations[i].token_count;
    if (i > begin && (i - begin + 1 > limits.max_items || tokens + t > limits.max_tokens)) {
      plan.batches.push_back({begin, i, tokens, false});
      begin = i;
      tokens = 0;
    }
    if (i == begin && t > limits.max_tokens) {
      plan.batches.push_back({i, i + 1, t, true});
      begin = i + 1;
      continue;
    }
    tokens += t;
  }
  if (begin < annotations.size()) plan.batches.push_back({begin, annotations.size(), tokens, false});
  return plan;
}

}  // namespace varembed::embed
