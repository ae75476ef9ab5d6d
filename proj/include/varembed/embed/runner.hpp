#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "varembed/embed/backend.hpp"
#include "varembed/embed/batch.hpp"
#include "varembed/store/store.hpp"

namespace varembed::embed {

struct EmbedOptions {
  BatchLimits limits;
  std::size_t inflight = 4;
  std::optional<std::filesystem::path> journal;
  store::WriteOptions write;
  /// Called after each committed batch with (committed, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct EmbedReport {
  std::size_t batches = 0;
  std::size_t resumed_batches = 0;
  std::size_t oversize_batches = 0;
  std::uint64_t records = 0;
  std::uint64_t tokens = 0;
  store::Manifest manifest;
};

/// Fingerprint binding a journal to (model, limits, keys, texts).
std::uint64_t plan_fingerprint(const std::vector<AnnotationText>& annotations, const BatchPlan& plan,
                               const Backend& backend);

/// Embeds annotations (which must be in canonical key order) into a store.
/// Up to `inflight` batches run concurrently; commits happen in plan order.
EmbedReport embed_to_store(const std::vector<AnnotationText>& annotations, Backend& backend,
                           const std::filesystem::path& store_dir, const EmbedOptions& options);

}  // namespace varembed::embed
