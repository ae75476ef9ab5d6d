#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>

#include "varembed/core/types.hpp"
#include "varembed/join/variant_index.hpp"

namespace varembed::join {

struct SourceMatchCounts {
  std::uint64_t total = 0;
  std::uint64_t direct = 0;
  std::uint64_t flipped = 0;
  /// rsID-only rows that resolved through the rsID index (GWAS only).
  std::uint64_t via_rsid = 0;
  std::uint64_t unmatched = 0;

  std::uint64_t matched() const noexcept { return direct + flipped + via_rsid; }
  nlohmann::json to_json() const;
  friend bool operator==(const SourceMatchCounts&, const SourceMatchCounts&) = default;
};

struct JoinReport {
  std::uint64_t favor_records = 0;
  std::uint64_t favor_duplicates = 0;
  std::uint64_t joined = 0;
  SourceMatchCounts clinvar;
  SourceMatchCounts gwas;
  /// Same-trait associations collapsed onto one variant.
  std::uint64_t gwas_duplicates_collapsed = 0;

  nlohmann::json to_json() const;
  friend bool operator==(const JoinReport&, const JoinReport&) = default;
};

using JoinSink = std::function<void(JoinedVariant&&)>;

struct JoinOptions {
  /// Assemble chromosome partitions in parallel; output order is unchanged.
  bool partition_by_chrom = false;
  std::size_t threads = 1;
};

/// Attachment ordering shared by every join path: ClinVar by review tier
/// descending, then significance, conditions and status text; GWAS by trait,
/// then p-value (missing last), then study. Duplicate traits keep the
/// strongest association. Returns the number of associations collapsed.
std::uint64_t canonicalize_attachments(JoinedVariant& variant);

/// Left join anchored on FAVOR; emits one JoinedVariant per indexed key in
/// canonical order.
JoinReport join_sources(const VariantIndex& favor, const Source<ingest::ClinVarRow>& clinvar,
                        const Source<ingest::GwasRow>& gwas, const JoinSink& sink,
                        JoinOptions options = {});

struct ExternalJoinOptions {
  std::filesystem::path tmp_dir = std::filesystem::temp_directory_path();
  /// Per-sorter memory budget before spilling a run.
  std::size_t max_run_bytes = 64u << 20;
  bool strict = false;
};

/// Sort-merge join over record files (see store::RecordReader); same contract
/// and output as join_sources, with memory bounded by the run budget.
JoinReport join_sources_external(const std::filesystem::path& favor_records,
                                 const std::filesystem::path& clinvar_records,
                                 const std::filesystem::path& gwas_records, const JoinSink& sink,
                                 ExternalJoinOptions options = {});

}  // namespace varembed::join
