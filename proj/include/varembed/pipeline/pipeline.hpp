#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varembed/embed/batch.hpp"
#include "varembed/store/store.hpp"

namespace varembed::pipeline {

struct PipelineConfig {
  std::filesystem::path favor, clinvar, gwas;
  // Empty: the bundled schema for that source.
  std::filesystem::path favor_schema, clinvar_schema, gwas_schema;
  std::optional<std::filesystem::path> review_tiers;
  std::optional<std::filesystem::path> template_config;
  std::string tokenizer = "ws";
  std::string backend = "informative:dim=128";
  std::filesystem::path work_dir;
  std::filesystem::path store_dir;  // empty: <work_dir>/store

  bool strict = false;
  bool external_join = false;
  bool partition_by_chrom = false;
  std::size_t threads = 1;

  embed::BatchLimits limits;
  std::size_t inflight = 4;
  bool journal = true;
  std::uint64_t records_per_shard = store::kDefaultRecordsPerShard;
  std::uint64_t bin_width = 10;

  std::vector<std::string> eval_tasks = {"chromosome"};
  std::size_t n_train = 10000;
  std::uint64_t seed = 42;
  std::size_t trees = 100;
  std::size_t max_depth = 16;

  /// Optional aggregate stage.
  std::optional<std::filesystem::path> dosages;
  std::optional<std::filesystem::path> dosage_keys;
  std::string missing_policy = "skip";

  /// Throws ConfigError for missing input files or bad values; nothing runs.
  void validate() const;
  std::filesystem::path resolved_store_dir() const;
};

struct RunResult {
  int exit_code = 0;
  /// Deterministic for a fixed config: no wall-clock data.
  nlohmann::json report;
  /// Per-stage wall-clock seconds.
  nlohmann::json timings;
};

/// ingest -> join -> annotate -> embed -> [aggregate] -> eval. Stage outputs
/// land in work_dir; run_report.json and run_timings.json are written there
/// even when a stage fails (partial report with "error").
RunResult run_pipeline(const PipelineConfig& config);

}  // namespace varembed::pipeline
