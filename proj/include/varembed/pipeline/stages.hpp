#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "varembed/annotate/template.hpp"
#include "varembed/annotate/token_stats.hpp"
#include "varembed/annotate/tokenizer.hpp"
#include "varembed/core/types.hpp"
#include "varembed/ingest/parsers.hpp"
#include "varembed/ingest/schema.hpp"
#include "varembed/join/join.hpp"

// File-to-file stage wrappers shared by the CLI subcommands and the pipeline
// driver, so each stage is replayable on its own.
namespace varembed::pipeline {

std::filesystem::path default_schema(ingest::SourceKind kind);

struct IngestStageOptions {
  bool strict = false;
  std::optional<std::filesystem::path> review_tiers;
};

/// Source table -> typed record file. Returns the skip report.
ingest::SkipReport ingest_file(ingest::SourceKind kind, const std::filesystem::path& schema,
                               const std::filesystem::path& input, const std::filesystem::path& out,
                               const IngestStageOptions& options = {});

struct JoinStageOptions {
  bool strict = false;
  bool partition_by_chrom = false;
  bool external = false;
  std::size_t threads = 1;
  std::filesystem::path tmp_dir = std::filesystem::temp_directory_path();
  std::size_t max_run_bytes = 64u << 20;
};

/// Record files -> joined record file.
join::JoinReport join_files(const std::filesystem::path& favor, const std::filesystem::path& clinvar,
                            const std::filesystem::path& gwas, const std::filesystem::path& out,
                            const JoinStageOptions& options = {});

std::vector<JoinedVariant> read_joined(const std::filesystem::path& path);

/// Joined record file -> annotation JSON-lines with token counts.
std::uint64_t annotate_file(const std::filesystem::path& joined, const annotate::TemplateConfig& config,
                            const annotate::Tokenizer& tokenizer, const std::filesystem::path& out);

std::vector<AnnotationText> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationText>& annotations);

annotate::TokenStats annotation_token_stats(const std::vector<AnnotationText>& annotations,
                                            std::uint64_t bin_width);

/// Sum of the "tokens" fields of an annotation file.
std::uint64_t total_tokens(const std::filesystem::path& annotations);

}  // namespace varembed::pipeline
