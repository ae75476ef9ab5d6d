#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>
#include <vector>

namespace varembed::ingest {

enum class SourceKind { Favor, ClinVar, GwasCatalog };

std::string_view to_string(SourceKind kind) noexcept;
SourceKind parse_source_kind(std::string_view text);

/// Logical fields understood by the parsers. Unmapped physical columns are
/// ignored (pass-through).
enum class Field {
  Chromosome,
  Position,
  Ref,
  Alt,
  Rsid,
  GencodeCategory,
  GencodeInfo,
  MetaSvm,
  CaddPhred,
  Cage,
  GeneHancer,
  Rdhs,
  ClinicalSignificance,
  Conditions,
  ReviewStatus,
  Trait,
  PValue,
  StudyRef,
};

std::string_view to_string(Field field) noexcept;

/// A column is named by header text or by 0-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

struct SourceSchema {
  SourceKind source_kind = SourceKind::Favor;
  std::map<Field, ColumnRef> column_map;
  char delimiter = '\t';
  bool has_header = true;
  /// Separator inside multi-valued cells (ClinVar conditions).
  char list_separator = '|';
  /// 0 for 0-based input coordinates; converted to 1-based at parse time.
  int position_base = 1;

  /// Throws ConfigError if a mandatory field for source_kind is unmapped.
  void validate() const;

  static SourceSchema from_json(const nlohmann::json& j);
  static SourceSchema load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Mandatory logical fields per source kind.
std::vector<Field> mandatory_fields(SourceKind kind);

}  // namespace varembed::ingest
