#include "varembed/ingest/schema.hpp"

#include <array>
#include <fstream>

#include "varembed/core/errors.hpp"

namespace varembed::ingest {
namespace {

constexpr std::array<std::pair<Field, std::string_view>, 18> kFieldNames = {{
    {Field::Chromosome, "chromosome"},
    {Field::Position, "position"},
    {Field::Ref, "ref"},
    {Field::Alt, "alt"},
    {Field::Rsid, "rsid"},
    {Field::GencodeCategory, "gencode_category"},
    {Field::GencodeInfo, "gencode_info"},
    {Field::MetaSvm, "metasvm"},
    {Field::CaddPhred, "cadd_phred"},
    {Field::Cage, "cage"},
    {Field::GeneHancer, "genehancer"},
    {Field::Rdhs, "rdhs"},
    {Field::ClinicalSignificance, "clinical_significance"},
    {Field::Conditions, "conditions"},
    {Field::ReviewStatus, "review_status"},
    {Field::Trait, "trait"},
    {Field::PValue, "p_value"},
    {Field::StudyRef, "study_ref"},
}};

Field parse_field(std::string_view name) {
  for (const auto& [field, text] : kFieldNames) {
    if (text == name) return field;
  }
  throw ConfigError("unknown logical field '" + std::string(name) + "'");
}

char parse_delimiter(const std::string& text) {
  if (text == "\\t" || text == "tab") return '\t';
  if (text.size() != 1) throw ConfigError("delimiter must be a single byte");
  return text[0];
}

}  // namespace

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::Favor: return "favor";
    case SourceKind::ClinVar: return "clinvar";
    case SourceKind::GwasCatalog: return "gwas";
  }
  return "favor";
}

SourceKind parse_source_kind(std::string_view text) {
  if (text == "favor") return SourceKind::Favor;
  if (text == "clinvar") return SourceKind::ClinVar;
  if (text == "gwas" || text == "gwas_catalog") return SourceKind::GwasCatalog;
  throw ConfigError("unknown source kind '" + std::string(text) + "'");
}

std::string_view to_string(Field field) noexcept {
  for (const auto& [f, text] : kFieldNames) {
    if (f == field) return text;
  }
  return "?";
}

std::vector<Field> mandatory_fields(SourceKind kind) {
  switch (kind) {
    case SourceKind::Favor:
      return {Field::Chromosome, Field::Position, Field::Ref, Field::Alt, Field::GencodeCategory,
              Field::GencodeInfo};
    case SourceKind::ClinVar:
      return {Field::Chromosome, Field::Position, Field::Ref, Field::Alt,
              Field::ClinicalSignificance, Field::ReviewStatus};
    case SourceKind::GwasCatalog:
      return {Field::Trait};
  }
  return {};
}

void SourceSchema::validate() const {
  for (Field f : mandatory_fields(source_kind)) {
    if (!column_map.contains(f)) {
      throw ConfigError(std::string(to_string(source_kind)) + " schema lacks mandatory field '" +
                        std::string(to_string(f)) + "'");
    }
  }
  if (source_kind == SourceKind::GwasCatalog) {
    int positional = 0;
    for (Field f : {Field::Chromosome, Field::Position, Field::Ref, Field::Alt}) {
      positional += column_map.contains(f) ? 1 : 0;
    }
    if (positional != 0 && positional != 4) {
      throw ConfigError("gwas schema must map all or none of chromosome/position/ref/alt");
    }
    if (positional == 0 && !column_map.contains(Field::Rsid)) {
      throw ConfigError("gwas schema needs rsid or positional columns");
    }
  }
  if (!has_header) {
    for (const auto& [field, ref] : column_map) {
      if (std::holds_alternative<std::string>(ref)) {
        throw ConfigError("column '" + std::string(to_string(field)) +
                          "' referenced by name but schema has no header");
      }
    }
  }
  if (position_base != 0 && position_base != 1) throw ConfigError("position_base must be 0 or 1");
}

SourceSchema SourceSchema::from_json(const nlohmann::json& j) {
  SourceSchema s;
  try {
    s.source_kind = parse_source_kind(j.at("source_kind").get<std::string>());
    s.delimiter = parse_delimiter(j.value("delimiter", std::string("\t")));
    s.has_header = j.value("has_header", true);
    s.list_separator = parse_delimiter(j.value("list_separator", std::string("|")));
    s.position_base = j.value("position_base", 1);
    for (const auto& [name, ref] : j.at("columns").items()) {
      if (ref.is_number_unsigned()) {
        s.column_map[parse_field(name)] = ref.get<std::size_t>();
      } else {
        s.column_map[parse_field(name)] = ref.get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad schema: ") + e.what());
  }
  s.validate();
  return s;
}

SourceSchema SourceSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("schema " + path.string() + ": " + e.what());
  }
}

nlohmann::json SourceSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::object();
  for (const auto& [field, ref] : column_map) {
    if (auto* idx = std::get_if<std::size_t>(&ref)) {
      cols[std::string(to_string(field))] = *idx;
    } else {
      cols[std::string(to_string(field))] = std::get<std::string>(ref);
    }
  }
  return {{"source_kind", to_string(source_kind)},
          {"delimiter", delimiter == '\t' ? std::string("\\t") : std::string(1, delimiter)},
          {"has_header", has_header},
          {"list_separator", std::string(1, list_separator)},
          {"position_base", position_base},
          {"columns", cols}};
}

}  // namespace varembed::ingest
