#include "varembed/ingest/parsers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "varembed/core/errors.hpp"
#include "varembed/core/serialize.hpp"

namespace varembed::ingest {

using nlohmann::json;

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Chromosome read_chromosome(const TableReader& row) {
  auto text = row.get(Field::Chromosome);
  if (!text) throw MalformedRow("chromosome", "missing chromosome");
  auto chrom = Chromosome::try_from_label(*text);
  if (!chrom) throw MalformedRow("chromosome", "unknown chromosome '" + std::string(*text) + "'");
  return *chrom;
}

std::optional<std::string> read_rsid(const TableReader& row) {
  auto text = row.get(Field::Rsid);
  if (!text) return std::nullopt;
  // ClinVar's RS field carries the bare dbSNP number.
  if (!text->empty() && std::all_of(text->begin(), text->end(), [](char c) { return c >= '0' && c <= '9'; })) {
    if ((*text)[0] != '0') return "rs" + std::string(*text);
  }
  if (!is_valid_rsid(*text)) throw MalformedRow("rsid", "bad rsID '" + std::string(*text) + "'");
  return std::string(*text);
}

/// One key per alternate allele of the row.
std::vector<VariantKey> read_keys(const TableReader& row) {
  Chromosome chrom = read_chromosome(row);
  auto pos_text = row.get(Field::Position);
  if (!pos_text) throw MalformedRow("position", "missing position");
  std::uint32_t pos = parse_position(*pos_text, row.position_base());
  auto ref_text = row.get(Field::Ref);
  auto alt_text = row.get(Field::Alt);
  if (!ref_text || !alt_text) throw MalformedRow("allele", "missing allele");
  std::string ref = upper(*ref_text);
  if (!is_valid_allele(ref)) throw MalformedRow("allele", "bad reference allele '" + ref + "'");
  auto rsid = read_rsid(row);
  std::vector<VariantKey> keys;
  for (auto& alt_raw : split_alts(*alt_text)) {
    std::string alt = upper(alt_raw);
    if (!is_valid_allele(alt) || alt == ref) {
      throw MalformedRow("allele", "bad alternate allele '" + alt + "'");
    }
    keys.emplace_back(chrom, pos, ref, std::move(alt), rsid);
  }
  return keys;
}

std::optional<std::string> optional_text(const TableReader& row, Field field) {
  if (auto v = row.get(field)) return std::string(*v);
  return std::nullopt;
}

}  // namespace

std::uint32_t parse_position(std::string_view text, int position_base) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw MalformedRow("position", "unparsable position '" + std::string(text) + "'");
  }
  if (position_base == 0) ++value;
  if (value < 1 || value > 0xffffffffULL) {
    throw MalformedRow("position", "position out of range '" + std::string(text) + "'");
  }
  return static_cast<std::uint32_t>(value);
}

std::optional<double> parse_p_value(std::string_view text, bool& out_of_range) {
  out_of_range = false;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec == std::errc::result_out_of_range) {
    // Underflow ("1e-400"): positive but not representable; treat as out of range.
    out_of_range = true;
    return std::nullopt;
  }
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw MalformedRow("p_value", "unparsable p-value '" + std::string(text) + "'");
  }
  if (!(value > 0.0 && value <= 1.0)) {
    out_of_range = true;
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> split_alts(std::string_view alts) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = alts.find(',', start);
    out.emplace_back(trim(alts.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

json to_json(const FavorRecord& r) {
  json j = json::object();
  put_key(j, r.key);
  j["functional"] = r.functional;
  return j;
}

FavorRecord favor_from_json(const json& j) {
  return FavorRecord{get_key(j), j.at("functional").get<FunctionalAnnotation>()};
}

json to_json(const ClinVarRow& r) {
  json j = json::object();
  put_key(j, r.key);
  j["record"] = r.record;
  return j;
}

ClinVarRow clinvar_from_json(const json& j) {
  return ClinVarRow{get_key(j), j.at("record").get<ClinVarRecord>()};
}

json to_json(const GwasRow& r) {
  json j = json::object();
  j["key"] = r.key ? json(r.key->to_string()) : json(nullptr);
  j["rsid"] = r.rsid ? json(*r.rsid) : json(nullptr);
  j["association"] = r.association;
  return j;
}

GwasRow gwas_from_json(const json& j) {
  GwasRow r;
  if (!j.at("key").is_null()) r.key = VariantKey::parse(j.at("key").get<std::string>());
  if (!j.at("rsid").is_null()) r.rsid = j.at("rsid").get<std::string>();
  if (r.key) r.key = r.key->with_rsid(r.rsid);
  r.association = j.at("association").get<GwasAssociation>();
  return r;
}

json SkipReport::to_json() const {
  return json{{"total", total},     {"valid", valid},       {"skipped", skipped},
              {"records", records}, {"reasons", reasons},   {"warnings", warnings}};
}

// --- TableReader -----------------------------------------------------------

TableReader::TableReader(LineSource& source, const SourceSchema& schema)
    : source_(source), schema_(schema) {
  schema_.validate();
  if (!schema_.has_header) {
    for (const auto& [field, ref] : schema_.column_map) {
      std::size_t idx = std::get<std::size_t>(ref);
      columns_[field] = idx;
      expected_width_ = std::max(expected_width_, idx + 1);
    }
    header_done_ = true;
  }
}

void TableReader::read_header() {
  header_done_ = true;
  while (source_.next_line(line_)) {
    ++line_no_;
    if (line_.empty()) continue;
    std::string_view text = line_;
    // "#CHROM ..." style headers are accepted; a leading '#' is stripped.
    if (text[0] == '#') text.remove_prefix(1);
    std::vector<std::string> names;
    std::size_t start = 0;
    for (;;) {
      auto d = text.find(schema_.delimiter, start);
      names.emplace_back(trim(text.substr(start, d - start)));
      if (d == std::string_view::npos) break;
      start = d + 1;
    }
    for (const auto& [field, ref] : schema_.column_map) {
      if (auto* idx = std::get_if<std::size_t>(&ref)) {
        if (*idx >= names.size()) {
          throw ConfigError("column index " + std::to_string(*idx) + " beyond header width");
        }
        columns_[field] = *idx;
        continue;
      }
      const auto& name = std::get<std::string>(ref);
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError("header lacks column '" + name + "'");
      columns_[field] = static_cast<std::size_t>(it - names.begin());
    }
    expected_width_ = names.size();
    exact_width_ = true;
    return;
  }
}

bool TableReader::next_row() {
  if (!header_done_) read_header();
  while (source_.next_line(line_)) {
    ++line_no_;
    if (line_.empty() || line_[0] == '#') continue;
    cells_.clear();
    std::string_view text = line_;
    std::size_t start = 0;
    for (;;) {
      auto d = text.find(schema_.delimiter, start);
      cells_.push_back(text.substr(start, d - start));
      if (d == std::string_view::npos) break;
      start = d + 1;
    }
    return true;
  }
  return false;
}

void TableReader::check_width() const {
  if ((exact_width_ && cells_.size() != expected_width_) || cells_.size() < expected_width_) {
    throw MalformedRow("column_count", "expected " + std::to_string(expected_width_) +
                                           " columns, got " + std::to_string(cells_.size()));
  }
}

std::optional<std::string_view> TableReader::get(Field field) const {
  auto it = columns_.find(field);
  if (it == columns_.end() || it->second >= cells_.size()) return std::nullopt;
  std::string_view v = trim(cells_[it->second]);
  if (v.empty() || v == ".") return std::nullopt;
  return v;
}

// --- FAVOR -----------------------------------------------------------------

FavorParser::FavorParser(LineSource& source, const SourceSchema& schema, ParseOptions options)
    : RowParser(source, schema, options) {
  if (schema.source_kind != SourceKind::Favor) throw ConfigError("schema is not a favor schema");
}

FavorRecord FavorParser::make_empty() const {
  return FavorRecord{VariantKey::make("1", 1, "A", "C"), {}};
}

void FavorParser::parse_row(const TableReader& row, std::deque<FavorRecord>& out) {
  auto keys = read_keys(row);
  FunctionalAnnotation f;
  auto category_text = row.get(Field::GencodeCategory);
  if (!category_text) throw MalformedRow("gencode_category", "missing category");
  auto category = parse_gencode_category(*category_text);
  if (!category) {
    throw MalformedRow("gencode_category", "unknown category '" + std::string(*category_text) + "'");
  }
  f.gencode_category = *category;
  f.gencode_info = std::string(row.get(Field::GencodeInfo).value_or(""));
  if (requires_gene(f.gencode_category) && f.gencode_info.empty()) {
    throw MalformedRow("gencode_info", "category needs a gene name");
  }
  if (auto m = row.get(Field::MetaSvm)) {
    f.metasvm = parse_metasvm(*m);
    if (!f.metasvm) throw MalformedRow("metasvm", "unknown MetaSVM value '" + std::string(*m) + "'");
  }
  if (auto c = row.get(Field::CaddPhred)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(c->data(), c->data() + c->size(), v);
    if (ec != std::errc{} || ptr != c->data() + c->size() || !std::isfinite(v) || v < 0.0) {
      throw MalformedRow("cadd_phred", "bad CADD score '" + std::string(*c) + "'");
    }
    f.cadd_phred = v;
  }
  f.cage = optional_text(row, Field::Cage);
  f.genehancer = optional_text(row, Field::GeneHancer);
  f.rdhs = optional_text(row, Field::Rdhs);
  for (auto& key : keys) out.push_back(FavorRecord{std::move(key), f});
}

// --- ClinVar ---------------------------------------------------------------

ClinVarParser::ClinVarParser(LineSource& source, const SourceSchema& schema, ReviewTierTable tiers,
                             ParseOptions options)
    : RowParser(source, schema, options),
      tiers_(std::move(tiers)),
      list_separator_(schema.list_separator) {
  if (schema.source_kind != SourceKind::ClinVar) {
    throw ConfigError("schema is not a clinvar schema");
  }
}

ClinVarRow ClinVarParser::make_empty() const {
  return ClinVarRow{VariantKey::make("1", 1, "A", "C"), {}};
}

void ClinVarParser::parse_row(const TableReader& row, std::deque<ClinVarRow>& out) {
  auto keys = read_keys(row);
  ClinVarRecord rec;
  auto sig_text = row.get(Field::ClinicalSignificance);
  if (!sig_text) throw MalformedRow("significance", "missing significance");
  auto sig = parse_clinical_significance(*sig_text);
  if (!sig) {
    throw MalformedRow("significance", "unknown significance '" + std::string(*sig_text) + "'");
  }
  rec.clinical_significance = *sig;
  if (auto conds = row.get(Field::Conditions)) {
    std::size_t start = 0;
    for (;;) {
      auto d = conds->find(list_separator_, start);
      auto item = trim(conds->substr(start, d - start));
      if (!item.empty() && item != ".") rec.conditions.emplace_back(item);
      if (d == std::string_view::npos) break;
      start = d + 1;
    }
  }
  auto review_text = row.get(Field::ReviewStatus);
  if (!review_text) throw MalformedRow("review_status", "missing review status");
  auto review = tiers_.lookup(*review_text);
  if (!review) {
    throw MalformedRow("review_status", "unknown review status '" + std::string(*review_text) + "'");
  }
  rec.review_status = *review;
  for (auto& key : keys) out.push_back(ClinVarRow{std::move(key), rec});
}

// --- GWAS Catalog ----------------------------------------------------------

GwasParser::GwasParser(LineSource& source, const SourceSchema& schema, ParseOptions options)
    : RowParser(source, schema, options) {
  if (schema.source_kind != SourceKind::GwasCatalog) {
    throw ConfigError("schema is not a gwas schema");
  }
}

GwasRow GwasParser::make_empty() const { return GwasRow{}; }

void GwasParser::parse_row(const TableReader& row, std::deque<GwasRow>& out) {
  GwasAssociation assoc;
  auto trait = row.get(Field::Trait);
  if (!trait) throw MalformedRow("trait", "missing trait");
  assoc.trait = std::string(*trait);
  if (auto p = row.get(Field::PValue)) {
    bool out_of_range = false;
    assoc.p_value = parse_p_value(*p, out_of_range);
    if (out_of_range) warn("p_value_out_of_range");
  }
  assoc.study_ref = optional_text(row, Field::StudyRef);
  auto rsid = read_rsid(row);

  const bool has_position = row.get(Field::Chromosome) || row.get(Field::Position) ||
                            row.get(Field::Ref) || row.get(Field::Alt);
  if (!has_position) {
    if (!rsid) throw MalformedRow("variant_id", "row has neither rsID nor position");
    out.push_back(GwasRow{std::nullopt, rsid, assoc});
    return;
  }
  for (auto& key : read_keys(row)) out.push_back(GwasRow{std::move(key), rsid, assoc});
}

}  // namespace varembed::ingest
