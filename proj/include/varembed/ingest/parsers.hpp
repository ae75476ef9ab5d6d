#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varembed/core/errors.hpp"
#include "varembed/core/line_source.hpp"
#include "varembed/core/types.hpp"
#include "varembed/ingest/review_tiers.hpp"
#include "varembed/ingest/schema.hpp"

namespace varembed::ingest {

struct FavorRecord {
  VariantKey key;
  FunctionalAnnotation functional;

  friend bool operator==(const FavorRecord& a, const FavorRecord& b) {
    return a.key == b.key && a.key.rsid() == b.key.rsid() && a.functional == b.functional;
  }
};

struct ClinVarRow {
  VariantKey key;
  ClinVarRecord record;

  friend bool operator==(const ClinVarRow& a, const ClinVarRow& b) {
    return a.key == b.key && a.key.rsid() == b.key.rsid() && a.record == b.record;
  }
};

/// A GWAS association row. `key` is empty for rows that identify the variant
/// by rsID only; those are resolved through the rsID index during the join.
struct GwasRow {
  std::optional<VariantKey> key;
  std::optional<std::string> rsid;
  GwasAssociation association;

  friend bool operator==(const GwasRow& a, const GwasRow& b) {
    return a.key == b.key && a.rsid == b.rsid && a.association == b.association;
  }
};

nlohmann::json to_json(const FavorRecord& r);
FavorRecord favor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClinVarRow& r);
ClinVarRow clinvar_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GwasRow& r);
GwasRow gwas_from_json(const nlohmann::json& j);

/// Row accounting. valid + skipped == total for every parse; `records` can
/// exceed `valid` because multi-allelic rows decompose per alternate allele.
struct SkipReport {
  std::uint64_t total = 0;
  std::uint64_t valid = 0;
  std::uint64_t skipped = 0;
  std::uint64_t records = 0;
  std::map<std::string, std::uint64_t> reasons;
  std::map<std::string, std::uint64_t> warnings;

  nlohmann::json to_json() const;
};

struct ParseOptions {
  /// Abort on the first malformed row instead of skipping it.
  bool strict = false;
};

/// Splits delimited rows and resolves schema columns against the header.
class TableReader {
 public:
  TableReader(LineSource& source, const SourceSchema& schema);

  /// Advances to the next data row; blank and '#' comment lines are not rows.
  bool next_row();
  std::uint64_t line_number() const noexcept { return line_no_; }

  /// Throws MalformedRow("column_count") if the row is short or ragged.
  void check_width() const;
  bool mapped(Field field) const noexcept { return columns_.contains(field); }
  int position_base() const noexcept { return schema_.position_base; }
  /// Cell text, or nullopt for unmapped fields and the "." / empty sentinels.
  std::optional<std::string_view> get(Field field) const;

 private:
  void read_header();

  LineSource& source_;
  const SourceSchema& schema_;
  std::map<Field, std::size_t> columns_;
  std::size_t expected_width_ = 0;
  bool exact_width_ = false;
  std::string line_;
  std::vector<std::string_view> cells_;
  std::uint64_t line_no_ = 0;
  bool header_done_ = false;
};

/// Shared row loop: counting, strict/lenient handling and per-row buffering.
template <typename Record>
class RowParser {
 public:
  RowParser(LineSource& source, const SourceSchema& schema, ParseOptions options)
      : schema_(schema), reader_(source, schema_), options_(options) {}
  virtual ~RowParser() = default;

  bool next(Record& out) {
    while (pending_.empty()) {
      if (!reader_.next_row()) return false;
      ++report_.total;
      try {
        reader_.check_width();
        parse_row(reader_, pending_);
        ++report_.valid;
      } catch (const MalformedRow& e) {
        pending_.clear();
        if (options_.strict) {
          throw MalformedRow(e.reason(), "line " + std::to_string(reader_.line_number()) + ": " +
                                             e.what());
        }
        ++report_.skipped;
        ++report_.reasons[e.reason()];
      }
    }
    out = std::move(pending_.front());
    pending_.pop_front();
    ++report_.records;
    return true;
  }

  std::vector<Record> drain() {
    std::vector<Record> out;
    Record r = make_empty();
    while (next(r)) out.push_back(r);
    return out;
  }

  const SkipReport& report() const noexcept { return report_; }
  /// Placeholder value for next() to overwrite.
  Record blank() const { return make_empty(); }

 protected:
  virtual void parse_row(const TableReader& row, std::deque<Record>& out) = 0;
  virtual Record make_empty() const = 0;
  void warn(const std::string& tag) { ++report_.warnings[tag]; }

 private:
  SourceSchema schema_;
  TableReader reader_;
  ParseOptions options_;
  SkipReport report_;
  std::deque<Record> pending_;
};

class FavorParser final : public RowParser<FavorRecord> {
 public:
  FavorParser(LineSource& source, const SourceSchema& schema, ParseOptions options = {});

 protected:
  void parse_row(const TableReader& row, std::deque<FavorRecord>& out) override;
  FavorRecord make_empty() const override;
};

class ClinVarParser final : public RowParser<ClinVarRow> {
 public:
  ClinVarParser(LineSource& source, const SourceSchema& schema, ReviewTierTable tiers,
                ParseOptions options = {});

 protected:
  void parse_row(const TableReader& row, std::deque<ClinVarRow>& out) override;
  ClinVarRow make_empty() const override;

 private:
  ReviewTierTable tiers_;
  char list_separator_;
};

class GwasParser final : public RowParser<GwasRow> {
 public:
  GwasParser(LineSource& source, const SourceSchema& schema, ParseOptions options = {});

 protected:
  void parse_row(const TableReader& row, std::deque<GwasRow>& out) override;
  GwasRow make_empty() const override;
};

// Field-level helpers, exposed for tests.
std::uint32_t parse_position(std::string_view text, int position_base);
std::optional<double> parse_p_value(std::string_view text, bool& out_of_range);
std::vector<std::string> split_alts(std::string_view alts);

}  // namespace varembed::ingest
