#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varembed/core/variant_key.hpp"

namespace varembed {

/// FAVOR GENCODE comprehensive consequence category.
enum class GencodeCategory {
  Exonic,
  Splicing,
  ExonicSplicing,
  NcRnaExonic,
  NcRnaIntronic,
  NcRnaSplicing,
  NcRnaExonicSplicing,
  Utr5,
  Utr3,
  Utr5Utr3,
  Intronic,
  Upstream,
  Downstream,
  UpstreamDownstream,
  Intergenic,
};

std::string_view to_string(GencodeCategory category) noexcept;
std::optional<GencodeCategory> parse_gencode_category(std::string_view text) noexcept;
/// Every category names a gene except intergenic, where the nearby gene is optional.
bool requires_gene(GencodeCategory category) noexcept;

enum class MetaSvm { Deleterious, Tolerated };

std::string_view to_string(MetaSvm prediction) noexcept;
std::optional<MetaSvm> parse_metasvm(std::string_view text) noexcept;

struct FunctionalAnnotation {
  GencodeCategory gencode_category = GencodeCategory::Intergenic;
  std::string gencode_info;
  std::optional<MetaSvm> metasvm;
  std::optional<double> cadd_phred;
  std::optional<std::string> cage;
  std::optional<std::string> genehancer;
  std::optional<std::string> rdhs;

  /// Throws InvalidVariant when an invariant fails.
  void validate() const;

  friend bool operator==(const FunctionalAnnotation&, const FunctionalAnnotation&) = default;
};

enum class ClinicalSignificance {
  Pathogenic,
  PathogenicLikelyPathogenic,
  LikelyPathogenic,
  UncertainSignificance,
  ConflictingInterpretations,
  LikelyBenign,
  BenignLikelyBenign,
  Benign,
  DrugResponse,
  RiskFactor,
  Association,
  Protective,
  Affects,
  Other,
  NotProvided,
};

std::string_view to_string(ClinicalSignificance significance) noexcept;
/// Accepts ClinVar spellings with spaces or underscores, case-insensitively.
std::optional<ClinicalSignificance> parse_clinical_significance(std::string_view text) noexcept;

struct ReviewStatus {
  int tier = 0;             // ClinVar star level, 0-4
  std::string description;  // normalized textual status

  friend bool operator==(const ReviewStatus&, const ReviewStatus&) = default;
};

struct ClinVarRecord {
  ClinicalSignificance clinical_significance = ClinicalSignificance::NotProvided;
  std::vector<std::string> conditions;
  ReviewStatus review_status;

  void validate() const;

  friend bool operator==(const ClinVarRecord&, const ClinVarRecord&) = default;
};

struct GwasAssociation {
  std::string trait;
  std::optional<double> p_value;
  std::optional<std::string> study_ref;

  void validate() const;

  friend bool operator==(const GwasAssociation&, const GwasAssociation&) = default;
};

struct JoinedVariant {
  VariantKey key;
  FunctionalAnnotation functional;
  std::vector<ClinVarRecord> clinvar;
  std::vector<GwasAssociation> gwas;
  bool flip_applied = false;

  friend bool operator==(const JoinedVariant& a, const JoinedVariant& b) {
    return a.key == b.key && a.key.rsid() == b.key.rsid() && a.functional == b.functional &&
           a.clinvar == b.clinvar && a.gwas == b.gwas && a.flip_applied == b.flip_applied;
  }
};

struct AnnotationText {
  VariantKey key;
  std::string text;
  std::uint32_t token_count = 0;

  friend bool operator==(const AnnotationText& a, const AnnotationText& b) {
    return a.key == b.key && a.key.rsid() == b.key.rsid() && a.text == b.text &&
           a.token_count == b.token_count;
  }
};

struct EmbeddingVector {
  std::vector<float> values;
  std::string model_id;

  std::size_t dim() const noexcept { return values.size(); }
  /// Throws DimMismatch on empty/non-finite vectors or when `expected_dim` differs.
  void validate(std::size_t expected_dim = 0) const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

}  // namespace varembed
