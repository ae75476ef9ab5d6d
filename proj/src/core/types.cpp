#include "varembed/core/types.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "varembed/core/errors.hpp"

namespace varembed {
namespace {

constexpr std::array<std::pair<GencodeCategory, std::string_view>, 15> kGencode = {{
    {GencodeCategory::Exonic, "exonic"},
    {GencodeCategory::Splicing, "splicing"},
    {GencodeCategory::ExonicSplicing, "exonic;splicing"},
    {GencodeCategory::NcRnaExonic, "ncRNA_exonic"},
    {GencodeCategory::NcRnaIntronic, "ncRNA_intronic"},
    {GencodeCategory::NcRnaSplicing, "ncRNA_splicing"},
    {GencodeCategory::NcRnaExonicSplicing, "ncRNA_exonic;splicing"},
    {GencodeCategory::Utr5, "UTR5"},
    {GencodeCategory::Utr3, "UTR3"},
    {GencodeCategory::Utr5Utr3, "UTR5;UTR3"},
    {GencodeCategory::Intronic, "intronic"},
    {GencodeCategory::Upstream, "upstream"},
    {GencodeCategory::Downstream, "downstream"},
    {GencodeCategory::UpstreamDownstream, "upstream;downstream"},
    {GencodeCategory::Intergenic, "intergenic"},
}};

constexpr std::array<std::pair<ClinicalSignificance, std::string_view>, 15> kSignificance = {{
    {ClinicalSignificance::Pathogenic, "Pathogenic"},
    {ClinicalSignificance::PathogenicLikelyPathogenic, "Pathogenic/Likely pathogenic"},
    {ClinicalSignificance::LikelyPathogenic, "Likely pathogenic"},
    {ClinicalSignificance::UncertainSignificance, "Uncertain significance"},
    {ClinicalSignificance::ConflictingInterpretations,
     "Conflicting interpretations of pathogenicity"},
    {ClinicalSignificance::LikelyBenign, "Likely benign"},
    {ClinicalSignificance::BenignLikelyBenign, "Benign/Likely benign"},
    {ClinicalSignificance::Benign, "Benign"},
    {ClinicalSignificance::DrugResponse, "drug response"},
    {ClinicalSignificance::RiskFactor, "risk factor"},
    {ClinicalSignificance::Association, "association"},
    {ClinicalSignificance::Protective, "protective"},
    {ClinicalSignificance::Affects, "affects"},
    {ClinicalSignificance::Other, "other"},
    {ClinicalSignificance::NotProvided, "not provided"},
}};

char fold(char c) noexcept {
  if (c == '_') return ' ';
  if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
  return c;
}

bool loose_equals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (fold(a[i]) != fold(b[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(GencodeCategory category) noexcept {
  for (const auto& [value, text] : kGencode) {
    if (value == category) return text;
  }
  return "intergenic";
}

std::optional<GencodeCategory> parse_gencode_category(std::string_view text) noexcept {
  for (const auto& [value, name] : kGencode) {
    if (name == text) return value;
  }
  return std::nullopt;
}

bool requires_gene(GencodeCategory category) noexcept {
  return category != GencodeCategory::Intergenic;
}

std::string_view to_string(MetaSvm prediction) noexcept {
  return prediction == MetaSvm::Deleterious ? "Deleterious" : "Tolerated";
}

std::optional<MetaSvm> parse_metasvm(std::string_view text) noexcept {
  if (text == "D" || loose_equals(text, "deleterious")) return MetaSvm::Deleterious;
  if (text == "T" || loose_equals(text, "tolerated")) return MetaSvm::Tolerated;
  return std::nullopt;
}

std::string_view to_string(ClinicalSignificance significance) noexcept {
  for (const auto& [value, text] : kSignificance) {
    if (value == significance) return text;
  }
  return "not provided";
}

std::optional<ClinicalSignificance> parse_clinical_significance(std::string_view text) noexcept {
  for (const auto& [value, name] : kSignificance) {
    if (loose_equals(text, name)) return value;
  }
  // Newer releases renamed the conflicting category.
  if (loose_equals(text, "Conflicting classifications of pathogenicity")) {
    return ClinicalSignificance::ConflictingInterpretations;
  }
  return std::nullopt;
}

void FunctionalAnnotation::validate() const {
  if (cadd_phred && (!std::isfinite(*cadd_phred) || *cadd_phred < 0.0)) {
    throw InvalidVariant("cadd_phred must be finite and >= 0");
  }
  if (requires_gene(gencode_category) && gencode_info.empty()) {
    throw InvalidVariant("gencode_info required for category " +
                         std::string(to_string(gencode_category)));
  }
}

void ClinVarRecord::validate() const {
  if (review_status.tier < 0 || review_status.tier > 4) {
    throw InvalidVariant("review tier out of range");
  }
  for (const auto& c : conditions) {
    if (c.empty()) throw InvalidVariant("empty condition entry");
  }
}

void GwasAssociation::validate() const {
  if (trait.empty()) throw InvalidVariant("empty trait");
  if (p_value && !(*p_value > 0.0 && *p_value <= 1.0)) {
    throw InvalidVariant("p_value outside (0, 1]");
  }
}

void EmbeddingVector::validate(std::size_t expected_dim) const {
  if (values.empty()) throw DimMismatch("empty embedding");
  if (expected_dim != 0 && values.size() != expected_dim) {
    throw DimMismatch("expected dim " + std::to_string(expected_dim) + ", got " +
                      std::to_string(values.size()));
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw DimMismatch("non-finite embedding entry");
  }
}

}  // namespace varembed
