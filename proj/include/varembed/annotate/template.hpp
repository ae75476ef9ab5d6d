#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string_view>
#include <vector>

#include "varembed/core/types.hpp"

namespace varembed::annotate {

enum class Section { Identity, Gencode, Scores, Regulatory, Clinical, Gwas };

std::string_view to_string(Section section) noexcept;
std::optional<Section> parse_section(std::string_view text) noexcept;

struct TemplateConfig {
  std::vector<Section> section_order = {Section::Identity, Section::Gencode,  Section::Scores,
                                        Section::Regulatory, Section::Clinical, Section::Gwas};
  bool omit_missing = true;
  std::size_t max_conditions = 5;
  std::size_t max_traits = 5;

  /// Identity first, no repeats, caps >= 1. Throws ConfigError.
  void validate() const;

  static TemplateConfig from_json(const nlohmann::json& j);
  static TemplateConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Deterministic text for one joined variant. token_count is left at 0.
AnnotationText render_annotation(const JoinedVariant& variant, const TemplateConfig& config);

/// "2.3e-08" style: two significant digits.
std::string format_p_value(double p);

}  // namespace varembed::annotate
