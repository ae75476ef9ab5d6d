#include "varembed/annotate/template.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <utility>

#include "varembed/core/errors.hpp"

namespace varembed::annotate {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Section, std::string_view>, 6> kSections = {{
    {Section::Identity, "identity"},
    {Section::Gencode, "gencode"},
    {Section::Scores, "scores"},
    {Section::Regulatory, "regulatory"},
    {Section::Clinical, "clinical"},
    {Section::Gwas, "gwas"},
}};

std::string_view variant_type(const VariantKey& key) {
  const auto r = key.ref().size();
  const auto a = key.alt().size();
  if (r == 1 && a == 1) return "single nucleotide variant";
  if (r == a) return "multi-nucleotide variant";
  return r > a ? "deletion" : "insertion";
}

std::string_view region_phrase(GencodeCategory c) {
  switch (c) {
    case GencodeCategory::Exonic: return "an exonic region";
    case GencodeCategory::Splicing: return "a splice site region";
    case GencodeCategory::ExonicSplicing: return "an exonic splice site region";
    case GencodeCategory::NcRnaExonic: return "a non-coding RNA exon";
    case GencodeCategory::NcRnaIntronic: return "a non-coding RNA intron";
    case GencodeCategory::NcRnaSplicing: return "a non-coding RNA splice site";
    case GencodeCategory::NcRnaExonicSplicing: return "a non-coding RNA exonic splice site";
    case GencodeCategory::Utr5: return "the 5' untranslated region";
    case GencodeCategory::Utr3: return "the 3' untranslated region";
    case GencodeCategory::Utr5Utr3: return "the 5' and 3' untranslated regions";
    case GencodeCategory::Intronic: return "an intronic region";
    case GencodeCategory::Upstream: return "the upstream region";
    case GencodeCategory::Downstream: return "the downstream region";
    case GencodeCategory::UpstreamDownstream: return "the upstream and downstream regions";
    case GencodeCategory::Intergenic: return "an intergenic region";
  }
  return "an unclassified region";
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// ClinVar condition names use '_' for spaces.
std::string humanize(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

std::string join_capped(const std::vector<std::string>& items, std::size_t cap) {
  std::string out;
  const std::size_t shown = std::min(cap, items.size());
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  if (items.size() > shown) out += " and " + std::to_string(items.size() - shown) + " more";
  return out;
}

class Writer {
 public:
  void sentence(const std::string& s) {
    if (!text_.empty()) text_ += ' ';
    text_ += s;
  }
  std::string take() { return std::move(text_); }

 private:
  std::string text_;
};

void identity(const JoinedVariant& v, Writer& w) {
  const auto& k = v.key;
  std::string s = "Variant " + k.to_string();
  if (k.rsid()) s += " (" + *k.rsid() + ")";
  const auto type = variant_type(k);
  s += std::string(type == "insertion" ? " is an " : " is a ") + std::string(type) + " on chromosome " + std::string(k.chromosome().label()) +
       " at position " + std::to_string(k.position()) + " (GRCh38) with reference allele " +
       k.ref() + " and alternate allele " + k.alt() + ".";
  w.sentence(s);
}

void gencode(const JoinedVariant& v, const TemplateConfig& cfg, Writer& w) {
  const auto& f = v.functional;
  std::string s = "According to GENCODE it lies in " + std::string(region_phrase(f.gencode_category));
  if (f.gencode_category == GencodeCategory::Intergenic) {
    if (!f.gencode_info.empty()) {
      s += " near the gene " + f.gencode_info;
    } else if (!cfg.omit_missing) {
      s += "; the nearby gene is not available";
    }
  } else {
    s += " of the gene " + f.gencode_info;
  }
  w.sentence(s + ".");
}

void scores(const JoinedVariant& v, const TemplateConfig& cfg, Writer& w) {
  const auto& f = v.functional;
  if (f.metasvm) {
    w.sentence("The MetaSVM prediction is " + lower(to_string(*f.metasvm)) + ".");
  } else if (!cfg.omit_missing) {
    w.sentence("The MetaSVM prediction is not available.");
  }
  if (f.cadd_phred) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *f.cadd_phred);
    w.sentence(std::string("The CADD Phred score is ") + buf + ".");
  } else if (!cfg.omit_missing) {
    w.sentence("The CADD Phred score is not available.");
  }
}

void regulatory(const JoinedVariant& v, const TemplateConfig& cfg, Writer& w) {
  const auto& f = v.functional;
  auto one = [&](const std::optional<std::string>& value, const std::string& present,
                 const std::string& missing) {
    if (value) {
      w.sentence(present + *value + ".");
    } else if (!cfg.omit_missing) {
      w.sentence(missing);
    }
  };
  one(f.cage, "It overlaps the CAGE promoter ", "CAGE promoter overlap is not available.");
  one(f.rdhs, "It overlaps the ENCODE rDHS element ", "rDHS overlap is not available.");
  one(f.genehancer, "GeneHancer links it to ", "GeneHancer annotation is not available.");
}

void clinical(const JoinedVariant& v, const TemplateConfig& cfg, Writer& w) {
  if (v.clinvar.empty()) {
    if (!cfg.omit_missing) w.sentence("ClinVar clinical significance is not available.");
    return;
  }
  for (const auto& r : v.clinvar) {
    std::string s = "ClinVar reports it as " + lower(to_string(r.clinical_significance));
    if (!r.conditions.empty()) {
      std::vector<std::string> conditions;
      for (const auto& c : r.conditions) conditions.push_back(humanize(c));
      s += " for " + join_capped(conditions, cfg.max_conditions);
    }
    s += " (review status: " + r.review_status.description + ", " +
         std::to_string(r.review_status.tier) + " of 4 stars).";
    w.sentence(s);
  }
}

void gwas(const JoinedVariant& v, const TemplateConfig& cfg, Writer& w) {
  if (v.gwas.empty()) {
    if (!cfg.omit_missing) w.sentence("GWAS associations are not available.");
    return;
  }
  std::vector<std::string> traits;
  for (const auto& a : v.gwas) {
    std::string t = a.trait;
    if (a.p_value) t += " (p = " + format_p_value(*a.p_value) + ")";
    traits.push_back(std::move(t));
  }
  w.sentence("GWAS studies associate it with " + join_capped(traits, cfg.max_traits) + ".");
}

}  // namespace

std::string_view to_string(Section section) noexcept {
  for (const auto& [s, name] : kSections) {
    if (s == section) return name;
  }
  return "identity";
}

std::optional<Section> parse_section(std::string_view text) noexcept {
  for (const auto& [s, name] : kSections) {
    if (name == text) return s;
  }
  return std::nullopt;
}

void TemplateConfig::validate() const {
  if (section_order.empty() || section_order.front() != Section::Identity) {
    throw ConfigError("template: identity section must come first");
  }
  std::set<Section> seen;
  for (auto s : section_order) {
    if (!seen.insert(s).second) {
      throw ConfigError("template: repeated section " + std::string(to_string(s)));
    }
  }
  if (max_conditions == 0 || max_traits == 0) {
    throw ConfigError("template: max_conditions and max_traits must be >= 1");
  }
}

TemplateConfig TemplateConfig::from_json(const json& j) {
  TemplateConfig cfg;
  try {
    if (j.contains("section_order")) {
      cfg.section_order.clear();
      for (const auto& s : j.at("section_order")) {
        auto sec = parse_section(s.get<std::string>());
        if (!sec) throw ConfigError("template: unknown section " + s.get<std::string>());
        cfg.section_order.push_back(*sec);
      }
    }
    cfg.omit_missing = j.value("omit_missing", cfg.omit_missing);
    cfg.max_conditions = j.value("max_conditions", cfg.max_conditions);
    cfg.max_traits = j.value("max_traits", cfg.max_traits);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("template: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

TemplateConfig TemplateConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("template " + path.string() + ": " + e.what());
  }
}

json TemplateConfig::to_json() const {
  json order = json::array();
  for (auto s : section_order) order.push_back(std::string(to_string(s)));
  return json{{"section_order", order},
              {"omit_missing", omit_missing},
              {"max_conditions", max_conditions},
              {"max_traits", max_traits}};
}

std::string format_p_value(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", p);
  return buf;
}

AnnotationText render_annotation(const JoinedVariant& v, const TemplateConfig& cfg) {
  Writer w;
  identity(v, w);
  for (auto s : cfg.section_order) {
    switch (s) {
      case Section::Identity: break;
      case Section::Gencode: gencode(v, cfg, w); break;
      case Section::Scores: scores(v, cfg, w); break;
      case Section::Regulatory: regulatory(v, cfg, w); break;
      case Section::Clinical: clinical(v, cfg, w); break;
      case Section::Gwas: gwas(v, cfg, w); break;
    }
  }
  return AnnotationText{v.key, w.take(), 0};
}

}  // namespace varembed::annotate
