#include "varembed/join/join.hpp"

#include <algorithm>
#include <atomic>

#include "varembed/core/parallel.hpp"

namespace varembed::join {

using nlohmann::json;

json SourceMatchCounts::to_json() const {
  return json{{"total", total},       {"direct", direct},       {"flipped", flipped},
              {"via_rsid", via_rsid}, {"unmatched", unmatched}};
}

json JoinReport::to_json() const {
  return json{{"favor_records", favor_records},
              {"favor_duplicates", favor_duplicates},
              {"joined", joined},
              {"clinvar", clinvar.to_json()},
              {"gwas", gwas.to_json()},
              {"gwas_duplicates_collapsed", gwas_duplicates_collapsed}};
}

std::uint64_t canonicalize_attachments(JoinedVariant& variant) {
  std::sort(variant.clinvar.begin(), variant.clinvar.end(),
            [](const ClinVarRecord& a, const ClinVarRecord& b) {
              if (a.review_status.tier != b.review_status.tier) {
                return a.review_status.tier > b.review_status.tier;
              }
              if (auto c = to_string(a.clinical_significance)
                               .compare(to_string(b.clinical_significance));
                  c != 0) {
                return c < 0;
              }
              if (a.conditions != b.conditions) return a.conditions < b.conditions;
              return a.review_status.description < b.review_status.description;
            });
  std::sort(variant.gwas.begin(), variant.gwas.end(),
            [](const GwasAssociation& a, const GwasAssociation& b) {
              if (a.trait != b.trait) return a.trait < b.trait;
              if (a.p_value.has_value() != b.p_value.has_value()) return a.p_value.has_value();
              if (a.p_value && *a.p_value != *b.p_value) return *a.p_value < *b.p_value;
              if (a.study_ref.has_value() != b.study_ref.has_value()) {
                return a.study_ref.has_value();
              }
              return a.study_ref.value_or("") < b.study_ref.value_or("");
            });
  auto last = std::unique(
      variant.gwas.begin(), variant.gwas.end(),
      [](const GwasAssociation& a, const GwasAssociation& b) { return a.trait == b.trait; });
  auto collapsed = static_cast<std::uint64_t>(variant.gwas.end() - last);
  variant.gwas.erase(last, variant.gwas.end());
  return collapsed;
}

JoinReport join_sources(const VariantIndex& favor, const Source<ingest::ClinVarRow>& clinvar,
                        const Source<ingest::GwasRow>& gwas, const JoinSink& sink,
                        JoinOptions options) {
  JoinReport report;
  report.favor_records = favor.size();
  report.favor_duplicates = favor.duplicates();

  std::vector<std::vector<ClinVarRecord>> clin(favor.size());
  std::vector<std::vector<GwasAssociation>> assoc(favor.size());
  std::vector<char> flipped(favor.size(), 0);

  auto resolve = [&](const VariantKey& key, SourceMatchCounts& counts) -> std::optional<std::size_t> {
    auto m = match_with_flip(key, favor);
    switch (m.kind) {
      case MatchKind::Direct: ++counts.direct; break;
      case MatchKind::Flipped: ++counts.flipped; break;
      case MatchKind::None: ++counts.unmatched; return std::nullopt;
    }
    auto offset = *favor.find(*m.key);
    if (m.kind == MatchKind::Flipped) flipped[offset] = 1;
    return offset;
  };

  ingest::ClinVarRow crow{VariantKey::make("1", 1, "A", "C"), {}};
  while (clinvar(crow)) {
    ++report.clinvar.total;
    if (auto offset = resolve(crow.key, report.clinvar)) clin[*offset].push_back(crow.record);
  }

  ingest::GwasRow grow;
  while (gwas(grow)) {
    ++report.gwas.total;
    if (grow.key) {
      if (auto offset = resolve(*grow.key, report.gwas)) assoc[*offset].push_back(grow.association);
      continue;
    }
    const auto& keys = grow.rsid ? favor.keys_for_rsid(*grow.rsid) : std::vector<VariantKey>{};
    if (keys.empty()) {
      ++report.gwas.unmatched;
      continue;
    }
    ++report.gwas.via_rsid;
    for (const auto& k : keys) assoc[*favor.find(k)].push_back(grow.association);
  }

  auto assemble = [&](std::size_t offset, std::uint64_t& collapsed) {
    const auto& rec = favor.record(offset);
    JoinedVariant v{rec.key, rec.functional, std::move(clin[offset]), std::move(assoc[offset]),
                    flipped[offset] != 0};
    collapsed += canonicalize_attachments(v);
    return v;
  };

  const auto& order = favor.canonical_order();
  if (!options.partition_by_chrom || options.threads <= 1) {
    for (std::size_t offset : order) {
      auto v = assemble(offset, report.gwas_duplicates_collapsed);
      ++report.joined;
      sink(std::move(v));
    }
    return report;
  }

  // Chromosome partitions are contiguous in canonical order.
  std::vector<std::pair<std::size_t, std::size_t>> parts;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const auto chrom = favor.record(order[i]).key.chromosome();
    while (j < order.size() && favor.record(order[j]).key.chromosome() == chrom) ++j;
    parts.emplace_back(i, j);
    i = j;
  }
  std::vector<std::vector<JoinedVariant>> built(parts.size());
  std::vector<std::uint64_t> collapsed(parts.size(), 0);
  parallel_for(parts.size(), options.threads, [&](std::size_t p) {
    for (std::size_t i = parts[p].first; i < parts[p].second; ++i) {
      built[p].push_back(assemble(order[i], collapsed[p]));
    }
  });
  for (std::size_t p = 0; p < parts.size(); ++p) {
    report.gwas_duplicates_collapsed += collapsed[p];
    for (auto& v : built[p]) {
      ++report.joined;
      sink(std::move(v));
    }
  }
  return report;
}

}  // namespace varembed::join
