#include "varembed/core/serialize.hpp"

#include "varembed/core/errors.hpp"

namespace varembed {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* name, const std::optional<T>& value) {
  j[name] = value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void put_key(json& j, const VariantKey& key) {
  j["key"] = key.to_string();
  put_optional(j, "rsid", key.rsid());
}

VariantKey get_key(const json& j) {
  auto key = VariantKey::parse(j.at("key").get<std::string>());
  return key.with_rsid(get_optional<std::string>(j, "rsid"));
}

void to_json(json& j, const FunctionalAnnotation& f) {
  j = json::object();
  j["gencode_category"] = to_string(f.gencode_category);
  j["gencode_info"] = f.gencode_info;
  j["metasvm"] = f.metasvm ? json(to_string(*f.metasvm)) : json(nullptr);
  put_optional(j, "cadd_phred", f.cadd_phred);
  put_optional(j, "cage", f.cage);
  put_optional(j, "genehancer", f.genehancer);
  put_optional(j, "rdhs", f.rdhs);
}

void from_json(const json& j, FunctionalAnnotation& f) {
  auto category = parse_gencode_category(j.at("gencode_category").get<std::string>());
  if (!category) throw FormatError("unknown gencode_category in record");
  f.gencode_category = *category;
  f.gencode_info = j.at("gencode_info").get<std::string>();
  f.metasvm.reset();
  if (auto m = get_optional<std::string>(j, "metasvm")) {
    f.metasvm = parse_metasvm(*m);
    if (!f.metasvm) throw FormatError("unknown metasvm value in record");
  }
  f.cadd_phred = get_optional<double>(j, "cadd_phred");
  f.cage = get_optional<std::string>(j, "cage");
  f.genehancer = get_optional<std::string>(j, "genehancer");
  f.rdhs = get_optional<std::string>(j, "rdhs");
}

void to_json(json& j, const ReviewStatus& r) {
  j = json{{"tier", r.tier}, {"description", r.description}};
}

void from_json(const json& j, ReviewStatus& r) {
  r.tier = j.at("tier").get<int>();
  r.description = j.at("description").get<std::string>();
}

void to_json(json& j, const ClinVarRecord& c) {
  j = json{{"clinical_significance", to_string(c.clinical_significance)},
           {"conditions", c.conditions},
           {"review_status", c.review_status}};
}

void from_json(const json& j, ClinVarRecord& c) {
  auto sig = parse_clinical_significance(j.at("clinical_significance").get<std::string>());
  if (!sig) throw FormatError("unknown clinical_significance in record");
  c.clinical_significance = *sig;
  c.conditions = j.at("conditions").get<std::vector<std::string>>();
  c.review_status = j.at("review_status").get<ReviewStatus>();
}

void to_json(json& j, const GwasAssociation& g) {
  j = json{{"trait", g.trait}};
  put_optional(j, "p_value", g.p_value);
  put_optional(j, "study_ref", g.study_ref);
}

void from_json(const json& j, GwasAssociation& g) {
  g.trait = j.at("trait").get<std::string>();
  g.p_value = get_optional<double>(j, "p_value");
  g.study_ref = get_optional<std::string>(j, "study_ref");
}

json to_json(const JoinedVariant& v) {
  json j = json::object();
  put_key(j, v.key);
  j["functional"] = v.functional;
  j["clinvar"] = v.clinvar;
  j["gwas"] = v.gwas;
  j["flip_applied"] = v.flip_applied;
  return j;
}

JoinedVariant joined_from_json(const json& j) {
  return JoinedVariant{get_key(j), j.at("functional").get<FunctionalAnnotation>(),
                       j.at("clinvar").get<std::vector<ClinVarRecord>>(),
                       j.at("gwas").get<std::vector<GwasAssociation>>(),
                       j.at("flip_applied").get<bool>()};
}

json to_json(const AnnotationText& a) {
  json j = json::object();
  put_key(j, a.key);
  j["text"] = a.text;
  j["tokens"] = a.token_count;
  return j;
}

AnnotationText annotation_from_json(const json& j) {
  return AnnotationText{get_key(j), j.at("text").get<std::string>(),
                        j.at("tokens").get<std::uint32_t>()};
}

}  // namespace varembed
