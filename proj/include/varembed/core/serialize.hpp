#pragma once

#include <nlohmann/json.hpp>

#include "varembed/core/types.hpp"

namespace varembed {

// Keys are embedded as {"key": "CHROM-POS-REF-ALT", "rsid": "rs..." | null} in
// any enclosing object.
void put_key(nlohmann::json& j, const VariantKey& key);
VariantKey get_key(const nlohmann::json& j);

void to_json(nlohmann::json& j, const FunctionalAnnotation& f);
void from_json(const nlohmann::json& j, FunctionalAnnotation& f);
void to_json(nlohmann::json& j, const ReviewStatus& r);
void from_json(const nlohmann::json& j, ReviewStatus& r);
void to_json(nlohmann::json& j, const ClinVarRecord& c);
void from_json(const nlohmann::json& j, ClinVarRecord& c);
void to_json(nlohmann::json& j, const GwasAssociation& g);
void from_json(const nlohmann::json& j, GwasAssociation& g);

nlohmann::json to_json(const JoinedVariant& v);
JoinedVariant joined_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnnotationText& a);
AnnotationText annotation_from_json(const nlohmann::json& j);

}  // namespace varembed
