#include "varembed/pipeline/stages.hpp"

#include <fstream>

#include "varembed/core/errors.hpp"
#include "varembed/core/line_source.hpp"
#include "varembed/core/serialize.hpp"
#include "varembed/ingest/review_tiers.hpp"
#include "varembed/join/variant_index.hpp"
#include "varembed/store/recfile.hpp"

namespace varembed::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path default_schema(ingest::SourceKind kind) {
  return ingest::data_dir() / "schemas" / (std::string(ingest::to_string(kind)) + ".json");
}

namespace {

template <typename Parser>
ingest::SkipReport drain_to(Parser& parser, const fs::path& out, store::RecordKind kind) {
  store::RecordWriter writer(out, kind);
  auto record = parser.blank();
  while (parser.next(record)) writer.write(ingest::to_json(record));
  writer.close();
  return parser.report();
}

template <typename T, typename Decode>
join::Source<T> record_source(store::RecordReader& reader, Decode decode) {
  return [&reader, decode](T& out) {
    json j;
    if (!reader.next(j)) return false;
    out = decode(j);
    return true;
  };
}

}  // namespace

ingest::SkipReport ingest_file(ingest::SourceKind kind, const fs::path& schema_path, const fs::path& input,
                               const fs::path& out, const IngestStageOptions& options) {
  const auto schema = ingest::SourceSchema::load(schema_path);
  if (schema.source_kind != kind) {
    throw ConfigError(schema_path.string() + " describes source '" +
                      std::string(ingest::to_string(schema.source_kind)) + "', not '" +
                      std::string(ingest::to_string(kind)) + "'");
  }
  FileLineSource source(input);
  ingest::ParseOptions popts;
  popts.strict = options.strict;
  switch (kind) {
    case ingest::SourceKind::Favor: {
      ingest::FavorParser parser(source, schema, popts);
      return drain_to(parser, out, store::RecordKind::Favor);
    }
    case ingest::SourceKind::ClinVar: {
      auto tiers = options.review_tiers ? ingest::ReviewTierTable::load(*options.review_tiers)
                                        : ingest::ReviewTierTable::load_default();
      ingest::ClinVarParser parser(source, schema, std::move(tiers), popts);
      return drain_to(parser, out, store::RecordKind::ClinVar);
    }
    case ingest::SourceKind::GwasCatalog: {
      ingest::GwasParser parser(source, schema, popts);
      return drain_to(parser, out, store::RecordKind::Gwas);
    }
  }
  throw ConfigError("unknown source kind");
}

join::JoinReport join_files(const fs::path& favor, const fs::path& clinvar, const fs::path& gwas,
                            const fs::path& out, const JoinStageOptions& options) {
  store::RecordWriter writer(out, store::RecordKind::Joined);
  auto sink = [&](JoinedVariant&& v) { writer.write(to_json(v)); };
  join::JoinReport report;
  if (options.external) {
    join::ExternalJoinOptions eopts;
    eopts.tmp_dir = options.tmp_dir;
    eopts.max_run_bytes = options.max_run_bytes;
    eopts.strict = options.strict;
    report = join::join_sources_external(favor, clinvar, gwas, sink, eopts);
  } else {
    store::RecordReader favor_in(favor, store::RecordKind::Favor);
    join::IndexBuildOptions bopts;
    bopts.strict = options.strict;
    const auto index = join::VariantIndex::build(
        record_source<ingest::FavorRecord>(favor_in, [](const json& j) { return ingest::favor_from_json(j); }),
        bopts);
    store::RecordReader clinvar_in(clinvar, store::RecordKind::ClinVar);
    store::RecordReader gwas_in(gwas, store::RecordKind::Gwas);
    join::JoinOptions jopts;
    jopts.partition_by_chrom = options.partition_by_chrom;
    jopts.threads = options.threads;
    report = join::join_sources(
        index,
        record_source<ingest::ClinVarRow>(clinvar_in, [](const json& j) { return ingest::clinvar_from_json(j); }),
        record_source<ingest::GwasRow>(gwas_in, [](const json& j) { return ingest::gwas_from_json(j); }), sink,
        jopts);
  }
  writer.close();
  return report;
}

std::vector<JoinedVariant> read_joined(const fs::path& path) {
  store::RecordReader in(path, store::RecordKind::Joined);
  std::vector<JoinedVariant> out;
  json j;
  while (in.next(j)) out.push_back(joined_from_json(j));
  return out;
}

std::uint64_t annotate_file(const fs::path& joined, const annotate::TemplateConfig& config,
                            const annotate::Tokenizer& tokenizer, const fs::path& out) {
  store::RecordReader in(joined, store::RecordKind::Joined);
  const fs::path partial = out.string() + ".partial";
  std::ofstream os(partial, std::ios::trunc);
  if (!os) throw IoError("cannot write " + partial.string());
  std::uint64_t n = 0;
  json j;
  while (in.next(j)) {
    auto a = annotate::render_annotation(joined_from_json(j), config);
    a.token_count = static_cast<std::uint32_t>(tokenizer.count(a.text));
    os << to_json(a).dump() << '\n';
    ++n;
  }
  os.close();
  if (!os) throw IoError("cannot write " + partial.string());
  fs::rename(partial, out);
  return n;
}

std::vector<AnnotationText> read_annotations(const fs::path& path) {
  FileLineSource src(path);
  std::vector<AnnotationText> out;
  std::string line;
  std::uint64_t line_no = 0;
  while (src.next_line(line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_annotations(const fs::path& path, const std::vector<AnnotationText>& annotations) {
  std::ofstream os(path, std::ios::trunc);
  for (const auto& a : annotations) os << to_json(a).dump() << '\n';
  if (!os) throw IoError("cannot write " + path.string());
}

annotate::TokenStats annotation_token_stats(const std::vector<AnnotationText>& annotations,
                                            std::uint64_t bin_width) {
  annotate::TokenStatsAccumulator acc(bin_width);
  for (const auto& a : annotations) acc.add(a.token_count);
  return acc.finish();
}

std::uint64_t total_tokens(const fs::path& annotations) {
  std::uint64_t total = 0;
  for (const auto& a : read_annotations(annotations)) total += a.token_count;
  return total;
}

}  // namespace varembed::pipeline
