#include "varembed/pipeline/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "varembed/aggregate/aggregate.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/log.hpp"
#include "varembed/embed/backend.hpp"
#include "varembed/embed/runner.hpp"
#include "varembed/eval/eval.hpp"
#include "varembed/pipeline/stages.hpp"

namespace varembed::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " is not set");
  if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Backend: return 3;
  }
  return 2;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p, std::ios::trunc);
  os << j.dump(2) << '\n';
}

}  // namespace

void PipelineConfig::validate() const {
  require_file(favor, "favor input");
  require_file(clinvar, "clinvar input");
  require_file(gwas, "gwas input");
  if (!favor_schema.empty()) require_file(favor_schema, "favor schema");
  if (!clinvar_schema.empty()) require_file(clinvar_schema, "clinvar schema");
  if (!gwas_schema.empty()) require_file(gwas_schema, "gwas schema");
  if (review_tiers) require_file(*review_tiers, "review tier table");
  if (template_config) require_file(*template_config, "template config");
  if (tokenizer.rfind("bpe:", 0) == 0) require_file(tokenizer.substr(4), "tokenizer vocab");
  if (work_dir.empty()) throw ConfigError("work dir is not set");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (inflight < 1) throw ConfigError("inflight must be >= 1");
  if (limits.max_items < 1 || limits.max_tokens < 1) throw ConfigError("batch limits must be >= 1");
  if (bin_width < 1) throw ConfigError("bin width must be >= 1");
  for (const auto& t : eval_tasks) (void)eval::EvalTask::parse(t);
  if (dosages) require_file(*dosages, "dosage matrix");
  if (dosage_keys) require_file(*dosage_keys, "dosage key list");
  (void)aggregate::parse_missing_policy(missing_policy);
}

fs::path PipelineConfig::resolved_store_dir() const { return store_dir.empty() ? work_dir / "store" : store_dir; }

RunResult run_pipeline(const PipelineConfig& cfg) {
  RunResult result;
  json& report = result.report;
  report = json::object();
  result.timings = json::object();
  std::string stage = "validate";
  auto clock_start = std::chrono::steady_clock::now();
  auto lap = [&](const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    result.timings[name] = std::chrono::duration<double>(now - clock_start).count();
    clock_start = now;
  };

  try {
    cfg.validate();
    fs::create_directories(cfg.work_dir);
    const auto work = cfg.work_dir;
    report["stages"] = json::array();

    stage = "ingest";
    IngestStageOptions iopts{cfg.strict, cfg.review_tiers};
    auto schema_or = [](const fs::path& p, ingest::SourceKind k) { return p.empty() ? default_schema(k) : p; };
    json ingest_report = json::object();
    ingest_report["favor"] = ingest_file(ingest::SourceKind::Favor, schema_or(cfg.favor_schema, ingest::SourceKind::Favor),
                                         cfg.favor, work / "favor.rec", iopts)
                                 .to_json();
    ingest_report["clinvar"] =
        ingest_file(ingest::SourceKind::ClinVar, schema_or(cfg.clinvar_schema, ingest::SourceKind::ClinVar),
                    cfg.clinvar, work / "clinvar.rec", iopts)
            .to_json();
    ingest_report["gwas"] =
        ingest_file(ingest::SourceKind::GwasCatalog, schema_or(cfg.gwas_schema, ingest::SourceKind::GwasCatalog),
                    cfg.gwas, work / "gwas.rec", iopts)
            .to_json();
    report["ingest"] = ingest_report;
    report["stages"].push_back(stage);
    lap(stage);

    stage = "join";
    JoinStageOptions jopts;
    jopts.strict = cfg.strict;
    jopts.external = cfg.external_join;
    jopts.partition_by_chrom = cfg.partition_by_chrom;
    jopts.threads = cfg.threads;
    jopts.tmp_dir = work;
    report["join"] = join_files(work / "favor.rec", work / "clinvar.rec", work / "gwas.rec", work / "joined.rec", jopts)
                         .to_json();
    report["stages"].push_back(stage);
    lap(stage);

    stage = "annotate";
    const auto tconf = cfg.template_config ? annotate::TemplateConfig::load(*cfg.template_config)
                                           : annotate::TemplateConfig{};
    const auto tokenizer = annotate::make_tokenizer(cfg.tokenizer);
    const auto n_annot = annotate_file(work / "joined.rec", tconf, *tokenizer, work / "annotations.jsonl");
    const auto annotations = read_annotations(work / "annotations.jsonl");
    report["annotate"] = {{"records", n_annot},
                          {"tokenizer", tokenizer->name()},
                          {"token_stats", annotation_token_stats(annotations, cfg.bin_width).to_json()}};
    report["stages"].push_back(stage);
    lap(stage);

    stage = "embed";
    auto backend = embed::make_backend(cfg.backend);
    embed::EmbedOptions eopts;
    eopts.limits = cfg.limits;
    eopts.inflight = backend->concurrent() ? cfg.inflight : 1;
    if (cfg.journal) eopts.journal = work / "embed.journal";
    eopts.write.records_per_shard = cfg.records_per_shard;
    const auto store_dir = cfg.resolved_store_dir();
    const auto er = embed::embed_to_store(annotations, *backend, store_dir, eopts);
    report["embed"] = {{"model_id", er.manifest.model_id},   {"dim", er.manifest.dim},
                       {"records", er.records},              {"batches", er.batches},
                       {"resumed_batches", er.resumed_batches}, {"oversize_batches", er.oversize_batches},
                       {"tokens", er.tokens},                {"shards", er.manifest.shards.size()}};
    report["stages"].push_back(stage);
    lap(stage);

    const auto store = store::EmbeddingStore::open(store_dir);

    if (cfg.dosages) {
      stage = "aggregate";
      const auto matrix = aggregate::load_dosages(*cfg.dosages, cfg.dosage_keys);
      aggregate::AggregateOptions aopts;
      aopts.policy = aggregate::parse_missing_policy(cfg.missing_policy);
      aopts.threads = cfg.threads;
      const auto cohort = aggregate::aggregate_cohort(matrix, store, aopts);
      const auto m = aggregate::write_cohort_store(cohort, work / "individuals", store.manifest().model_id, true);
      report["aggregate"] = {{"samples", matrix.samples()},
                             {"variants", matrix.variants()},
                             {"flipped_variants", cohort.flipped_variants},
                             {"all_zero_samples", cohort.all_zero_count()},
                             {"written", m.record_count}};
      report["stages"].push_back(stage);
      lap(stage);
    }

    stage = "eval";
    json evals = json::array();
    for (const auto& t : cfg.eval_tasks) {
      eval::EvalOptions opts;
      opts.forest.trees = cfg.trees;
      opts.forest.max_depth = cfg.max_depth;
      opts.threads = cfg.threads;
      const auto task = eval::EvalTask::parse(t);
      const auto er2 = eval::evaluate_task(store, task, cfg.n_train, cfg.seed, opts);
      std::ofstream tsv(work / ("confusion_" + task.name() + ".tsv"), std::ios::trunc);
      er2.write_confusion_tsv(tsv);
      evals.push_back(er2.to_json());
    }
    report["eval"] = evals;
    report["stages"].push_back(stage);
    lap(stage);
    report["status"] = "ok";
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.category());
    report["status"] = "failed";
    report["error"] = {{"stage", stage}, {"message", e.what()}};
    log::error("pipeline.failed", {{"stage", stage}, {"message", e.what()}});
  } catch (const std::exception& e) {
    result.exit_code = 2;
    report["status"] = "failed";
    report["error"] = {{"stage", stage}, {"message", e.what()}};
    log::error("pipeline.failed", {{"stage", stage}, {"message", e.what()}});
  }
  if (!cfg.work_dir.empty() && fs::is_directory(cfg.work_dir)) {
    write_json(cfg.work_dir / "run_report.json", report);
    write_json(cfg.work_dir / "run_timings.json", result.timings);
  }
  return result;
}

}  // namespace varembed::pipeline
