// varembed: command-line front end for every pipeline stage.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "varembed/aggregate/aggregate.hpp"
#include "varembed/core/errors.hpp"
#include "varembed/core/log.hpp"
#include "varembed/embed/backend.hpp"
#include "varembed/embed/cost.hpp"
#include "varembed/embed/runner.hpp"
#include "varembed/eval/eval.hpp"
#include "varembed/pipeline/pipeline.hpp"
#include "varembed/pipeline/stages.hpp"
#include "varembed/store/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace varembed;

namespace {

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Backend: return 3;
  }
  return 2;
}

/// Writes to `path`, or stdout when empty / "-".
void emit_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os << j.dump(2) << '\n';
}

struct CostArgs {
  std::string annotations;
  std::uint64_t tokens = 0;
  bool tokens_set = false;
  std::string price = "0.065";
  std::uint64_t scale = 1;
  std::string out;
};

void add_cost_options(CLI::App* cmd, CostArgs& a) {
  cmd->add_option("--annotations", a.annotations, "Annotation JSON-lines whose token counts are summed");
  cmd->add_option("--tokens", a.tokens, "Known total token count")->each([&](const std::string&) { a.tokens_set = true; });
  cmd->add_option("--price-per-million", a.price, "USD per 1M tokens")->capture_default_str();
  cmd->add_option("--scale", a.scale, "Multiply the token total (e.g. extrapolating to a larger variant set)")
      ->capture_default_str();
  cmd->add_option("--out", a.out, "Output JSON (default stdout)");
}

void run_cost(const CostArgs& a) {
  if (a.annotations.empty() == !a.tokens_set) throw ConfigError("give exactly one of --annotations or --tokens");
  if (a.scale == 0) throw ConfigError("--scale must be >= 1");
  const std::uint64_t base = a.tokens_set ? a.tokens : pipeline::total_tokens(a.annotations);
  if (base > UINT64_MAX / a.scale) throw ConfigError("token total overflows");
  const auto est = embed::estimate_cost(base * a.scale, embed::UnitPrice::parse_usd_per_million(a.price));
  auto j = est.to_json();
  j["base_tokens"] = base;
  j["scale"] = a.scale;
  emit_json(a.out, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variant annotation embedding pipeline"};
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  app.require_subcommand(1);
  std::string log_level = "info";
  std::size_t threads = 1;
  app.add_option("--log-level", log_level, "debug|info|warn|error|off")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a source table into a typed record file");
  std::string ing_source, ing_schema, ing_input, ing_out, ing_report, ing_tiers;
  bool ing_strict = false;
  ingest_cmd->add_option("--source", ing_source, "favor|clinvar|gwas")->required();
  ingest_cmd->add_option("--schema", ing_schema, "Schema JSON (default: bundled)");
  ingest_cmd->add_option("--input", ing_input)->required();
  ingest_cmd->add_option("--out", ing_out, "Record file")->required();
  ingest_cmd->add_option("--report", ing_report, "Skip report JSON (default stdout)");
  ingest_cmd->add_option("--review-tiers", ing_tiers, "ClinVar review-status tier table");
  ingest_cmd->add_flag("--strict", ing_strict);

  // join
  auto* join_cmd = app.add_subcommand("join", "Left-join ClinVar and GWAS onto FAVOR");
  std::string j_favor, j_clinvar, j_gwas, j_out, j_report;
  bool j_strict = false, j_partition = false, j_external = false;
  std::size_t j_run_mb = 64;
  join_cmd->add_option("--favor", j_favor)->required();
  join_cmd->add_option("--clinvar", j_clinvar)->required();
  join_cmd->add_option("--gwas", j_gwas)->required();
  join_cmd->add_option("--out", j_out)->required();
  join_cmd->add_option("--report", j_report, "Match report JSON (default stdout)");
  join_cmd->add_flag("--strict", j_strict);
  join_cmd->add_flag("--partition-by-chrom", j_partition);
  join_cmd->add_flag("--external", j_external, "Sort-merge join with bounded memory");
  join_cmd->add_option("--run-mb", j_run_mb, "External sort run budget (MiB)")->capture_default_str();

  // annotate
  auto* annotate_cmd = app.add_subcommand("annotate", "Render annotation texts");
  std::string a_joined, a_template, a_tokenizer = "ws", a_out;
  annotate_cmd->add_option("--joined", a_joined)->required();
  annotate_cmd->add_option("--template", a_template, "Template config JSON (default: built-in)");
  annotate_cmd->add_option("--tokenizer", a_tokenizer, "ws | bpe:<vocab>")->capture_default_str();
  annotate_cmd->add_option("--out", a_out, "JSON-lines output")->required();

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Token-count statistics");
  std::string s_annotations, s_out;
  std::uint64_t s_bin = 10;
  stats_cmd->add_option("--annotations", s_annotations)->required();
  stats_cmd->add_option("--bin-width", s_bin)->capture_default_str()->check(CLI::PositiveNumber);
  stats_cmd->add_option("--out", s_out, "Output JSON (default stdout)");

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "Embed annotations into a store");
  std::string e_annotations, e_backend, e_journal, e_out, e_report, e_dtype = "f32";
  std::size_t e_max_items = 256, e_max_tokens = 8192, e_inflight = 4;
  std::uint64_t e_shard = store::kDefaultRecordsPerShard;
  embed_cmd->add_option("--annotations", e_annotations);
  embed_cmd->add_option("--backend", e_backend, "mock:seed=S,dim=D | informative:dim=D | remote:<cfg> | subprocess:<cfg>");
  embed_cmd->add_option("--max-items", e_max_items)->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--max-tokens", e_max_tokens)->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--inflight", e_inflight)->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--journal", e_journal, "Checkpoint journal for resumable runs");
  embed_cmd->add_option("--out", e_out, "Store directory");
  embed_cmd->add_option("--records-per-shard", e_shard)->capture_default_str()->check(CLI::PositiveNumber);
  embed_cmd->add_option("--dtype", e_dtype, "f32|f16")->capture_default_str();
  embed_cmd->add_option("--report", e_report, "Embed report JSON (default stdout)");
  auto* cost_sub = embed_cmd->add_subcommand("cost-estimate", "tokens x unit price");
  CostArgs embed_cost;
  add_cost_options(cost_sub, embed_cost);

  auto* cost_cmd = app.add_subcommand("cost-estimate", "tokens x unit price");
  CostArgs top_cost;
  add_cost_options(cost_cmd, top_cost);

  // store
  auto* store_cmd = app.add_subcommand("store", "Store maintenance");
  store_cmd->require_subcommand(1);
  auto* verify_cmd = store_cmd->add_subcommand("verify", "Check every shard checksum");
  std::string sv_dir;
  verify_cmd->add_option("dir", sv_dir)->required();
  auto* export_cmd = store_cmd->add_subcommand("export", "Dump records");
  std::string sx_dir, sx_format = "jsonl", sx_out;
  export_cmd->add_option("dir", sx_dir)->required();
  export_cmd->add_option("--format", sx_format, "jsonl|tsv")->capture_default_str();
  export_cmd->add_option("--out", sx_out, "Output file (default stdout)");
  auto* import_cmd = store_cmd->add_subcommand("import", "Build a store from JSON lines");
  std::string si_from = "jsonl", si_input, si_out, si_model = "imported", si_dtype = "f32", si_kind = "variant";
  std::uint64_t si_shard = store::kDefaultRecordsPerShard;
  import_cmd->add_option("--from", si_from, "jsonl")->capture_default_str();
  import_cmd->add_option("--input", si_input, "Input (default stdin)");
  import_cmd->add_option("--out", si_out)->required();
  import_cmd->add_option("--model-id", si_model)->capture_default_str();
  import_cmd->add_option("--dtype", si_dtype)->capture_default_str();
  import_cmd->add_option("--key-kind", si_kind, "variant|sample")->capture_default_str();
  import_cmd->add_option("--records-per-shard", si_shard)->capture_default_str()->check(CLI::PositiveNumber);

  // aggregate
  auto* agg_cmd = app.add_subcommand("aggregate", "Dosage-weighted individual embeddings");
  std::string g_dosages, g_store, g_keys, g_policy = "skip", g_weighting = "mean", g_out, g_report;
  std::size_t g_chunk = 1024;
  agg_cmd->add_option("--dosages", g_dosages, "Dosage matrix (binary or TSV)")->required();
  agg_cmd->add_option("--store", g_store)->required();
  agg_cmd->add_option("--keys", g_keys, "Variant key list (required for binary dosages)");
  agg_cmd->add_option("--policy", g_policy, "skip|zero")->capture_default_str();
  agg_cmd->add_option("--weighting", g_weighting, "mean|sum")->capture_default_str();
  agg_cmd->add_option("--chunk", g_chunk, "Variants per accumulation chunk")->capture_default_str()->check(CLI::PositiveNumber);
  agg_cmd->add_option("--out", g_out, "Store directory, or a .tsv file")->required();
  agg_cmd->add_option("--report", g_report, "Summary JSON (default stdout)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Random-forest baseline tasks");
  std::string v_store, v_task = "chromosome", v_out, v_confusion;
  std::size_t v_n_train = 10000, v_trees = 100, v_depth = 16, v_ablate = 0;
  std::uint64_t v_seed = 42;
  eval_cmd->add_option("--store", v_store)->required();
  eval_cmd->add_option("--task", v_task, "chromosome|ref-allele")->capture_default_str();
  eval_cmd->add_option("--n-train", v_n_train)->capture_default_str();
  eval_cmd->add_option("--seed", v_seed)->capture_default_str();
  eval_cmd->add_option("--trees", v_trees)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--max-depth", v_depth)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--ablate-leading", v_ablate, "Zero this many leading dimensions")->capture_default_str();
  eval_cmd->add_option("--out", v_out, "Report JSON (default stdout)");
  eval_cmd->add_option("--confusion", v_confusion, "Confusion matrix TSV");

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline");
  pipeline::PipelineConfig pc;
  std::string r_favor, r_clinvar, r_gwas, r_fs, r_cs, r_gs, r_tiers, r_template, r_work, r_store, r_dosages, r_keys;
  run_cmd->add_option("--favor", r_favor)->required();
  run_cmd->add_option("--clinvar", r_clinvar)->required();
  run_cmd->add_option("--gwas", r_gwas)->required();
  run_cmd->add_option("--favor-schema", r_fs);
  run_cmd->add_option("--clinvar-schema", r_cs);
  run_cmd->add_option("--gwas-schema", r_gs);
  run_cmd->add_option("--review-tiers", r_tiers);
  run_cmd->add_option("--template", r_template);
  run_cmd->add_option("--tokenizer", pc.tokenizer)->capture_default_str();
  run_cmd->add_option("--backend", pc.backend)->capture_default_str();
  run_cmd->add_option("--work-dir", r_work)->required();
  run_cmd->add_option("--store", r_store, "Store directory (default <work-dir>/store)");
  run_cmd->add_flag("--strict", pc.strict);
  run_cmd->add_flag("--external-join", pc.external_join);
  run_cmd->add_flag("--partition-by-chrom", pc.partition_by_chrom);
  run_cmd->add_option("--max-items", pc.limits.max_items)->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-tokens", pc.limits.max_tokens)->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--inflight", pc.inflight)->capture_default_str()->check(CLI::PositiveNumber);
  bool r_no_journal = false;
  run_cmd->add_flag("--no-journal", r_no_journal);
  run_cmd->add_option("--records-per-shard", pc.records_per_shard)->capture_default_str();
  run_cmd->add_option("--bin-width", pc.bin_width)->capture_default_str();
  run_cmd->add_option("--eval-task", pc.eval_tasks, "Repeatable; chromosome|ref-allele")->capture_default_str();
  run_cmd->add_option("--n-train", pc.n_train)->capture_default_str();
  run_cmd->add_option("--seed", pc.seed)->capture_default_str();
  run_cmd->add_option("--trees", pc.trees)->capture_default_str();
  run_cmd->add_option("--max-depth", pc.max_depth)->capture_default_str();
  run_cmd->add_option("--dosages", r_dosages);
  run_cmd->add_option("--dosage-keys", r_keys);
  run_cmd->add_option("--policy", pc.missing_policy)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    log::set_level(log::parse_level(log_level));

    if (*ingest_cmd) {
      const auto kind = ingest::parse_source_kind(ing_source);
      pipeline::IngestStageOptions o;
      o.strict = ing_strict;
      if (!ing_tiers.empty()) o.review_tiers = ing_tiers;
      const fs::path schema = ing_schema.empty() ? pipeline::default_schema(kind) : fs::path(ing_schema);
      const auto r = pipeline::ingest_file(kind, schema, ing_input, ing_out, o);
      emit_json(ing_report, r.to_json());
    } else if (*join_cmd) {
      pipeline::JoinStageOptions o;
      o.strict = j_strict;
      o.partition_by_chrom = j_partition;
      o.external = j_external;
      o.threads = threads;
      o.max_run_bytes = j_run_mb << 20;
      o.tmp_dir = fs::path(j_out).parent_path().empty() ? fs::current_path() : fs::path(j_out).parent_path();
      emit_json(j_report, pipeline::join_files(j_favor, j_clinvar, j_gwas, j_out, o).to_json());
    } else if (*annotate_cmd) {
      const auto cfg = a_template.empty() ? annotate::TemplateConfig{} : annotate::TemplateConfig::load(a_template);
      const auto tok = annotate::make_tokenizer(a_tokenizer);
      const auto n = pipeline::annotate_file(a_joined, cfg, *tok, a_out);
      log::info("annotate.done", {{"records", n}, {"tokenizer", tok->name()}});
    } else if (*stats_cmd) {
      const auto ann = pipeline::read_annotations(s_annotations);
      emit_json(s_out, pipeline::annotation_token_stats(ann, s_bin).to_json());
    } else if (*embed_cmd) {
      if (*cost_sub) {
        run_cost(embed_cost);
        return 0;
      }
      if (e_annotations.empty() || e_backend.empty() || e_out.empty()) {
        throw ConfigError("embed needs --annotations, --backend and --out");
      }
      const auto ann = pipeline::read_annotations(e_annotations);
      auto backend = embed::make_backend(e_backend);
      embed::EmbedOptions o;
      o.limits = {e_max_items, e_max_tokens};
      o.inflight = backend->concurrent() ? e_inflight : 1;
      if (!e_journal.empty()) o.journal = e_journal;
      o.write.records_per_shard = e_shard;
      o.write.dtype = store::parse_dtype(e_dtype);
      o.progress = [](std::size_t done, std::size_t total) {
        log::debug("embed.progress", {{"committed", done}, {"batches", total}});
      };
      const auto r = embed::embed_to_store(ann, *backend, e_out, o);
      emit_json(e_report, {{"model_id", r.manifest.model_id},
                           {"dim", r.manifest.dim},
                           {"records", r.records},
                           {"batches", r.batches},
                           {"resumed_batches", r.resumed_batches},
                           {"oversize_batches", r.oversize_batches},
                           {"tokens", r.tokens}});
    } else if (*cost_cmd) {
      run_cost(top_cost);
    } else if (*store_cmd) {
      if (*verify_cmd) {
        const auto s = store::EmbeddingStore::open(sv_dir);
        const auto problems = s.verify();
        emit_json("", {{"records", s.size()}, {"shards", s.manifest().shards.size()}, {"problems", problems}});
        if (!problems.empty()) return 2;
      } else if (*export_cmd) {
        const auto s = store::EmbeddingStore::open(sx_dir);
        const auto fmt = store::parse_export_format(sx_format);
        if (sx_out.empty() || sx_out == "-") {
          store::export_store(s, std::cout, fmt);
        } else {
          std::ofstream os(sx_out, std::ios::trunc);
          if (!os) throw IoError("cannot write " + sx_out);
          store::export_store(s, os, fmt);
        }
      } else if (*import_cmd) {
        if (si_from != "jsonl") throw ConfigError("only --from jsonl is supported");
        store::ImportOptions o;
        o.model_id = si_model;
        o.write.dtype = store::parse_dtype(si_dtype);
        o.write.key_kind = store::parse_key_kind(si_kind);
        o.write.records_per_shard = si_shard;
        store::Manifest m;
        if (si_input.empty() || si_input == "-") {
          m = store::import_jsonl(std::cin, si_out, o);
        } else {
          std::ifstream is(si_input);
          if (!is) throw IoError("cannot open " + si_input);
          m = store::import_jsonl(is, si_out, o);
        }
        emit_json("", {{"records", m.record_count}, {"dim", m.dim}, {"shards", m.shards.size()}});
      }
    } else if (*agg_cmd) {
      const auto s = store::EmbeddingStore::open(g_store);
      const auto matrix = aggregate::load_dosages(
          g_dosages, g_keys.empty() ? std::nullopt : std::optional<fs::path>(g_keys));
      aggregate::AggregateOptions o;
      o.policy = aggregate::parse_missing_policy(g_policy);
      if (g_weighting == "mean") {
        o.weighting = aggregate::Weighting::Mean;
      } else if (g_weighting == "sum") {
        o.weighting = aggregate::Weighting::Sum;
      } else {
        throw ConfigError("unknown weighting '" + g_weighting + "' (mean|sum)");
      }
      o.chunk_variants = g_chunk;
      o.threads = threads;
      const auto cohort = aggregate::aggregate_cohort(matrix, s, o);
      for (std::size_t i = 0; i < cohort.sample_ids.size(); ++i) {
        if (cohort.status[i] == aggregate::SampleStatus::AllZeroDosage) {
          log::warn("aggregate.all_zero_dosage", {{"sample", cohort.sample_ids[i]}});
        }
      }
      if (fs::path(g_out).extension() == ".tsv") {
        std::ofstream os(g_out, std::ios::trunc);
        aggregate::write_cohort_tsv(cohort, os);
      } else {
        aggregate::write_cohort_store(cohort, g_out, s.manifest().model_id, true);
      }
      emit_json(g_report, {{"samples", matrix.samples()},
                           {"variants", matrix.variants()},
                           {"flipped_variants", cohort.flipped_variants},
                           {"all_zero_samples", cohort.all_zero_count()}});
    } else if (*eval_cmd) {
      const auto s = store::EmbeddingStore::open(v_store);
      eval::EvalOptions o;
      o.forest.trees = v_trees;
      o.forest.max_depth = v_depth;
      o.ablate_leading = v_ablate;
      o.threads = threads;
      const auto r = eval::evaluate_task(s, eval::EvalTask::parse(v_task), v_n_train, v_seed, o);
      emit_json(v_out, r.to_json());
      if (!v_confusion.empty()) {
        std::ofstream os(v_confusion, std::ios::trunc);
        r.write_confusion_tsv(os);
      }
    } else if (*run_cmd) {
      pc.favor = r_favor;
      pc.clinvar = r_clinvar;
      pc.gwas = r_gwas;
      pc.favor_schema = r_fs;
      pc.clinvar_schema = r_cs;
      pc.gwas_schema = r_gs;
      if (!r_tiers.empty()) pc.review_tiers = r_tiers;
      if (!r_template.empty()) pc.template_config = r_template;
      pc.work_dir = r_work;
      pc.store_dir = r_store;
      pc.threads = threads;
      pc.journal = !r_no_journal;
      if (!r_dosages.empty()) pc.dosages = r_dosages;
      if (!r_keys.empty()) pc.dosage_keys = r_keys;
      const auto result = pipeline::run_pipeline(pc);
      std::cout << result.report.dump(2) << '\n';
      return result.exit_code;
    }
  } catch (const Error& e) {
    log::error("command.failed", {{"message", e.what()}});
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    log::error("command.failed", {{"message", e.what()}});
    return 2;
  }
  return 0;
}
