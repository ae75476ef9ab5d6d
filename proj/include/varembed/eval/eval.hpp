#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varembed/core/variant_key.hpp"
#include "varembed/eval/forest.hpp"
#include "varembed/store/store.hpp"

namespace varembed::eval {

enum class TaskKind { Chromosome, RefAllele };

/// Label derivation is a pure function of the key; nothing is read from the
/// embedding.
struct EvalTask {
  TaskKind kind = TaskKind::Chromosome;

  static EvalTask parse(std::string_view name);  // "chromosome" | "ref-allele"
  std::string name() const;
  /// Canonical class order: autosomes 1..22, or A C G T.
  std::vector<std::string> classes() const;
  /// nullopt when the key falls outside the task (sex/mito chromosomes,
  /// non-SNV or non-ACGT reference for RefAllele).
  std::optional<int> label_of(const VariantKey& key) const;
};

/// Uniform sample of n_train indices out of [0, n) without replacement; eval
/// is the complement. Both are returned sorted. Throws InsufficientData unless
/// n_train < n.
struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
IndexSplit split_indices(std::size_t n, std::size_t n_train, std::uint64_t seed);

template <typename K>
std::pair<std::vector<K>, std::vector<K>> split_train_eval(const std::vector<K>& keys, std::size_t n_train,
                                                           std::uint64_t seed) {
  const auto s = split_indices(keys.size(), n_train, seed);
  std::pair<std::vector<K>, std::vector<K>> out;
  out.first.reserve(s.train.size());
  out.second.reserve(s.eval.size());
  for (auto i : s.train) out.first.push_back(keys[i]);
  for (auto i : s.eval) out.second.push_back(keys[i]);
  return out;
}

struct EvalReport {
  std::string task;
  std::vector<std::string> classes;
  double accuracy = 0.0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
  std::size_t n_train = 0;
  std::size_t n_eval = 0;
  std::uint64_t seed = 0;
  std::string model_desc;
  std::size_t filtered = 0;  // store records outside the task's class set
  std::size_t ablated_dims = 0;

  std::uint64_t correct() const;
  std::uint64_t total() const;
  nlohmann::json to_json() const;
  /// Header "true\\predicted<TAB>class..." then one row per true class.
  void write_confusion_tsv(std::ostream& out) const;
};

struct EvalOptions {
  ForestParams forest;
  /// Zero this many leading coordinates before training (ablation).
  std::size_t ablate_leading = 0;
  std::size_t threads = 1;
};

/// Split, train, predict on the complement, report.
EvalReport evaluate_task(const store::EmbeddingStore& store, const EvalTask& task, std::size_t n_train,
                         std::uint64_t seed, const EvalOptions& options = {});

/// Same as evaluate_task but on in-memory rows (labels already derived).
EvalReport evaluate_matrix(const Matrix& x, const std::vector<int>& labels, const EvalTask& task,
                           std::size_t n_train, std::uint64_t seed, const EvalOptions& options = {});

/// Two-sided binomial interval for the chance accuracy 1/k at n trials,
/// normal approximation with continuity correction.
std::pair<double, double> chance_band(std::size_t n, std::size_t classes, double z = 2.5758293035489);

}  // namespace varembed::eval
