#include "varembed/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "varembed/core/errors.hpp"
#include "varembed/core/log.hpp"
#include "varembed/core/rng.hpp"

namespace varembed::eval {

EvalTask EvalTask::parse(std::string_view name) {
  if (name == "chromosome") return {TaskKind::Chromosome};
  if (name == "ref-allele" || name == "ref_allele") return {TaskKind::RefAllele};
  throw ConfigError("unknown eval task '" + std::string(name) + "' (chromosome|ref-allele)");
}

std::string EvalTask::name() const { return kind == TaskKind::Chromosome ? "chromosome" : "ref-allele"; }

std::vector<std::string> EvalTask::classes() const {
  if (kind == TaskKind::RefAllele) return {"A", "C", "G", "T"};
  std::vector<std::string> out;
  for (int r = 0; r < Chromosome::kAutosomes; ++r) out.emplace_back(Chromosome::from_rank(r).label());
  return out;
}

std::optional<int> EvalTask::label_of(const VariantKey& key) const {
  if (kind == TaskKind::Chromosome) {
    if (!key.chromosome().is_autosome()) return std::nullopt;
    return key.chromosome().rank();
  }
  if (!key.is_snv()) return std::nullopt;
  switch (key.ref()[0]) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return std::nullopt;
  }
}

IndexSplit split_indices(std::size_t n, std::size_t n_train, std::uint64_t seed) {
  if (n_train == 0 || n_train >= n) {
    throw InsufficientData("need n_train in [1, " + std::to_string(n) + "), got " + std::to_string(n_train));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < n_train; ++i) {
    std::swap(perm[i], perm[i + rng.uniform(n - i)]);
  }
  IndexSplit s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.eval.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.eval.begin(), s.eval.end());
  return s;
}

std::uint64_t EvalReport::correct() const {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i) c += confusion[i][i];
  return c;
}

std::uint64_t EvalReport::total() const {
  std::uint64_t t = 0;
  for (const auto& row : confusion) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

nlohmann::json EvalReport::to_json() const {
  return {{"task", task},
          {"classes", classes},
          {"accuracy", accuracy},
          {"correct", correct()},
          {"confusion", confusion},
          {"n_train", n_train},
          {"n_eval", n_eval},
          {"seed", seed},
          {"model_desc", model_desc},
          {"filtered", filtered},
          {"ablated_dims", ablated_dims}};
}

void EvalReport::write_confusion_tsv(std::ostream& out) const {
  out << "true\\predicted";
  for (const auto& c : classes) out << '\t' << c;
  out << '\n';
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out << classes[i];
    for (auto v : confusion[i]) out << '\t' << v;
    out << '\n';
  }
}

EvalReport evaluate_matrix(const Matrix& x, const std::vector<int>& labels, const EvalTask& task,
                           std::size_t n_train, std::uint64_t seed, const EvalOptions& options) {
  const auto classes = task.classes();
  const auto split = split_indices(x.rows, n_train, seed);
  const std::size_t ablate = std::min(options.ablate_leading, x.cols);

  auto gather = [&](const std::vector<std::size_t>& idx, Matrix& m, std::vector<int>& y) {
    m = Matrix(idx.size(), x.cols);
    y.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      auto src = x.row(idx[r]);
      auto dst = m.row(r);
      std::copy(src.begin(), src.end(), dst.begin());
      std::fill(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(ablate), 0.0f);
      y[r] = labels[idx[r]];
    }
  };
  Matrix xtrain, xeval;
  std::vector<int> ytrain, yeval;
  gather(split.train, xtrain, ytrain);
  gather(split.eval, xeval, yeval);

  ForestParams params = options.forest;
  params.seed = mix_seed(seed, 0x7265657366ULL);
  params.threads = std::max(params.threads, options.threads);
  const auto forest = RandomForest::train(xtrain, ytrain, classes.size(), params);
  const auto predicted = forest.predict_all(xeval, options.threads);

  EvalReport report;
  report.task = task.name();
  report.classes = classes;
  report.confusion.assign(classes.size(), std::vector<std::uint64_t>(classes.size(), 0));
  for (std::size_t i = 0; i < yeval.size(); ++i) {
    ++report.confusion[static_cast<std::size_t>(yeval[i])][static_cast<std::size_t>(predicted[i])];
  }
  report.n_train = xtrain.rows;
  report.n_eval = xeval.rows;
  report.seed = seed;
  params.threads = 1;
  report.model_desc = params.describe(x.cols);
  report.ablated_dims = ablate;
  report.accuracy = double(report.correct()) / double(report.total());
  return report;
}

EvalReport evaluate_task(const store::EmbeddingStore& store, const EvalTask& task, std::size_t n_train,
                         std::uint64_t seed, const EvalOptions& options) {
  if (store.manifest().key_kind != store::KeyKind::Variant) {
    throw ConfigError("eval needs a variant-keyed store");
  }
  const std::size_t dim = store.dim();
  std::vector<float> rows;
  std::vector<int> labels;
  std::size_t filtered = 0;
  store.scan(store::KeyRange::all(), [&](std::string_view key, std::span<const float> values) {
    const auto label = task.label_of(VariantKey::parse(key));
    if (!label) {
      ++filtered;
      return;
    }
    labels.push_back(*label);
    rows.insert(rows.end(), values.begin(), values.end());
  });
  if (filtered > 0) log::info("eval.filtered", {{"task", task.name()}, {"count", filtered}});
  if (labels.size() <= n_train) {
    throw InsufficientData("store has " + std::to_string(labels.size()) + " labelled records; need > " +
                           std::to_string(n_train));
  }
  Matrix x;
  x.rows = labels.size();
  x.cols = dim;
  x.data = std::move(rows);
  auto report = evaluate_matrix(x, labels, task, n_train, seed, options);
  report.filtered = filtered;
  return report;
}

std::pair<double, double> chance_band(std::size_t n, std::size_t classes, double z) {
  const double p = 1.0 / double(classes);
  const double sd = std::sqrt(p * (1.0 - p) / double(n));
  const double cc = 0.5 / double(n);
  return {std::max(0.0, p - z * sd - cc), std::min(1.0, p + z * sd + cc)};
}

}  // namespace varembed::eval
