#include "varembed/eval/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "varembed/core/errors.hpp"
#include "varembed/core/parallel.hpp"
#include "varembed/core/rng.hpp"

namespace varembed::eval {

std::string ForestParams::describe(std::size_t dim) const {
  const std::size_t mf = max_features ? max_features : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(dim))));
  return "random_forest(trees=" + std::to_string(trees) + ",max_depth=" + std::to_string(max_depth) +
         ",max_features=" + std::to_string(mf) + ",criterion=gini,bootstrap=" + (bootstrap ? "true" : "false") +
         ",seed=" + std::to_string(seed) + ")";
}

namespace {

struct Split {
  int feature = -1;
  float threshold = 0.0f;
  double score = -1.0;  // Σ_side (Σ_c n_c²) / n_side; higher is purer
  std::size_t left_count = 0;
};

}  // namespace

RandomForest::Tree RandomForest::fit_tree(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                          const ForestParams& params, std::size_t max_features,
                                          std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = x.rows;
  std::vector<std::uint32_t> samples(n);
  if (params.bootstrap) {
    for (auto& s : samples) s = static_cast<std::uint32_t>(rng.uniform(n));
  } else {
    std::iota(samples.begin(), samples.end(), 0u);
  }

  Tree tree;
  std::vector<std::uint32_t> features(x.cols);
  std::vector<std::pair<float, int>> column;
  std::vector<std::uint64_t> total(n_classes), left(n_classes);

  auto make_leaf = [&](Node& node, std::span<const std::uint32_t> idx) {
    node.feature = -1;
    node.dist = static_cast<std::uint32_t>(tree.dists.size());
    tree.dists.resize(tree.dists.size() + n_classes, 0.0f);
    for (auto i : idx) tree.dists[node.dist + static_cast<std::size_t>(y[i])] += 1.0f;
    const float inv = 1.0f / static_cast<float>(idx.size());
    for (std::size_t c = 0; c < n_classes; ++c) tree.dists[node.dist + c] *= inv;
  };

  struct Pending {
    std::uint32_t node;
    std::size_t begin, end;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back(Node{});
  stack.push_back({0, 0, n});

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    std::span<std::uint32_t> idx(samples.data() + job.begin, job.end - job.begin);
    const std::uint16_t depth = tree.nodes[job.node].depth;

    std::fill(total.begin(), total.end(), 0);
    for (auto i : idx) ++total[static_cast<std::size_t>(y[i])];
    const bool pure = std::count_if(total.begin(), total.end(), [](std::uint64_t c) { return c > 0; }) <= 1;
    if (pure || depth >= params.max_depth || idx.size() < params.min_samples_split) {
      make_leaf(tree.nodes[job.node], idx);
      continue;
    }
    double parent_sq = 0.0;
    for (auto c : total) parent_sq += double(c) * double(c);
    const double parent_score = parent_sq / double(idx.size());

    // Partial Fisher–Yates draw of the candidate feature subset.
    std::iota(features.begin(), features.end(), 0u);
    Split best;
    for (std::size_t k = 0; k < max_features; ++k) {
      const std::size_t j = k + rng.uniform(features.size() - k);
      std::swap(features[k], features[j]);
      const std::uint32_t f = features[k];

      column.clear();
      for (auto i : idx) column.emplace_back(x.data[std::size_t(i) * x.cols + f], y[i]);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left.begin(), left.end(), 0);
      double left_sq = 0.0, right_sq = parent_sq;
      const double m = double(column.size());
      for (std::size_t p = 0; p + 1 < column.size(); ++p) {
        const auto c = static_cast<std::size_t>(column[p].second);
        // (l+1)² − l² and (r−1)² − r², with r = total − l.
        const double l = double(left[c]), r = double(total[c] - left[c]);
        left_sq += 2.0 * l + 1.0;
        right_sq += -2.0 * r + 1.0;
        ++left[c];
        if (column[p].first == column[p + 1].first) continue;
        const double nl = double(p + 1), nr = m - nl;
        const double score = left_sq / nl + right_sq / nr;
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(f);
          const float a = column[p].first, b = column[p + 1].first;
          float t = a + (b - a) * 0.5f;
          if (!(t < b)) t = a;  // midpoint rounded up onto b
          best.threshold = t;
          best.left_count = p + 1;
        }
      }
    }
    if (best.feature < 0 || best.score <= parent_score + 1e-12) {
      make_leaf(tree.nodes[job.node], idx);
      continue;
    }
    auto mid = std::partition(idx.begin(), idx.end(), [&](std::uint32_t i) {
      return x.data[std::size_t(i) * x.cols + std::size_t(best.feature)] <= best.threshold;
    });
    const std::size_t split_at = job.begin + static_cast<std::size_t>(mid - idx.begin());
    const auto l = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back(Node{});
    tree.nodes.push_back(Node{});
    tree.nodes[l].depth = tree.nodes[l + 1].depth = static_cast<std::uint16_t>(depth + 1);
    Node& node = tree.nodes[job.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = l + 1;
    stack.push_back({l + 1, split_at, job.end});
    stack.push_back({l, job.begin, split_at});
  }
  return tree;
}

RandomForest RandomForest::train(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                 const ForestParams& params) {
  if (x.rows != y.size() || x.rows == 0 || x.cols == 0) {
    throw PreconditionError("feature matrix and labels must be non-empty and aligned");
  }
  if (params.trees == 0 || params.max_depth == 0) throw ConfigError("trees and max_depth must be >= 1");
  std::vector<std::size_t> present(n_classes, 0);
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw PreconditionError("label " + std::to_string(label) + " outside [0, " + std::to_string(n_classes) + ")");
    }
    ++present[static_cast<std::size_t>(label)];
  }
  if (std::count_if(present.begin(), present.end(), [](std::size_t c) { return c > 0; }) < 2) {
    throw DegenerateLabels("training labels contain a single class");
  }
  std::size_t mf = params.max_features;
  if (mf == 0) mf = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(x.cols))));
  mf = std::min(mf, x.cols);

  RandomForest forest;
  forest.n_classes_ = n_classes;
  forest.dim_ = x.cols;
  forest.trees_.resize(params.trees);
  parallel_for(params.trees, params.threads, [&](std::size_t t) {
    forest.trees_[t] = fit_tree(x, y, n_classes, params, mf, mix_seed(params.seed, t));
  });
  return forest;
}

std::vector<double> RandomForest::predict_proba(std::span<const float> row) const {
  if (row.size() != dim_) throw DimMismatch("forest expects " + std::to_string(dim_) + " features");
  std::vector<double> acc(n_classes_, 0.0);
  for (const auto& tree : trees_) {
    std::uint32_t i = 0;
    while (tree.nodes[i].feature >= 0) {
      const Node& node = tree.nodes[i];
      i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    const float* d = tree.dists.data() + tree.nodes[i].dist;
    for (std::size_t c = 0; c < n_classes_; ++c) acc[c] += d[c];
  }
  for (auto& a : acc) a /= double(trees_.size());
  return acc;
}

int RandomForest::predict(std::span<const float> row) const {
  const auto p = predict_proba(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<int> RandomForest::predict_all(const Matrix& x, std::size_t threads) const {
  std::vector<int> out(x.rows);
  parallel_blocks(x.rows, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = predict(x.row(i));
  });
  return out;
}

std::size_t RandomForest::max_depth_reached() const {
  std::size_t d = 0;
  for (const auto& t : trees_) {
    for (const auto& n : t.nodes) d = std::max<std::size_t>(d, n.depth);
  }
  return d;
}

}  // namespace varembed::eval
