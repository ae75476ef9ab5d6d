#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace varembed::eval {

/// Dense row-major feature matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}
  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 16;
  std::size_t max_features = 0;  // 0 = floor(sqrt(dim))
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::string describe(std::size_t dim) const;
};

/// Gini-split CART ensemble over bootstrap samples; soft voting.
class RandomForest {
 public:
  /// Labels must be in [0, n_classes). Throws DegenerateLabels when fewer than
  /// two classes are present, PreconditionError on shape problems.
  static RandomForest train(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                            const ForestParams& params = {});

  std::vector<double> predict_proba(std::span<const float> row) const;
  /// argmax of the averaged class distribution; ties go to the lowest class.
  int predict(std::span<const float> row) const;
  std::vector<int> predict_all(const Matrix& x, std::size_t threads = 1) const;

  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t n_trees() const noexcept { return trees_.size(); }
  std::size_t max_depth_reached() const;

 private:
  struct Node {
    // Internal: feature >= 0, go left when value <= threshold.
    std::int32_t feature = -1;
    float threshold = 0.0f;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t dist = 0;  // leaf: offset into the tree's distribution pool
    std::uint16_t depth = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<float> dists;
  };
  static Tree fit_tree(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                       const ForestParams& params, std::size_t max_features, std::uint64_t seed);

  std::size_t n_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

}  // namespace varembed::eval
