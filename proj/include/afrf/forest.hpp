#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/cart.hpp"

namespace afrf {

struct ForestOptions {
  int trees = 100;
  int mtry = 0;  // 0 selects default_mtry(columns)
  std::uint64_t seed = 1;
  bool bootstrap = true;  // false trains every tree on all rows (diagnostic)
  GrowOptions tree = GrowOptions::ensemble();
  unsigned threads = 1;  // 0 = hardware concurrency; results do not depend on it
};

/// Bootstrap ensemble of unpruned trees. inbag[h][i] is the number of times
/// row i was drawn for tree h; a row is out-of-bag for h when that is 0.
struct Forest {
  std::vector<Tree> trees;
  std::vector<std::vector<int>> inbag;
  int mtry = 0;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  int n_classes = 0;
  int n_train = 0;
  std::vector<ColumnMeta> columns;
  GrowOptions tree_options;

  int size() const { return static_cast<int>(trees.size()); }
  bool out_of_bag(int tree, int row) const {
    return inbag[static_cast<std::size_t>(tree)][static_cast<std::size_t>(row)] == 0;
  }
};

// round(sqrt(p)), at least 1.
int default_mtry(int n_columns);

Forest train_forest(const AugmentedFeatures& features, const ForestOptions& options);

// Reference bagging: every node considers all columns, no sampling.
Forest train_bagging(const AugmentedFeatures& features, const ForestOptions& options);

// Throws ValidationError unless `features` has the forest's training layout.
void check_layout(const Forest& forest, const AugmentedFeatures& features);

// Per-tree predicted labels, trees x rows.
std::vector<std::vector<int>> tree_predictions(const Forest& forest,
                                               const AugmentedFeatures& features);

// Vote fractions: row i, class c is (#trees predicting c) / H.
Eigen::MatrixXd predict_proba(const Forest& forest, const AugmentedFeatures& features);

std::vector<int> predict(const Forest& forest, const AugmentedFeatures& features);

// Per-row index of the maximum; ties go to the lowest index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

struct OobEstimate {
  double error = 0.0;
  int scored = 0;  // rows out-of-bag for at least one tree

  bool covered() const { return scored > 0; }
};

// Majority vote per row over the trees that did not draw it.
OobEstimate oob_error(const Forest& forest, const AugmentedFeatures& features);

double accuracy(std::span<const int> truth, std::span<const int> predicted);

}  // namespace afrf
