#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afrf/augment.hpp"
#include "afrf/fpca.hpp"

namespace afrf {

enum class Impurity { Gini, Entropy };

std::string to_string(Impurity kind);
Impurity parse_impurity(const std::string& name);

// Gini 1 - sum f^2 or entropy -sum f ln f of a class-count vector.
double impurity(std::span<const int> counts, Impurity kind);

struct Split {
  int column = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exhaustive search over midpoints between consecutive distinct values of
/// each candidate column. Rows with value < threshold go left. Returns the
/// split with the largest impurity decrease; ties go to the lower column, then
/// the lower threshold. No split when the node is pure or no candidate has
/// positive gain with both children holding >= min_leaf rows.
std::optional<Split> best_split(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes,
                                std::span<const int> rows, std::span<const int> candidate_cols,
                                Impurity kind, int min_leaf = 1);

std::optional<Split> best_split(const AugmentedFeatures& features, std::span<const int> rows,
                                std::span<const int> candidate_cols, Impurity kind,
                                int min_leaf = 1);

struct GrowOptions {
  Impurity impurity = Impurity::Gini;
  int min_split = 20;
  int min_leaf = 7;
  int max_depth = 30;

  // Defaults for a stand-alone pruned tree.
  static GrowOptions standalone() { return {}; }
  // Fully grown trees inside an ensemble.
  static GrowOptions ensemble() { return {Impurity::Gini, 2, 1, 1000}; }

  void validate() const;
};

enum class PruneRule { Min, OneSe };

std::string to_string(PruneRule rule);
PruneRule parse_prune_rule(const std::string& name);

struct PruneOptions {
  int folds = 10;
  PruneRule rule = PruneRule::Min;
  std::uint64_t seed = 1;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 0;
  int origin = 0;  // index of this node in the unpruned tree
  double impurity = 0.0;
  std::vector<int> counts;
  int label = 0;

  bool is_leaf() const { return feature < 0; }
  int size() const;
};

// One row of the cost-complexity table.
struct ComplexityRow {
  double alpha = 0.0;
  int leaves = 0;
  double cv_error = 0.0;
  double cv_se = 0.0;
};

/// Binary classification tree; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;
  int n_classes = 0;
  std::vector<ColumnMeta> columns;
  GrowOptions options;
  std::vector<ComplexityRow> complexity_table;

  // Leaf reached by a row whose column j has value value_of(j).
  template <typename ValueOf>
  int leaf_for(ValueOf&& value_of) const {
    int id = 0;
    while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
      const auto& node = nodes[static_cast<std::size_t>(id)];
      id = value_of(node.feature) < node.threshold ? node.left : node.right;
    }
    return id;
  }

  int predict_row(const Eigen::MatrixXd& x, Eigen::Index row) const {
    return nodes[static_cast<std::size_t>(
                     leaf_for([&](int j) { return x(row, j); }))]
        .label;
  }

  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  int leaf_count() const;
  int internal_count() const;
  int depth() const;
  // Root-to-node index path, inclusive.
  std::vector<int> path_to(int node) const;
  // Sorted distinct split columns.
  std::vector<int> used_columns() const;
};

// Per-node candidate columns (ensemble mode). Called once per node that is
// eligible for splitting, in growth order.
using ColumnSampler = std::function<std::vector<int>()>;

// Grows on the given row multiset (duplicates allowed, as in bootstrap samples).
Tree grow(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes,
          std::span<const int> rows, const GrowOptions& options,
          const ColumnSampler& sampler = {});

Tree grow(const AugmentedFeatures& features, const GrowOptions& options,
          const ColumnSampler& sampler = {});

/// Weakest-link pruning sequence: steps[k] collapses the marked internal
/// nodes; alphas strictly increase and the last step is the root leaf.
struct PruningStep {
  double alpha = 0.0;
  std::vector<char> collapsed;  // indexed by node
  int leaves = 0;
};
std::vector<PruningStep> cost_complexity_path(const Tree& tree);

// Subtree minimizing cost + alpha * leaves (alpha = infinity -> root leaf).
Tree prune_at_alpha(const Tree& tree, double alpha);

// Compacts `tree` with the marked nodes turned into leaves.
Tree collapse(const Tree& tree, const std::vector<char>& collapsed);

/// Cost-complexity pruning with the subtree chosen by stratified k-fold
/// cross-validation. `features` must be the rows the tree was grown on.
Tree prune(const Tree& tree, const AugmentedFeatures& features, const PruneOptions& options);

std::vector<int> predict(const Tree& tree, const AugmentedFeatures& features);

// Stratified fold index per row (0..folds-1).
std::vector<int> stratified_folds(std::span<const int> labels, int n_classes, int folds,
                                  std::uint64_t seed);

struct SeparationTerm {
  int node = 0;
  int component = 0;
  int deriv = 0;
  double threshold = 0.0;
};

/// psi_z(t) = sum over the root-to-z splits (z included) of
/// threshold * xi_k^(r)(t).
struct SeparationCurve {
  int node = 0;
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
  std::vector<SeparationTerm> terms;
};

SeparationCurve separation_curve(const Tree& tree, int node, std::span<const FpcaModel> models,
                                 const Eigen::VectorXd& grid);

// One curve per internal node, in node order.
std::vector<SeparationCurve> separation_curves(const Tree& tree,
                                               std::span<const FpcaModel> models,
                                               const Eigen::VectorXd& grid);

}  // namespace afrf
