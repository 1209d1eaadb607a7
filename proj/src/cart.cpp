#include "afrf/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "afrf/error.hpp"
#include "afrf/random.hpp"

namespace afrf {
namespace {

// Splits whose gain does not exceed this are treated as no improvement.
constexpr double kMinGain = 1e-12;

int majority(std::span<const int> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

TreeNode make_node(std::span<const int> y, int n_classes, std::span<const int> rows,
                   Impurity kind) {
  TreeNode node;
  node.counts.assign(static_cast<std::size_t>(n_classes), 0);
  for (const int r : rows) ++node.counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  node.impurity = rows.empty() ? 0.0 : impurity(node.counts, kind);
  node.label = majority(node.counts);
  return node;
}

// Reachable nodes of `tree` with `collapsed` nodes treated as leaves.
std::vector<char> reachable_nodes(const Tree& tree, const std::vector<char>& collapsed) {
  std::vector<char> reach(tree.nodes.size(), 0);
  reach[0] = 1;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (!reach[i] || node.is_leaf() || collapsed[i]) continue;
    reach[static_cast<std::size_t>(node.left)] = 1;
    reach[static_cast<std::size_t>(node.right)] = 1;
  }
  return reach;
}

int count_leaves(const Tree& tree, const std::vector<char>& collapsed) {
  const auto reach = reachable_nodes(tree, collapsed);
  int leaves = 0;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (reach[i] && (tree.nodes[i].is_leaf() || collapsed[i])) ++leaves;
  }
  return leaves;
}

int predict_collapsed(const Tree& tree, const std::vector<char>& collapsed,
                      const Eigen::MatrixXd& x, Eigen::Index row) {
  std::size_t id = 0;
  while (!tree.nodes[id].is_leaf() && !collapsed[id]) {
    const auto& node = tree.nodes[id];
    id = static_cast<std::size_t>(x(row, node.feature) < node.threshold ? node.left : node.right);
  }
  return tree.nodes[id].label;
}

const PruningStep& step_for_alpha(const std::vector<PruningStep>& path, double alpha) {
  std::size_t k = 0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    if (path[j].alpha <= alpha) k = j;
  }
  return path[k];
}

}  // namespace

std::string to_string(Impurity kind) { return kind == Impurity::Gini ? "gini" : "entropy"; }

Impurity parse_impurity(const std::string& name) {
  if (name == "gini") return Impurity::Gini;
  if (name == "entropy") return Impurity::Entropy;
  throw ValidationError("unknown impurity '" + name + "' (expected gini or entropy)");
}

std::string to_string(PruneRule rule) { return rule == PruneRule::Min ? "min" : "1se"; }

PruneRule parse_prune_rule(const std::string& name) {
  if (name == "min") return PruneRule::Min;
  if (name == "1se" || name == "one_se") return PruneRule::OneSe;
  throw ValidationError("unknown pruning rule '" + name + "' (expected min or 1se)");
}

double impurity(std::span<const int> counts, Impurity kind) {
  long total = 0;
  for (const int c : counts) {
    if (c < 0) throw ValidationError("class counts must be non-negative");
    total += c;
  }
  if (total == 0) throw ValidationError("impurity of an empty node");
  const double n = static_cast<double>(total);
  double acc = 0.0;
  if (kind == Impurity::Gini) {
    for (const int c : counts) {
      const double f = c / n;
      acc += f * f;
    }
    return 1.0 - acc;
  }
  for (const int c : counts) {
    if (c == 0) continue;
    const double f = c / n;
    acc -= f * std::log(f);
  }
  return acc;
}

std::optional<Split> best_split(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes,
                                std::span<const int> rows, std::span<const int> candidate_cols,
                                Impurity kind, int min_leaf) {
  const auto n = static_cast<int>(rows.size());
  if (n < 2 || candidate_cols.empty()) return std::nullopt;
  std::vector<int> parent(static_cast<std::size_t>(n_classes), 0);
  for (const int r : rows) ++parent[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])];
  if (*std::max_element(parent.begin(), parent.end()) == n) return std::nullopt;
  const double parent_impurity = impurity(parent, kind);

  std::vector<int> cols(candidate_cols.begin(), candidate_cols.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

  Split best;
  best.gain = kMinGain;
  bool found = false;
  std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n));
  std::vector<int> left(static_cast<std::size_t>(n_classes));
  std::vector<int> right(static_cast<std::size_t>(n_classes));
  for (const int col : cols) {
    for (int i = 0; i < n; ++i) {
      const int r = rows[static_cast<std::size_t>(i)];
      order[static_cast<std::size_t>(i)] = {x(r, col), y[static_cast<std::size_t>(r)]};
    }
    std::sort(order.begin(), order.end());
    std::fill(left.begin(), left.end(), 0);
    right = parent;
    for (int i = 0; i + 1 < n; ++i) {
      const auto [value, label] = order[static_cast<std::size_t>(i)];
      ++left[static_cast<std::size_t>(label)];
      --right[static_cast<std::size_t>(label)];
      const double next = order[static_cast<std::size_t>(i + 1)].first;
      if (!(value < next)) continue;
      const int n_left = i + 1;
      const int n_right = n - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const double gain =
          parent_impurity -
          (n_left * impurity(left, kind) + n_right * impurity(right, kind)) / n;
      if (gain > best.gain) {
        double threshold = 0.5 * (value + next);
        if (!(threshold > value)) threshold = next;
        best = {col, threshold, gain};
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

std::optional<Split> best_split(const AugmentedFeatures& features, std::span<const int> rows,
                                std::span<const int> candidate_cols, Impurity kind,
                                int min_leaf) {
  return best_split(features.matrix, features.labels, features.n_classes, rows, candidate_cols,
                    kind, min_leaf);
}

void GrowOptions::validate() const {
  if (min_leaf < 1) throw ValidationError("min_leaf must be >= 1");
  if (min_split < 2) throw ValidationError("min_split must be >= 2");
  if (max_depth < 0) throw ValidationError("max_depth must be >= 0");
}

int TreeNode::size() const { return std::accumulate(counts.begin(), counts.end(), 0); }

std::vector<int> Tree::predict(const Eigen::MatrixXd& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_row(x, i);
  return out;
}

int Tree::leaf_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int Tree::internal_count() const { return static_cast<int>(nodes.size()) - leaf_count(); }

int Tree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::vector<int> Tree::path_to(int node) const {
  if (node < 0 || node >= static_cast<int>(nodes.size())) {
    throw ValidationError("node " + std::to_string(node) + " not in tree");
  }
  std::vector<int> path;
  for (int id = node; id >= 0; id = nodes[static_cast<std::size_t>(id)].parent) path.push_back(id);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<int> Tree::used_columns() const {
  std::vector<int> cols;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) cols.push_back(n.feature);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return cols;
}

Tree grow(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes,
          std::span<const int> rows, const GrowOptions& options, const ColumnSampler& sampler) {
  options.validate();
  if (rows.empty()) throw ValidationError("cannot grow a tree on zero rows");
  if (n_classes < 1) throw ValidationError("need at least one class");
  Tree tree;
  tree.n_classes = n_classes;
  tree.options = options;

  std::vector<int> all_cols(static_cast<std::size_t>(x.cols()));
  std::iota(all_cols.begin(), all_cols.end(), 0);

  struct Pending {
    int node;
    std::vector<int> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back(make_node(y, n_classes, rows, options.impurity));
  stack.push_back({0, std::vector<int>(rows.begin(), rows.end())});
  while (!stack.empty()) {
    Pending work = std::move(stack.back());
    stack.pop_back();
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(work.node)];
    const int n = static_cast<int>(work.rows.size());
    const bool pure = node.counts[static_cast<std::size_t>(node.label)] == n;
    if (pure || n < options.min_split || node.depth >= options.max_depth) continue;

    const std::vector<int> cols = sampler ? sampler() : all_cols;
    const auto split =
        best_split(x, y, n_classes, work.rows, cols, options.impurity, options.min_leaf);
    if (!split) continue;

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (const int r : work.rows) {
      (x(r, split->column) < split->threshold ? left_rows : right_rows).push_back(r);
    }
    const int depth = node.depth;
    const int left_id = static_cast<int>(tree.nodes.size());
    const int right_id = left_id + 1;
    for (const auto* part : {&left_rows, &right_rows}) {
      TreeNode child = make_node(y, n_classes, *part, options.impurity);
      child.parent = work.node;
      child.depth = depth + 1;
      child.origin = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(std::move(child));
    }
    auto& parent = tree.nodes[static_cast<std::size_t>(work.node)];
    parent.feature = split->column;
    parent.threshold = split->threshold;
    parent.left = left_id;
    parent.right = right_id;
    stack.push_back({right_id, std::move(right_rows)});
    stack.push_back({left_id, std::move(left_rows)});
  }
  return tree;
}

Tree grow(const AugmentedFeatures& features, const GrowOptions& options,
          const ColumnSampler& sampler) {
  std::vector<int> rows(static_cast<std::size_t>(features.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  Tree tree = grow(features.matrix, features.labels, features.n_classes, rows, options, sampler);
  tree.columns = features.columns;
  return tree;
}

std::vector<PruningStep> cost_complexity_path(const Tree& tree) {
  const std::size_t m = tree.nodes.size();
  const double n_root = tree.nodes[0].size();
  std::vector<double> leaf_risk(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& node = tree.nodes[i];
    leaf_risk[i] = (node.size() - node.counts[static_cast<std::size_t>(node.label)]) / n_root;
  }

  std::vector<char> collapsed(m, 0);
  std::vector<PruningStep> path;
  path.push_back({0.0, collapsed, count_leaves(tree, collapsed)});
  std::vector<double> subtree_risk(m);
  std::vector<int> subtree_leaves(m);
  while (path.back().leaves > 1) {
    const auto reach = reachable_nodes(tree, collapsed);
    // Children always have larger indices than their parent.
    for (std::size_t i = m; i-- > 0;) {
      const auto& node = tree.nodes[i];
      if (node.is_leaf() || collapsed[i]) {
        subtree_risk[i] = leaf_risk[i];
        subtree_leaves[i] = 1;
      } else {
        const auto l = static_cast<std::size_t>(node.left);
        const auto r = static_cast<std::size_t>(node.right);
        subtree_risk[i] = subtree_risk[l] + subtree_risk[r];
        subtree_leaves[i] = subtree_leaves[l] + subtree_leaves[r];
      }
    }
    std::vector<double> g(m, std::numeric_limits<double>::infinity());
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!reach[i] || tree.nodes[i].is_leaf() || collapsed[i]) continue;
      g[i] = std::max(0.0, (leaf_risk[i] - subtree_risk[i]) / (subtree_leaves[i] - 1));
      g_min = std::min(g_min, g[i]);
    }
    const double tol = 1e-12 * std::max(1.0, g_min);
    for (std::size_t i = 0; i < m; ++i) {
      if (g[i] <= g_min + tol) collapsed[i] = 1;
    }
    PruningStep step{g_min, collapsed, count_leaves(tree, collapsed)};
    if (step.alpha <= path.back().alpha + tol) {
      step.alpha = path.back().alpha;
      path.back() = std::move(step);
    } else {
      path.push_back(std::move(step));
    }
  }
  return path;
}

Tree collapse(const Tree& tree, const std::vector<char>& collapsed) {
  const auto reach = reachable_nodes(tree, collapsed);
  std::vector<int> remap(tree.nodes.size(), -1);
  Tree out;
  out.n_classes = tree.n_classes;
  out.columns = tree.columns;
  out.options = tree.options;
  out.complexity_table = tree.complexity_table;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!reach[i]) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    TreeNode node = tree.nodes[i];
    if (collapsed[i]) {
      node.feature = -1;
      node.threshold = 0.0;
      node.left = node.right = -1;
    }
    out.nodes.push_back(std::move(node));
  }
  for (auto& node : out.nodes) {
    if (node.parent >= 0) node.parent = remap[static_cast<std::size_t>(node.parent)];
    if (!node.is_leaf()) {
      node.left = remap[static_cast<std::size_t>(node.left)];
      node.right = remap[static_cast<std::size_t>(node.right)];
    }
  }
  return out;
}

Tree prune_at_alpha(const Tree& tree, double alpha) {
  const auto path = cost_complexity_path(tree);
  return collapse(tree, step_for_alpha(path, alpha).collapsed);
}

std::vector<int> stratified_folds(std::span<const int> labels, int n_classes, int folds,
                                  std::uint64_t seed) {
  std::vector<int> assignment(labels.size(), 0);
  Rng rng(derive_seed(seed, 0x666f6c64ULL));
  int counter = 0;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(static_cast<int>(i));
    }
    shuffle(std::span<int>(members), rng);
    for (const int i : members) assignment[static_cast<std::size_t>(i)] = counter++ % folds;
  }
  return assignment;
}

Tree prune(const Tree& tree, const AugmentedFeatures& features, const PruneOptions& options) {
  const auto n = static_cast<int>(features.rows());
  if (options.folds < 2) throw ValidationError("pruning needs at least 2 folds");
  if (n < options.folds) {
    throw ValidationError("fewer rows (" + std::to_string(n) + ") than folds (" +
                          std::to_string(options.folds) + ")");
  }
  if (tree.nodes[0].size() != n) {
    throw ValidationError("pruning data does not match the rows the tree was grown on");
  }
  const auto path = cost_complexity_path(tree);
  const std::size_t steps = path.size();
  std::vector<double> beta(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    beta[k] = k + 1 < steps ? std::sqrt(path[k].alpha * path[k + 1].alpha)
                            : std::numeric_limits<double>::infinity();
  }

  const auto fold_of = stratified_folds(features.labels, features.n_classes, options.folds,
                                        options.seed);
  std::vector<int> errors(steps, 0);
  for (int f = 0; f < options.folds; ++f) {
    std::vector<int> train_rows;
    std::vector<int> test_rows;
    for (int i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
    }
    if (train_rows.empty() || test_rows.empty()) continue;
    const Tree fold_tree = grow(features.matrix, features.labels, features.n_classes,
                                train_rows, tree.options);
    const auto fold_path = cost_complexity_path(fold_tree);
    for (std::size_t k = 0; k < steps; ++k) {
      const auto& step = step_for_alpha(fold_path, beta[k]);
      for (const int r : test_rows) {
        if (predict_collapsed(fold_tree, step.collapsed, features.matrix, r) !=
            features.labels[static_cast<std::size_t>(r)]) {
          ++errors[k];
        }
      }
    }
  }

  std::vector<ComplexityRow> table(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double e = static_cast<double>(errors[k]) / n;
    table[k] = {path[k].alpha, path[k].leaves, e, std::sqrt(e * (1.0 - e) / n)};
  }
  // Ties favor the smaller tree (later step).
  std::size_t best = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    if (table[k].cv_error <= table[best].cv_error) best = k;
  }
  std::size_t chosen = best;
  if (options.rule == PruneRule::OneSe) {
    const double limit = table[best].cv_error + table[best].cv_se;
    for (std::size_t k = 0; k < steps; ++k) {
      if (table[k].cv_error <= limit + 1e-12) chosen = k;
    }
  }
  Tree out = collapse(tree, path[chosen].collapsed);
  out.complexity_table = std::move(table);
  return out;
}

std::vector<int> predict(const Tree& tree, const AugmentedFeatures& features) {
  if (!tree.columns.empty() && tree.columns != features.columns) {
    throw ValidationError("feature layout does not match the tree's training layout");
  }
  if (tree.columns.empty()) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf() && node.feature >= features.cols()) {
        throw ValidationError("tree splits on a column the features do not have");
      }
    }
  }
  return tree.predict(features.matrix);
}

SeparationCurve separation_curve(const Tree& tree, int node, std::span<const FpcaModel> models,
                                 const Eigen::VectorXd& grid) {
  const auto path = tree.path_to(node);
  if (tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
    throw ValidationError("node " + std::to_string(node) + " is a leaf: no separation curve");
  }
  SeparationCurve curve;
  curve.node = node;
  curve.grid = grid;
  curve.values = Eigen::VectorXd::Zero(grid.size());
  for (const int id : path) {
    const auto& n = tree.nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) continue;
    if (tree.columns.empty()) throw ValidationError("tree has no column metadata");
    const ColumnMeta& meta = tree.columns[static_cast<std::size_t>(n.feature)];
    if (meta.source != FeatureSource::Fpc) {
      throw ValidationError("separation curves need FPC-score features");
    }
    const auto model = std::find_if(models.begin(), models.end(), [&](const FpcaModel& m) {
      return m.deriv_order == meta.deriv;
    });
    if (model == models.end() || model->n_components() < meta.component) {
      throw ValidationError("no eigenfunction for " + meta.name());
    }
    const Eigen::VectorXd xi =
        model->basis.evaluate(grid, 0) *
        model->eigen_coeffs.row(meta.component - 1).transpose();
    curve.values += n.threshold * xi;
    curve.terms.push_back({id, meta.component, meta.deriv, n.threshold});
  }
  return curve;
}

std::vector<SeparationCurve> separation_curves(const Tree& tree,
                                               std::span<const FpcaModel> models,
                                               const Eigen::VectorXd& grid) {
  std::vector<SeparationCurve> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].is_leaf()) {
      out.push_back(separation_curve(tree, static_cast<int>(i), models, grid));
    }
  }
  return out;
}

}  // namespace afrf
