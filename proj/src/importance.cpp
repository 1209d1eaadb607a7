#include "afrf/importance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "afrf/error.hpp"

namespace afrf {
namespace {

// Evaluates forest error with one column replaced, reusing unaffected tree
// predictions.
class Evaluator {
 public:
  Evaluator(const Forest& forest, const AugmentedFeatures& features,
            const ImportanceOptions& options)
      : forest_(forest), features_(features), options_(options) {
    check_layout(forest, features);
    const auto n = static_cast<int>(features.rows());
    const bool oob = options.eval_set == EvalSet::Oob;
    if (oob && n != forest.n_train) {
      throw ValidationError("OOB importance needs the training rows (" +
                            std::to_string(forest.n_train) + "), got " + std::to_string(n));
    }
    const std::size_t h_count = forest.trees.size();
    eval_rows_.resize(h_count);
    base_pred_ = tree_predictions(forest, features);
    base_wrong_.assign(h_count, 0);
    uses_.assign(h_count, std::vector<char>(static_cast<std::size_t>(features.cols()), 0));
    for (std::size_t h = 0; h < h_count; ++h) {
      for (int i = 0; i < n; ++i) {
        if (!oob || forest.out_of_bag(static_cast<int>(h), i)) eval_rows_[h].push_back(i);
      }
      for (const int r : eval_rows_[h]) base_wrong_[h] += wrong(base_pred_[h], r);
      for (const int c : forest.trees[h].used_columns()) uses_[h][static_cast<std::size_t>(c)] = 1;
    }
    if (options.aggregation == Aggregation::PerTree) {
      if (std::all_of(eval_rows_.begin(), eval_rows_.end(),
                      [](const auto& rows) { return rows.empty(); })) {
        throw ValidationError("no tree has out-of-bag rows; use a larger forest");
      }
    } else {
      base_ensemble_ = ensemble_error(base_pred_);
    }
  }

  // Error after replacing `column` by `values` minus the error before.
  double increase(int column, const std::vector<double>& values) const {
    const auto col = static_cast<std::size_t>(column);
    if (options_.aggregation == Aggregation::PerTree) {
      double total = 0.0;
      int trees = 0;
      for (std::size_t h = 0; h < forest_.trees.size(); ++h) {
        const auto& rows = eval_rows_[h];
        if (rows.empty()) continue;
        ++trees;
        if (!uses_[h][col]) continue;
        int wrong_after = 0;
        for (const int r : rows) {
          wrong_after += permuted_label(forest_.trees[h], r, column, values) !=
                         features_.labels[static_cast<std::size_t>(r)];
        }
        total += static_cast<double>(wrong_after - base_wrong_[h]) /
                 static_cast<double>(rows.size());
      }
      return total / trees;
    }
    std::vector<std::vector<int>> preds = base_pred_;
    for (std::size_t h = 0; h < forest_.trees.size(); ++h) {
      if (!uses_[h][col]) continue;
      for (Eigen::Index r = 0; r < features_.rows(); ++r) {
        preds[h][static_cast<std::size_t>(r)] =
            permuted_label(forest_.trees[h], static_cast<int>(r), column, values);
      }
    }
    return ensemble_error(preds) - base_ensemble_;
  }

 private:
  int wrong(const std::vector<int>& pred, int r) const {
    return pred[static_cast<std::size_t>(r)] != features_.labels[static_cast<std::size_t>(r)];
  }

  int permuted_label(const Tree& tree, int row, int column,
                     const std::vector<double>& values) const {
    const int leaf = tree.leaf_for([&](int j) {
      return j == column ? values[static_cast<std::size_t>(row)] : features_.matrix(row, j);
    });
    return tree.nodes[static_cast<std::size_t>(leaf)].label;
  }

  double ensemble_error(const std::vector<std::vector<int>>& preds) const {
    const auto n = static_cast<int>(features_.rows());
    std::vector<int> counts(static_cast<std::size_t>(forest_.n_classes));
    int scored = 0;
    int wrong_rows = 0;
    for (int i = 0; i < n; ++i) {
      std::fill(counts.begin(), counts.end(), 0);
      int voters = 0;
      for (std::size_t h = 0; h < preds.size(); ++h) {
        if (options_.eval_set == EvalSet::Oob && !forest_.out_of_bag(static_cast<int>(h), i)) {
          continue;
        }
        ++counts[static_cast<std::size_t>(preds[h][static_cast<std::size_t>(i)])];
        ++voters;
      }
      if (voters == 0) continue;
      ++scored;
      const auto label = std::max_element(counts.begin(), counts.end()) - counts.begin();
      wrong_rows += label != features_.labels[static_cast<std::size_t>(i)];
    }
    if (scored == 0) throw ValidationError("no row is out-of-bag for any tree");
    return static_cast<double>(wrong_rows) / scored;
  }

  const Forest& forest_;
  const AugmentedFeatures& features_;
  const ImportanceOptions& options_;
  std::vector<std::vector<int>> eval_rows_;
  std::vector<std::vector<int>> base_pred_;
  std::vector<int> base_wrong_;
  std::vector<std::vector<char>> uses_;
  double base_ensemble_ = 0.0;
};

ImportanceRuns run_importance(const Forest& forest, const AugmentedFeatures& features,
                              const ImportanceOptions& options, bool conditional) {
  options.validate();
  if (conditional && features.groups.empty()) {
    throw ValidationError("conditional importance needs feature group metadata");
  }
  const Evaluator evaluator(forest, features, options);
  const auto p = static_cast<std::size_t>(features.cols());
  std::vector<int> pool(static_cast<std::size_t>(features.rows()));
  std::iota(pool.begin(), pool.end(), 0);

  ImportanceRuns runs;
  runs.mean.assign(p, 0.0);
  runs.reps.assign(p, std::vector<double>(static_cast<std::size_t>(options.reps), 0.0));
  parallel_for(p, options.threads, [&](std::size_t j) {
    const int column = static_cast<int>(j);
    const auto strata = conditional
                            ? conditioning_strata(features, column, pool, options.bins)
                            : std::vector<std::vector<int>>{pool};
    const Eigen::VectorXd original = features.matrix.col(column);
    for (int rep = 0; rep < options.reps; ++rep) {
      Rng rng(derive_seed(options.seed, column, rep));
      const auto permuted = permute_within_strata(
          std::span<const double>(original.data(), static_cast<std::size_t>(original.size())),
          strata, rng);
      runs.reps[j][static_cast<std::size_t>(rep)] = evaluator.increase(column, permuted);
    }
    runs.mean[j] = std::accumulate(runs.reps[j].begin(), runs.reps[j].end(), 0.0) / options.reps;
  });
  return runs;
}

}  // namespace

std::string to_string(EvalSet set) {
  switch (set) {
    case EvalSet::Oob:
      return "oob";
    case EvalSet::Holdout:
      return "holdout";
    case EvalSet::InSample:
      return "insample";
  }
  return "oob";
}

EvalSet parse_eval_set(const std::string& name) {
  if (name == "oob") return EvalSet::Oob;
  if (name == "holdout") return EvalSet::Holdout;
  if (name == "insample" || name == "in-sample") return EvalSet::InSample;
  throw ValidationError("unknown evaluation set '" + name + "' (expected oob, holdout, insample)");
}

void ImportanceOptions::validate() const {
  if (reps < 1) throw ValidationError("permutation reps must be >= 1");
  if (bins < 2) throw ValidationError("conditioning bins must be >= 2");
}

std::vector<double> quantile_edges(std::span<const double> values, int bins) {
  if (bins < 2) throw ValidationError("conditioning bins must be >= 2");
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  const double last = static_cast<double>(sorted.size() - 1);
  for (int b = 1; b < bins; ++b) {
    const double h = last * b / bins;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    edges.push_back(sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
  }
  return edges;
}

int bin_of(std::span<const double> edges, double value) {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::vector<std::vector<int>> conditioning_strata(const AugmentedFeatures& features, int column,
                                                  std::span<const int> pool, int bins) {
  const auto& group = features.groups.at(static_cast<std::size_t>(features.group_of(column)));
  std::vector<int> others;
  for (const int c : group) {
    if (c != column) others.push_back(c);
  }
  std::vector<std::vector<double>> edges;
  for (const int c : others) {
    std::vector<double> vals;
    vals.reserve(pool.size());
    for (const int r : pool) vals.push_back(features.matrix(r, c));
    edges.push_back(quantile_edges(vals, bins));
  }
  std::map<std::vector<int>, std::vector<int>> strata;
  std::vector<int> key(others.size());
  for (const int r : pool) {
    for (std::size_t o = 0; o < others.size(); ++o) {
      key[o] = bin_of(edges[o], features.matrix(r, others[o]));
    }
    strata[key].push_back(r);
  }
  std::vector<std::vector<int>> out;
  out.reserve(strata.size());
  for (auto& entry : strata) {
    std::sort(entry.second.begin(), entry.second.end());
    out.push_back(std::move(entry.second));
  }
  return out;
}

std::vector<double> permute_within_strata(std::span<const double> values,
                                          const std::vector<std::vector<int>>& strata, Rng& rng) {
  std::vector<double> out(values.begin(), values.end());
  std::vector<double> buffer;
  for (const auto& stratum : strata) {
    buffer.clear();
    for (const int r : stratum) buffer.push_back(values[static_cast<std::size_t>(r)]);
    shuffle(std::span<double>(buffer), rng);
    for (std::size_t i = 0; i < stratum.size(); ++i) {
      out[static_cast<std::size_t>(stratum[i])] = buffer[i];
    }
  }
  return out;
}

ImportanceRuns unconditional_importance(const Forest& forest, const AugmentedFeatures& features,
                                        const ImportanceOptions& options) {
  return run_importance(forest, features, options, false);
}

ImportanceRuns conditional_importance(const Forest& forest, const AugmentedFeatures& features,
                                      const ImportanceOptions& options) {
  return run_importance(forest, features, options, true);
}

ImportanceReport importance_report(const Forest& forest, const AugmentedFeatures& features,
                                   const ImportanceOptions& options) {
  ImportanceReport report;
  report.columns = features.columns;
  report.conditional = conditional_importance(forest, features, options);
  report.unconditional = unconditional_importance(forest, features, options);
  report.reps = options.reps;
  report.bins = options.bins;
  report.eval_set = options.eval_set;
  return report;
}

Table ImportanceReport::table() const {
  Table t({"feature", "k", "r", "conditional", "unconditional", "reps", "eval_set"});
  for (std::size_t j = 0; j < columns.size(); ++j) {
    t.add_row({columns[j].name(), static_cast<std::int64_t>(columns[j].component),
               static_cast<std::int64_t>(columns[j].deriv), conditional.mean[j],
               unconditional.mean[j], static_cast<std::int64_t>(reps), to_string(eval_set)});
  }
  return t;
}

Table ImportanceReport::raw_table() const {
  Table t({"feature", "rep", "conditional", "unconditional"});
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (int rep = 0; rep < reps; ++rep) {
      const auto r = static_cast<std::size_t>(rep);
      t.add_row({columns[j].name(), static_cast<std::int64_t>(rep), conditional.reps[j][r],
                 unconditional.reps[j][r]});
    }
  }
  return t;
}

}  // namespace afrf
