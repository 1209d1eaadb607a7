#include "afrf/forest.hpp"

#include <cmath>
#include <numeric>

#include "afrf/error.hpp"
#include "afrf/random.hpp"

namespace afrf {
namespace {

// Bootstrap and column-sampling substreams of tree h.
constexpr std::uint64_t kBootstrapStream = 0;
constexpr std::uint64_t kSamplerStream = 1;

struct Resample {
  std::vector<int> rows;
  std::vector<int> counts;
};

Resample draw_rows(int n, bool bootstrap, std::uint64_t seed, int h) {
  Resample out;
  out.counts.assign(static_cast<std::size_t>(n), 0);
  if (!bootstrap) {
    out.rows.resize(static_cast<std::size_t>(n));
    std::iota(out.rows.begin(), out.rows.end(), 0);
    std::fill(out.counts.begin(), out.counts.end(), 1);
    return out;
  }
  Rng rng(derive_seed(seed, h, kBootstrapStream));
  out.rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto r = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    out.rows.push_back(r);
    ++out.counts[static_cast<std::size_t>(r)];
  }
  std::sort(out.rows.begin(), out.rows.end());
  return out;
}

Forest empty_forest(const AugmentedFeatures& features, const ForestOptions& options, int mtry) {
  if (options.trees < 1) throw ValidationError("forest size must be >= 1");
  if (features.rows() < 1 || features.cols() < 1) {
    throw ValidationError("cannot train a forest on empty features");
  }
  options.tree.validate();
  Forest forest;
  forest.trees.resize(static_cast<std::size_t>(options.trees));
  forest.inbag.resize(static_cast<std::size_t>(options.trees));
  forest.mtry = mtry;
  forest.seed = options.seed;
  forest.bootstrap = options.bootstrap;
  forest.n_classes = features.n_classes;
  forest.n_train = static_cast<int>(features.rows());
  forest.columns = features.columns;
  forest.tree_options = options.tree;
  return forest;
}

template <typename MakeSampler>
Forest train(const AugmentedFeatures& features, const ForestOptions& options, int mtry,
             MakeSampler&& make_sampler) {
  Forest forest = empty_forest(features, options, mtry);
  const int n = forest.n_train;
  parallel_for(forest.trees.size(), options.threads, [&](std::size_t h) {
    const int tree_index = static_cast<int>(h);
    Resample sample = draw_rows(n, options.bootstrap, options.seed, tree_index);
    Rng rng(derive_seed(options.seed, tree_index, kSamplerStream));
    Tree tree = grow(features.matrix, features.labels, features.n_classes, sample.rows,
                     options.tree, make_sampler(rng));
    tree.columns = features.columns;
    forest.trees[h] = std::move(tree);
    forest.inbag[h] = std::move(sample.counts);
  });
  return forest;
}

}  // namespace

int default_mtry(int n_columns) {
  return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_columns)))));
}

Forest train_forest(const AugmentedFeatures& features, const ForestOptions& options) {
  const int p = static_cast<int>(features.cols());
  const int m = options.mtry == 0 ? default_mtry(p) : options.mtry;
  if (m < 1 || m > p) {
    throw ValidationError("mtry = " + std::to_string(m) + " outside 1.." + std::to_string(p));
  }
  return train(features, options, m, [p, m](Rng& rng) -> ColumnSampler {
    return [p, m, &rng] {
      std::vector<int> pool(static_cast<std::size_t>(p));
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       uniform_index(rng, static_cast<std::size_t>(p - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      }
      pool.resize(static_cast<std::size_t>(m));
      std::sort(pool.begin(), pool.end());
      return pool;
    };
  });
}

Forest train_bagging(const AugmentedFeatures& features, const ForestOptions& options) {
  const int p = static_cast<int>(features.cols());
  return train(features, options, p, [](Rng&) { return ColumnSampler{}; });
}

void check_layout(const Forest& forest, const AugmentedFeatures& features) {
  if (features.columns != forest.columns) {
    throw ValidationError("feature layout (" + std::to_string(features.cols()) +
                          " columns) does not match the forest's training layout (" +
                          std::to_string(forest.columns.size()) + " columns)");
  }
}

std::vector<std::vector<int>> tree_predictions(const Forest& forest,
                                               const AugmentedFeatures& features) {
  check_layout(forest, features);
  std::vector<std::vector<int>> out(forest.trees.size());
  for (std::size_t h = 0; h < forest.trees.size(); ++h) {
    out[h] = forest.trees[h].predict(features.matrix);
  }
  return out;
}

Eigen::MatrixXd predict_proba(const Forest& forest, const AugmentedFeatures& features) {
  const auto votes = tree_predictions(forest, features);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(features.rows(), forest.n_classes);
  for (const auto& tree_votes : votes) {
    for (std::size_t i = 0; i < tree_votes.size(); ++i) {
      ++counts(static_cast<Eigen::Index>(i), tree_votes[i]);
    }
  }
  return counts.cast<double>() / static_cast<double>(forest.size());
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const Forest& forest, const AugmentedFeatures& features) {
  return argmax_rows(predict_proba(forest, features));
}

OobEstimate oob_error(const Forest& forest, const AugmentedFeatures& features) {
  if (features.rows() != forest.n_train) {
    throw ValidationError("OOB error needs the training rows");
  }
  const auto votes = tree_predictions(forest, features);
  OobEstimate est;
  int wrong = 0;
  std::vector<int> counts(static_cast<std::size_t>(forest.n_classes));
  for (int i = 0; i < forest.n_train; ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    int voters = 0;
    for (int h = 0; h < forest.size(); ++h) {
      if (!forest.out_of_bag(h, i)) continue;
      ++counts[static_cast<std::size_t>(votes[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)])];
      ++voters;
    }
    if (voters == 0) continue;
    ++est.scored;
    const auto label = std::max_element(counts.begin(), counts.end()) - counts.begin();
    if (label != features.labels[static_cast<std::size_t>(i)]) ++wrong;
  }
  est.error = est.scored > 0 ? static_cast<double>(wrong) / est.scored : 0.0;
  return est;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw ValidationError("accuracy needs equal-length, non-empty label vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace afrf
