#include <gtest/gtest.h>

#include <cmath>

#include "afrf/error.hpp"
#include "afrf/features.hpp"
#include "afrf/forest.hpp"
#include "afrf/simgen.hpp"
#include "oracles.hpp"

using namespace afrf;

namespace {

AugmentedFeatures noisy_problem(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = standard_normal(rng);
    const double signal = x(i, 0) + 0.7 * x(i, 1) + 0.6 * standard_normal(rng);
    y[static_cast<std::size_t>(i)] = signal > 0.0 ? 1 : 0;
  }
  return oracle::plain_features(x, y, 2);
}

bool same_trees(const Tree& a, const Tree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
        x.counts != y.counts) {
      return false;
    }
  }
  return true;
}

bool same_forests(const Forest& a, const Forest& b) {
  if (a.size() != b.size() || a.inbag != b.inbag) return false;
  for (int h = 0; h < a.size(); ++h) {
    if (!same_trees(a.trees[static_cast<std::size_t>(h)], b.trees[static_cast<std::size_t>(h)])) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(DefaultMtry, RoundedSquareRoot) {
  EXPECT_EQ(default_mtry(30), 5);
  EXPECT_EQ(default_mtry(10), 3);
  EXPECT_EQ(default_mtry(1), 1);
  EXPECT_EQ(default_mtry(2), 1);
}

TEST(TrainForest, SameSeedIsBitIdentical) {
  const auto f = noisy_problem(80, 6, 1);
  ForestOptions o;
  o.trees = 25;
  o.seed = 42;
  EXPECT_TRUE(same_forests(train_forest(f, o), train_forest(f, o)));
  o.seed = 43;
  EXPECT_FALSE(same_forests(train_forest(f, {25, 0, 42}), train_forest(f, o)));
}

TEST(TrainForest, ThreadCountDoesNotChangeResult) {
  const auto f = noisy_problem(80, 6, 2);
  ForestOptions o;
  o.trees = 20;
  const Forest serial = train_forest(f, o);
  o.threads = 4;
  EXPECT_TRUE(same_forests(serial, train_forest(f, o)));
}

TEST(TrainForest, FullCandidateSetEqualsBagging) {
  const auto f = noisy_problem(70, 5, 3);
  ForestOptions o;
  o.trees = 15;
  o.mtry = 5;
  EXPECT_TRUE(same_forests(train_forest(f, o), train_bagging(f, o)));
}

TEST(TrainForest, SingleTreeWithoutBootstrapEqualsGrow) {
  const auto f = noisy_problem(60, 4, 4);
  ForestOptions o;
  o.trees = 1;
  o.mtry = 4;
  o.bootstrap = false;
  const Forest forest = train_forest(f, o);
  const Tree tree = grow(f, GrowOptions::ensemble());
  EXPECT_TRUE(same_trees(forest.trees[0], tree));
  const auto test = noisy_problem(40, 4, 5);
  EXPECT_EQ(predict(forest, test), predict(tree, test));
}

TEST(TrainForest, BootstrapDrawsNRows) {
  const auto f = noisy_problem(50, 3, 6);
  const Forest forest = train_forest(f, {10, 0, 7});
  for (const auto& counts : forest.inbag) {
    int total = 0;
    for (const int c : counts) total += c;
    EXPECT_EQ(total, 50);
  }
  for (const auto& tree : forest.trees) EXPECT_EQ(tree.nodes[0].size(), 50);
}

TEST(TrainForest, InvalidOptionsRejected) {
  const auto f = noisy_problem(20, 3, 8);
  EXPECT_THROW(train_forest(f, {10, 4, 1}), ValidationError);
  EXPECT_THROW(train_forest(f, {10, -1, 1}), ValidationError);
  EXPECT_THROW(train_forest(f, {0, 0, 1}), ValidationError);
}

TEST(PredictProba, RowsAreVoteFractions) {
  const auto f = noisy_problem(60, 5, 9);
  const auto test = noisy_problem(30, 5, 10);
  const Forest forest = train_forest(f, {7, 0, 11});
  const Eigen::MatrixXd p = predict_proba(forest, test);
  // Oracle: tally per-tree predictions by hand.
  Eigen::MatrixXd tally = Eigen::MatrixXd::Zero(30, 2);
  for (const auto& tree : forest.trees) {
    const auto pred = predict(tree, test);
    for (int i = 0; i < 30; ++i) tally(i, pred[static_cast<std::size_t>(i)]) += 1.0;
  }
  EXPECT_EQ(p, tally / 7.0);
  for (int i = 0; i < 30; ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-15);
    for (int c = 0; c < 2; ++c) {
      const double votes = p(i, c) * 7.0;
      EXPECT_NEAR(votes, std::round(votes), 1e-12);
    }
  }
  EXPECT_EQ(predict(forest, test), argmax_rows(p));
}

TEST(PredictProba, UnanimousForestIsOneHot) {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 2, 10, 11, 12;
  const auto f = oracle::plain_features(x, {0, 0, 0, 1, 1, 1}, 2);
  const Forest forest = train_forest(f, {9, 1, 3, false});
  const Eigen::MatrixXd p = predict_proba(forest, f);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(p(i, i < 3 ? 0 : 1), 1.0);
}

TEST(Argmax, TiesGoToLowestClass) {
  Eigen::MatrixXd p(3, 3);
  p << 0.5, 0.5, 0.0, 0.2, 0.8, 0.0, 0.25, 0.375, 0.375;
  EXPECT_EQ(argmax_rows(p), (std::vector<int>{0, 1, 1}));
}

TEST(OobError, SingleTreeScoresAboutOneOverE) {
  const auto f = noisy_problem(1000, 3, 12);
  const Forest forest = train_forest(f, {1, 0, 13});
  const OobEstimate oob = oob_error(forest, f);
  int zeros = 0;
  for (const int c : forest.inbag[0]) zeros += c == 0;
  EXPECT_EQ(oob.scored, zeros);
  EXPECT_NEAR(oob.scored / 1000.0, std::exp(-1.0), 0.05);
  EXPECT_TRUE(oob.covered());
}

TEST(OobError, NoCoverageWithoutBootstrap) {
  const auto f = noisy_problem(30, 3, 14);
  const Forest forest = train_forest(f, {5, 0, 15, false});
  const OobEstimate oob = oob_error(forest, f);
  EXPECT_FALSE(oob.covered());
  EXPECT_EQ(oob.scored, 0);
}

TEST(OobError, TracksTestErrorOnSimulation) {
  const CurveSet curves = generate(scenario(2, 5));
  const auto [train, test] = split_half(curves, 5);
  FeatureOptions fo;
  fo.k = 5;
  const FeatureMap map = FeatureMap::fit(train, fo);
  const AugmentedFeatures ftrain = map.transform(train);
  const AugmentedFeatures ftest = map.transform(test);
  const Forest forest = train_forest(ftrain, {300, 0, 17});
  const OobEstimate oob = oob_error(forest, ftrain);
  const double test_error = 1.0 - accuracy(ftest.labels, predict(forest, ftest));
  EXPECT_GE(oob.error, 0.0);
  EXPECT_LE(oob.error, test_error + 0.15);
  EXPECT_EQ(oob.scored, ftrain.rows());
}

TEST(CheckLayout, MismatchRejected) {
  const auto f = noisy_problem(30, 4, 18);
  const Forest forest = train_forest(f, {3, 0, 19});
  EXPECT_THROW(predict(forest, noisy_problem(10, 5, 20)), ValidationError);
  auto g = f;
  g.columns[1].component = 9;
  EXPECT_THROW(predict_proba(forest, g), ValidationError);
}

TEST(Accuracy, CountsMatches) {
  const std::vector<int> truth{0, 1, 1, 0};
  const std::vector<int> pred{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(accuracy(truth, pred), 0.75);
}
