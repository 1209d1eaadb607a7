#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "afrf/cart.hpp"
#include "afrf/error.hpp"
#include "afrf/forest.hpp"
#include "oracles.hpp"

using namespace afrf;

namespace {

AugmentedFeatures two_gaussians(int n, std::uint64_t seed, double shift, int p = 4) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2;
    for (int j = 0; j < p; ++j) x(i, j) = standard_normal(rng);
    x(i, 0) += shift * y[static_cast<std::size_t>(i)];
    x(i, 1) += 0.5 * shift * y[static_cast<std::size_t>(i)];
  }
  return oracle::plain_features(x, y, 2);
}

std::set<int> origins(const Tree& t) {
  std::set<int> s;
  for (const auto& n : t.nodes) s.insert(n.origin);
  return s;
}

}  // namespace

TEST(Impurity, Examples) {
  const std::vector<int> pure{10, 0}, even{5, 5}, three{2, 3, 5};
  EXPECT_EQ(impurity(pure, Impurity::Gini), 0.0);
  EXPECT_EQ(impurity(pure, Impurity::Entropy), 0.0);
  EXPECT_NEAR(impurity(even, Impurity::Gini), 0.5, 1e-15);
  EXPECT_NEAR(impurity(even, Impurity::Entropy), std::log(2.0), 1e-15);
  EXPECT_NEAR(impurity(three, Impurity::Gini), 0.62, 1e-15);
  const std::vector<int> empty{0, 0};
  EXPECT_THROW(impurity(empty, Impurity::Gini), ValidationError);
}

TEST(BestSplit, MidpointExample) {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 9, 10;
  const std::vector<int> y{0, 0, 1, 1};
  const auto rows = oracle::all_rows(4);
  const std::vector<int> cols{0};
  const auto s = best_split(x, y, 2, rows, cols, Impurity::Gini);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->column, 0);
  EXPECT_EQ(s->threshold, 5.5);
  EXPECT_NEAR(s->gain, 0.5, 1e-15);
}

TEST(BestSplit, PureNodeHasNoSplit) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const std::vector<int> y{1, 1, 1};
  const std::vector<int> cols{0, 1};
  EXPECT_FALSE(best_split(x, y, 2, oracle::all_rows(3), cols, Impurity::Gini).has_value());
}

TEST(BestSplit, MatchesBruteForce) {
  Rng rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = oracle::random_split_instance(rng);
    std::vector<int> rows = oracle::all_rows(inst.x.rows());
    std::vector<int> cols = oracle::all_rows(inst.x.cols());
    for (const auto kind : {Impurity::Gini, Impurity::Entropy}) {
      for (const int min_leaf : {1, 2}) {
        const auto got = best_split(inst.x, inst.y, inst.n_classes, rows, cols, kind, min_leaf);
        const auto want =
            oracle::brute_force_split(inst.x, inst.y, inst.n_classes, rows, cols, kind, min_leaf);
        ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
        if (got) {
          EXPECT_EQ(got->column, want->column) << "trial " << trial;
          EXPECT_EQ(got->threshold, want->threshold) << "trial " << trial;
          EXPECT_NEAR(got->gain, want->gain, 1e-12);
          ++compared;
        }
      }
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(BestSplit, RespectsCandidateColumnsAndRowMultiset) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_split_instance(rng);
    std::vector<int> rows;
    for (int i = 0; i < inst.x.rows(); ++i) {
      const int copies = static_cast<int>(uniform_index(rng, 3));
      for (int c = 0; c < copies; ++c) rows.push_back(i);
    }
    if (rows.empty()) continue;
    std::vector<int> cols;
    for (int j = 0; j < inst.x.cols(); ++j) {
      if (uniform_index(rng, 2) == 0) cols.push_back(j);
    }
    if (cols.empty()) cols.push_back(0);
    const auto got = best_split(inst.x, inst.y, inst.n_classes, rows, cols, Impurity::Gini);
    const auto want =
        oracle::brute_force_split(inst.x, inst.y, inst.n_classes, rows, cols, Impurity::Gini, 1);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) {
      EXPECT_EQ(got->column, want->column);
      EXPECT_EQ(got->threshold, want->threshold);
    }
  }
}

TEST(Grow, SeparableDataGivesStump) {
  Eigen::MatrixXd x(8, 1);
  x << 0.1, 0.2, 0.3, 0.4, 1.1, 1.2, 1.3, 1.4;
  const auto f = oracle::plain_features(x, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
  const Tree t = grow(f, {Impurity::Gini, 2, 1, 30});
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(t.leaf_count(), 2);
  EXPECT_EQ(accuracy(f.labels, predict(t, f)), 1.0);
}

TEST(Grow, DepthZeroIsMajorityLeaf) {
  const auto f = two_gaussians(31, 1, 2.0);
  const Tree t = grow(f, {Impurity::Gini, 2, 1, 0});
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].label, 0);  // 16 zeros against 15 ones
  const auto pred = predict(t, f);
  EXPECT_TRUE(std::all_of(pred.begin(), pred.end(), [](int v) { return v == 0; }));
}

TEST(Grow, AtLeastAsAccurateAsBestStump) {
  const auto f = two_gaussians(120, 2, 1.0);
  const Tree t = grow(f, GrowOptions::standalone());
  const double tree_acc = accuracy(f.labels, predict(t, f));
  // Stump oracle: best single split by training accuracy.
  double best = 0.0;
  for (int j = 0; j < f.cols(); ++j) {
    for (int i = 0; i < f.rows(); ++i) {
      const double thr = f.matrix(i, j);
      int right_one = 0, right = 0, left_one = 0, left = 0;
      for (int r = 0; r < f.rows(); ++r) {
        const bool one = f.labels[static_cast<std::size_t>(r)] == 1;
        if (f.matrix(r, j) < thr) {
          ++left;
          left_one += one;
        } else {
          ++right;
          right_one += one;
        }
      }
      const int correct = std::max(left_one, left - left_one) + std::max(right_one, right - right_one);
      best = std::max(best, correct / static_cast<double>(f.rows()));
    }
  }
  EXPECT_GE(tree_acc + 1e-12, best);
}

TEST(Grow, MemorizesDistinctRows) {
  const auto f = two_gaussians(80, 3, 0.3);
  const Tree t = grow(f, GrowOptions::ensemble());
  EXPECT_EQ(accuracy(f.labels, predict(t, f)), 1.0);
}

TEST(Grow, StructuralInvariants) {
  const auto f = two_gaussians(150, 4, 1.0, 6);
  const Tree t = grow(f, {Impurity::Entropy, 10, 3, 8});
  EXPECT_LE(t.depth(), 8);
  EXPECT_EQ(t.nodes[0].size(), 150);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    EXPECT_EQ(n.origin, static_cast<int>(i));
    if (n.is_leaf()) {
      EXPECT_GE(n.size(), 3);
      continue;
    }
    EXPECT_GE(n.size(), 10);
    const auto& l = t.nodes[static_cast<std::size_t>(n.left)];
    const auto& r = t.nodes[static_cast<std::size_t>(n.right)];
    EXPECT_GT(n.left, static_cast<int>(i));
    EXPECT_EQ(l.parent, static_cast<int>(i));
    EXPECT_EQ(l.depth, n.depth + 1);
    for (std::size_t c = 0; c < n.counts.size(); ++c) {
      EXPECT_EQ(l.counts[c] + r.counts[c], n.counts[c]);
    }
    const double gain =
        n.impurity - (l.size() * l.impurity + r.size() * r.impurity) / static_cast<double>(n.size());
    EXPECT_GT(gain, 0.0);
  }
  EXPECT_EQ(t.leaf_count(), t.internal_count() + 1);
}

TEST(Grow, InvariantUnderMonotoneTransform) {
  const auto f = two_gaussians(100, 5, 1.2);
  auto g = f;
  g.matrix.col(0) = f.matrix.col(0).array().exp();
  g.matrix.col(2) = f.matrix.col(2).array().cube() * 3.0 + 1.0;
  const Tree a = grow(f, GrowOptions::standalone());
  const Tree b = grow(g, GrowOptions::standalone());
  ASSERT_EQ(a.nodes.size(), b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    EXPECT_EQ(a.nodes[i].feature, b.nodes[i].feature);
    EXPECT_EQ(a.nodes[i].left, b.nodes[i].left);
    EXPECT_EQ(a.nodes[i].counts, b.nodes[i].counts);
  }
  EXPECT_EQ(predict(a, f), predict(b, g));
}

TEST(Grow, InvalidOptionsRejected) {
  const auto f = two_gaussians(10, 6, 1.0);
  EXPECT_THROW(grow(f, {Impurity::Gini, 2, 0, 5}), ValidationError);
  EXPECT_THROW(grow(f, {Impurity::Gini, 2, 1, -1}), ValidationError);
}

TEST(Prune, LeafTreeUnchanged) {
  const auto f = two_gaussians(30, 7, 1.0);
  const Tree leaf = grow(f, {Impurity::Gini, 2, 1, 0});
  const Tree p = prune(leaf, f, {});
  EXPECT_EQ(p.nodes.size(), 1u);
  EXPECT_EQ(p.nodes[0].counts, leaf.nodes[0].counts);
}

TEST(Prune, InfiniteAlphaGivesRootLeaf) {
  const auto f = two_gaussians(100, 8, 1.0);
  const Tree t = grow(f, GrowOptions::ensemble());
  const Tree p = prune_at_alpha(t, std::numeric_limits<double>::infinity());
  ASSERT_EQ(p.nodes.size(), 1u);
  EXPECT_EQ(p.nodes[0].counts, t.nodes[0].counts);
  EXPECT_EQ(prune_at_alpha(t, 0.0).nodes.size(), t.nodes.size());
}

TEST(Prune, PathIsNestedWithIncreasingAlpha) {
  const auto f = two_gaussians(120, 9, 0.8);
  const Tree t = grow(f, GrowOptions::ensemble());
  const auto path = cost_complexity_path(t);
  ASSERT_GE(path.size(), 2u);
  EXPECT_EQ(path.back().leaves, 1);
  for (std::size_t k = 1; k < path.size(); ++k) {
    EXPECT_GT(path[k].alpha, path[k - 1].alpha);
    EXPECT_LT(path[k].leaves, path[k - 1].leaves);
    const auto prev = origins(collapse(t, path[k - 1].collapsed));
    const auto cur = origins(collapse(t, path[k].collapsed));
    EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
  }
}

TEST(Prune, SubtreeOfGrownTreeWithinOneSe) {
  const auto f = two_gaussians(200, 10, 0.9, 5);
  const Tree t = grow(f, GrowOptions::standalone());
  for (const auto rule : {PruneRule::Min, PruneRule::OneSe}) {
    const Tree p = prune(t, f, {10, rule, 3});
    EXPECT_LE(p.nodes.size(), t.nodes.size());
    const auto grown = origins(t);
    const auto kept = origins(p);
    EXPECT_TRUE(std::includes(grown.begin(), grown.end(), kept.begin(), kept.end()));
    ASSERT_FALSE(p.complexity_table.empty());
    const auto& full = p.complexity_table.front();
    // Step 0 drops only splits that leave training error unchanged.
    EXPECT_LE(full.leaves, t.leaf_count());
    EXPECT_EQ(predict(prune_at_alpha(t, 0.0), f), predict(t, f));
    const auto chosen = std::find_if(p.complexity_table.begin(), p.complexity_table.end(),
                                     [&](const ComplexityRow& r) { return r.leaves == p.leaf_count(); });
    ASSERT_NE(chosen, p.complexity_table.end());
    EXPECT_LE(chosen->cv_error, full.cv_error + full.cv_se + 1e-12);
  }
}

TEST(Prune, FewerRowsThanFoldsRejected) {
  const auto f = two_gaussians(6, 11, 1.0);
  const Tree t = grow(f, GrowOptions::ensemble());
  EXPECT_THROW(prune(t, f, {10, PruneRule::Min, 1}), ValidationError);
}

TEST(StratifiedFolds, BalancedPerClass) {
  std::vector<int> labels;
  for (int i = 0; i < 53; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);
  const auto folds = stratified_folds(labels, 2, 5, 9);
  for (int c = 0; c < 2; ++c) {
    std::vector<int> per(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) ++per[static_cast<std::size_t>(folds[i])];
    }
    EXPECT_LE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()),
              1);
  }
}

TEST(PredictTree, LayoutMismatchRejected) {
  const auto f = two_gaussians(40, 12, 1.0);
  const Tree t = grow(f, GrowOptions::standalone());
  auto g = f;
  g.columns[0].deriv = 1;
  EXPECT_THROW(predict(t, g), ValidationError);
}

class SeparationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const SmoothedSet s = smooth(oracle::random_curves(30, 60, 31), build_basis(12, 4));
    for (int r = 0; r <= 2; ++r) models.push_back(fit_fpca(s, r, 5));
    grid = unit_grid(101);
  }

  Eigen::VectorXd xi(int k, int r) const {
    const auto& m = models[static_cast<std::size_t>(r)];
    return m.basis.evaluate(grid) * m.eigen_coeffs.row(k - 1).transpose();
  }

  // Root splits on (3, 1) at 3.4, its left child on (1, 2) at 2.1.
  Tree two_level() const {
    Tree t;
    t.n_classes = 2;
    t.columns = {{3, 1, FeatureSource::Fpc}, {1, 2, FeatureSource::Fpc}};
    auto node = [](int feature, double thr, int left, int right, int parent) {
      TreeNode n;
      n.feature = feature;
      n.threshold = thr;
      n.left = left;
      n.right = right;
      n.parent = parent;
      n.counts = {1, 1};
      return n;
    };
    t.nodes = {node(0, 3.4, 1, 2, -1), node(1, 2.1, 3, 4, 0), node(-1, 0, -1, -1, 0),
               node(-1, 0, -1, -1, 1), node(-1, 0, -1, -1, 1)};
    return t;
  }

  std::vector<FpcaModel> models;
  Eigen::VectorXd grid;
};

TEST_F(SeparationTest, RootIsSingleTerm) {
  const Tree t = two_level();
  const auto c = separation_curve(t, 0, models, grid);
  ASSERT_EQ(c.terms.size(), 1u);
  EXPECT_LE((c.values - 3.4 * xi(3, 1)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_F(SeparationTest, PathSumsThresholdTimesEigenfunction) {
  const Tree t = two_level();
  const auto c = separation_curve(t, 1, models, grid);
  ASSERT_EQ(c.terms.size(), 2u);
  EXPECT_EQ(c.terms[0].component, 3);
  EXPECT_EQ(c.terms[0].deriv, 1);
  EXPECT_EQ(c.terms[1].component, 1);
  EXPECT_EQ(c.terms[1].deriv, 2);
  const Eigen::VectorXd expected = 3.4 * xi(3, 1) + 2.1 * xi(1, 2);
  EXPECT_LE((c.values - expected).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(separation_curves(t, models, grid).size(), 2u);
}

TEST_F(SeparationTest, RecomputedFromTerms) {
  const auto f = two_gaussians(60, 13, 1.0, 3);
  Tree t = grow(f, GrowOptions::ensemble());
  t.columns = {{1, 0, FeatureSource::Fpc}, {2, 1, FeatureSource::Fpc}, {4, 2, FeatureSource::Fpc}};
  for (const auto& c : separation_curves(t, models, grid)) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.size());
    for (const auto& term : c.terms) sum += term.threshold * xi(term.component, term.deriv);
    EXPECT_LE((c.values - sum).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(c.terms.size(), t.path_to(c.node).size());
  }
}

TEST_F(SeparationTest, LeafAndSplineTreesRejected) {
  Tree t = two_level();
  EXPECT_THROW(separation_curve(t, 2, models, grid), ValidationError);
  t.columns[0].source = FeatureSource::Spline;
  EXPECT_THROW(separation_curve(t, 0, models, grid), ValidationError);
}

TEST(Parse, NamesRoundTrip) {
  EXPECT_EQ(parse_impurity(to_string(Impurity::Entropy)), Impurity::Entropy);
  EXPECT_EQ(parse_prune_rule("1se"), PruneRule::OneSe);
  EXPECT_EQ(parse_prune_rule(to_string(PruneRule::Min)), PruneRule::Min);
  EXPECT_THROW(parse_impurity("chaos"), ValidationError);
}
