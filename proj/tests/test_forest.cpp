#include <gtest/gtest.h>

#include <sstream>

#include "lrnp/forest.hpp"
#include "test_util.hpp"

using namespace lrnp;
using lrnp::testing::hypercube;

namespace {

ScalarDataset noisy_sparse(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix x(n, 6);
  std::vector<double> y(n);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < 6; ++j) x(r, j) = coin(rng);
    y[r] = std::clamp(0.3 + 0.4 * x(r, 0) * x(r, 2) + u(rng), 0.0, 1.0);
  }
  return ScalarDataset(std::move(x), std::move(y));
}

TreeModel leaf(double value) {
  TreeNode n;
  n.value = value;
  return TreeModel(SplitCriterion::breiman, true, 2, {n}, {});
}

}  // namespace

TEST(Forest, SingleFullTreeMatchesTheTree) {
  const auto data = noisy_sparse(120, 1);
  ForestParams p;
  p.n_trees = 1;
  p.subsample = data.size();
  const auto forest = fit_forest(data, p, 17);
  ASSERT_EQ(forest.size(), 1u);
  const auto seed = forest_tree_seed(17, 0);
  const auto rows = forest_subsample(data.size(), data.size(), seed);
  EXPECT_EQ(rows.size(), data.size());
  const auto tree = fit_tree(data, rows, p.tree, seed);
  EXPECT_EQ(forest.trees()[0], tree);
  for (std::size_t r = 0; r < data.size(); ++r)
    EXPECT_EQ(forest.predict(data.features().row(r)), tree.predict(data.features().row(r)));
}

TEST(Forest, ConstantTargets) {
  const auto x = hypercube(4);
  const ScalarDataset data(x, std::vector<double>(x.rows(), 0.35));
  for (int b : {1, 7}) {
    ForestParams p;
    p.n_trees = b;
    for (double v : fit_forest(data, p, 2).predict(x)) EXPECT_NEAR(v, 0.35, 1e-12);
  }
}

TEST(Forest, RecoversSingleCoordinateTarget) {
  const auto x = hypercube(5, 4);
  std::vector<double> y;
  for (std::size_t r = 0; r < x.rows(); ++r) y.push_back(x(r, 0));
  const ScalarDataset data(x, y);
  ForestParams p;
  p.n_trees = 100;
  p.subsample = data.size() / 2;
  const auto forest = fit_forest(data, p, 3);
  const auto test = hypercube(5);
  std::vector<double> truth;
  for (std::size_t r = 0; r < test.rows(); ++r) truth.push_back(test(r, 0));
  EXPECT_LT(lrnp::testing::mse(forest.predict(test), truth), 0.01);
}

TEST(Forest, PredictionIsTheMeanOfIndependentlyRefitTrees) {
  const auto data = noisy_sparse(200, 4);
  ForestParams p;
  p.n_trees = 12;
  p.subsample = 90;
  const auto forest = fit_forest(data, p, 8);
  std::vector<TreeModel> refit;
  for (std::size_t b = 0; b < 12; ++b) {
    const auto s = forest_tree_seed(8, b);
    refit.push_back(fit_tree(data, forest_subsample(data.size(), 90, s), p.tree, s));
    EXPECT_EQ(refit.back(), forest.trees()[b]);
  }
  for (std::size_t r = 0; r < data.size(); ++r) {
    double sum = 0.0;
    for (const auto& t : refit) sum += t.predict(data.features().row(r));
    EXPECT_DOUBLE_EQ(forest.predict(data.features().row(r)), sum / 12.0);
  }
}

TEST(Forest, TreesAreHonestAndFullyGrown) {
  // Sixteen binary features keep the partition rows distinct, so every cell can be split.
  Rng rng(5);
  FeatureMatrix x(300, 16);
  std::vector<double> y(300);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t r = 0; r < 300; ++r) {
    for (std::size_t j = 0; j < 16; ++j) x(r, j) = coin(rng);
    y[r] = 0.3 + 0.4 * x(r, 0) * x(r, 2);
  }
  const ScalarDataset data(std::move(x), std::move(y));
  for (auto criterion : {SplitCriterion::breiman, SplitCriterion::level_splits}) {
    ForestParams p;
    p.n_trees = 10;
    p.tree = ForestParams::fully_grown_tree(criterion);
    p.tree.honest = false;
    const auto forest = fit_forest(data, p, 6);
    EXPECT_EQ(forest.subsample_size(), 150u);
    for (const auto& t : forest.trees()) {
      EXPECT_TRUE(t.honest());
      EXPECT_EQ(t.criterion(), criterion);
      for (const auto& n : t.nodes())
        if (n.is_leaf()) {
          EXPECT_LE(n.partition_count, 3u);
        }
    }
  }
}

TEST(Forest, SubsamplesAreDistinctRowsOfTheRightSize) {
  for (std::size_t b = 0; b < 20; ++b) {
    const auto rows = forest_subsample(50, 20, forest_tree_seed(1, b));
    EXPECT_EQ(rows.size(), 20u);
    EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
    EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
    EXPECT_LT(rows.back(), 50u);
  }
}

TEST(Forest, DeterministicAndThreadIndependent) {
  const auto data = noisy_sparse(200, 6);
  ForestParams p;
  p.n_trees = 16;
  const auto a = fit_forest(data, p, 11);
  EXPECT_EQ(a, fit_forest(data, p, 11));
  p.threads = 4;
  EXPECT_EQ(a, fit_forest(data, p, 11));
  EXPECT_FALSE(a == fit_forest(data, p, 12));
}

TEST(Forest, MeanOfTwoConstantTrees) {
  const ForestModel f({leaf(0.2), leaf(0.4)}, 1, 0);
  EXPECT_NEAR(f.predict(std::vector<double>{0, 1}), 0.3, 1e-15);
}

TEST(Forest, TreeOrderDoesNotMatter) {
  const auto data = noisy_sparse(200, 7);
  ForestParams p;
  p.n_trees = 9;
  const auto forest = fit_forest(data, p, 2);
  auto trees = forest.trees();
  std::reverse(trees.begin(), trees.end());
  const ForestModel permuted(trees, forest.subsample_size(), forest.seed());
  for (std::size_t r = 0; r < data.size(); ++r)
    EXPECT_NEAR(forest.predict(data.features().row(r)), permuted.predict(data.features().row(r)),
                1e-12);
}

TEST(Forest, InvalidParameters) {
  const auto data = noisy_sparse(20, 8);
  ForestParams p;
  p.subsample = 21;
  EXPECT_THROW(fit_forest(data, p, 0), ValidationError);
  p.subsample = 0;
  EXPECT_THROW(fit_forest(data, p, 0), ValidationError);
  p = {};
  p.n_trees = 0;
  EXPECT_THROW(fit_forest(data, p, 0), ValidationError);
  const ForestModel f({leaf(0.2)}, 1, 0);
  EXPECT_THROW(f.predict(std::vector<double>{0}), ValidationError);
}

TEST(Forest, SerializationRoundTrip) {
  const auto data = noisy_sparse(100, 9);
  ForestParams p;
  p.n_trees = 5;
  const auto forest = fit_forest(data, p, 4);
  const auto text = forest.serialize();
  EXPECT_EQ(text.rfind("forest ", 0), 0u);
  std::istringstream is(text);
  EXPECT_EQ(ForestModel::parse(is), forest);
}
