#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrnp/cart.hpp"

namespace lrnp {

struct ForestParams {
  int n_trees = 100;
  /// Rows drawn without replacement per tree; nullopt means ceil(n/2).
  std::optional<std::size_t> subsample;
  /// Per-tree settings. Forest trees are always honest, whatever the flag
  /// says here.
  TreeParams tree = fully_grown_tree();
  unsigned threads = 1;

  static TreeParams fully_grown_tree(SplitCriterion criterion = SplitCriterion::breiman) {
    TreeParams p;
    p.criterion = criterion;
    p.max_leaf_samples = 3;
    p.honest = true;
    return p;
  }
  void validate() const;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<TreeModel> trees, std::size_t subsample_size, std::uint64_t seed);

  std::size_t size() const { return trees_.size(); }
  const std::vector<TreeModel>& trees() const { return trees_; }
  std::size_t subsample_size() const { return subsample_size_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dimension() const { return trees_.front().dimension(); }
  SplitCriterion criterion() const { return trees_.front().criterion(); }

  /// Mean of the tree predictions.
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  void serialize(std::ostream& os) const;
  std::string serialize() const;
  static ForestModel parse(std::istream& is);

  friend bool operator==(const ForestModel&, const ForestModel&) = default;

 private:
  std::vector<TreeModel> trees_;
  std::size_t subsample_size_ = 0;
  std::uint64_t seed_ = 0;
};

/// Seed handed to fit_tree for tree b; its subsample is drawn from a stream
/// derived from the same value.
std::uint64_t forest_tree_seed(std::uint64_t forest_seed, std::size_t b);
/// The rows tree b is fit on (sorted).
std::vector<std::size_t> forest_subsample(std::size_t n, std::size_t s, std::uint64_t tree_seed);

ForestModel fit_forest(const ScalarDataset& data, const ForestParams& params, std::uint64_t seed);

}  // namespace lrnp
