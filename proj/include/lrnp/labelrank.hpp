#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lrnp/cart.hpp"
#include "lrnp/dataset.hpp"
#include "lrnp/forest.hpp"

namespace lrnp {

/// Scalar learner used for every label slice.
struct LearnerConfig {
  enum class Kind { tree, forest };
  Kind kind = Kind::tree;
  TreeParams tree;
  ForestParams forest;
  /// Worker threads across labels (and across trees inside a forest when
  /// there is a single label).
  unsigned threads = 1;

  /// Breiman tree grown until every leaf holds one partition sample.
  static LearnerConfig fully_grown_tree();
  static LearnerConfig shallow_tree(int max_depth = 5);
  static LearnerConfig level_splits(int max_levels = unlimited);
  static LearnerConfig honest_forest(int n_trees = 100,
                                     SplitCriterion criterion = SplitCriterion::breiman);
  /// "tree", "shallow-tree", "level-splits" or "forest".
  static LearnerConfig preset(std::string_view name);

  std::string describe() const;
  void validate() const;
};

using ScalarModel = std::variant<TreeModel, ForestModel>;

double predict_scalar(const ScalarModel& model, std::span<const double> x);

/// One scalar regressor per label, each trained on the normalized positions
/// sigma(i)/k.
class LabelwiseRanker {
 public:
  LabelwiseRanker() = default;
  LabelwiseRanker(std::vector<ScalarModel> models, std::size_t dimension, std::string learner);

  int num_labels() const { return static_cast<int>(models_.size()); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<ScalarModel>& models() const { return models_; }
  const std::string& learner() const { return learner_; }

  /// Predicted normalized positions, one per label.
  std::vector<double> predict_scores(std::span<const double> x) const;
  /// Labels sorted by ascending predicted position; ties go to the lower label.
  Ranking predict(std::span<const double> x) const;

  void serialize(std::ostream& os) const;
  std::string serialize() const;
  static LabelwiseRanker parse(std::istream& is);

  friend bool operator==(const LabelwiseRanker&, const LabelwiseRanker&) = default;

 private:
  std::vector<ScalarModel> models_;
  std::size_t dimension_ = 0;
  std::string learner_;
};

/// The slice for label i: targets sigma(i)/k for every row.
ScalarDataset label_slice(const RankingDataset& data, int label);

std::uint64_t label_seed(std::uint64_t seed, int label);

ScalarModel fit_label_model(const RankingDataset& data, int label, const LearnerConfig& config,
                            std::uint64_t seed);

/// Requires complete rankings.
LabelwiseRanker fit_label_ranker(const RankingDataset& data, const LearnerConfig& config,
                                 std::uint64_t seed);

}  // namespace lrnp
