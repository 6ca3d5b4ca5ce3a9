#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrnp/matrix.hpp"

namespace lrnp {

/// Features paired with scalar targets in [0,1].
class ScalarDataset {
 public:
  ScalarDataset(FeatureMatrix features, std::vector<double> targets);

  std::size_t size() const { return targets_.size(); }
  std::size_t dimension() const { return features_.cols(); }
  const FeatureMatrix& features() const { return features_; }
  std::span<const double> targets() const { return targets_; }

 private:
  FeatureMatrix features_;
  std::vector<double> targets_;
};

enum class SplitCriterion { level_splits, breiman };

std::string to_string(SplitCriterion c);
SplitCriterion parse_split_criterion(std::string_view text);

inline constexpr int unlimited = -1;

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::breiman;
  /// Level-Splits: number of levels (coordinates in S). unlimited grows until
  /// every cell holds at most max_leaf_samples partition samples or no
  /// coordinate is left.
  int max_levels = unlimited;
  /// Breiman: node budget t. A split is made only while the tree would hold
  /// at most max_nodes nodes afterwards.
  int max_nodes = unlimited;
  /// Breiman: depth cap (0 is a single leaf).
  int max_depth = unlimited;
  /// Cells with at most this many partition samples are not split.
  int max_leaf_samples = 1;
  bool honest = false;

  void validate() const;
};

/// One node of a fitted tree. Internal nodes send x to `left` when
/// x[feature] <= threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Estimation mean (or the fallback value when no estimation sample
  /// reached this node).
  double value = 0.0;
  std::size_t partition_count = 0;
  std::size_t estimation_count = 0;
  int depth = 0;
  /// Level-Splits: index into the split set of the coordinate this node
  /// splits on; -1 for leaves and for Breiman trees.
  int level = -1;

  bool is_leaf() const { return left < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(SplitCriterion criterion, bool honest, std::size_t dimension,
            std::vector<TreeNode> nodes, std::vector<int> split_set);

  SplitCriterion criterion() const { return criterion_; }
  bool honest() const { return honest_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  /// Level-Splits coordinates in selection order; empty for Breiman trees.
  const std::vector<int>& split_set() const { return split_set_; }

  std::size_t num_leaves() const;
  int depth() const;
  /// Index of the leaf reached by x.
  int leaf_of(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  void serialize(std::ostream& os) const;
  std::string serialize() const;
  static TreeModel parse(std::istream& is);

  friend bool operator==(const TreeModel&, const TreeModel&) = default;

 private:
  SplitCriterion criterion_ = SplitCriterion::breiman;
  bool honest_ = false;
  std::size_t dimension_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<int> split_set_;
};

/// V_n(S + {i}) over all rows: the mean over rows of the squared cell mean,
/// with cells defined by agreement on the coordinates S + {i}. Requires
/// binary features.
double level_split_score(const ScalarDataset& data, std::span<const int> split_set, int feature);

/// Sum over the two children of (N_z / N) * mean_z^2 for the test
/// x[feature] <= threshold, restricted to `cell`. nullopt when a child
/// would be empty.
std::optional<double> breiman_local_score(const ScalarDataset& data,
                                          std::span<const std::size_t> cell, int feature,
                                          double threshold);

TreeModel fit_tree(const ScalarDataset& data, const TreeParams& params, std::uint64_t seed);
/// Fits on the given rows of `data` only.
TreeModel fit_tree(const ScalarDataset& data, std::span<const std::size_t> rows,
                   const TreeParams& params, std::uint64_t seed);

TreeModel fit_level_splits(const ScalarDataset& data, int max_levels, bool honest,
                           std::uint64_t seed);
TreeModel fit_breiman(const ScalarDataset& data, int max_nodes, int max_depth, bool honest,
                      std::uint64_t seed);

/// The split count prescribed by the Level-Splits consistency result:
/// log t = Cr / (Cr + 2) * (ln n - ln ln(d / delta)). Not used by fitting.
double theorem_split_levels(double C, int r, std::size_t n, std::size_t d, double delta);

}  // namespace lrnp
