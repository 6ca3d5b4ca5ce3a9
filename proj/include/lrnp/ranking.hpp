#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrnp {

// Labels (alternatives) are 0-based inside the library. Positions are
// 1-based, with position 1 the best. Text forms use 1-based labels.

/// A complete ranking of k labels, stored as positions[i] = sigma(i).
class Ranking {
 public:
  Ranking() = default;

  /// Takes 1-based positions; throws ValidationError unless they form a
  /// permutation of {1..k} with k >= 2.
  static Ranking from_positions(std::vector<int> positions);
  /// Takes 0-based labels listed best first.
  static Ranking from_order(std::span<const int> best_first);
  static Ranking identity(int k);

  int k() const { return static_cast<int>(positions_.size()); }
  int position(int label) const { return positions_[static_cast<std::size_t>(label)]; }
  std::span<const int> positions() const { return positions_; }
  /// 0-based labels, best first.
  std::vector<int> order() const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  explicit Ranking(std::vector<int> positions) : positions_(std::move(positions)) {}
  std::vector<int> positions_;
};

/// A ranking over the subset of labels that survived; only relative order
/// among the observed labels is retained.
class IncompleteRanking {
 public:
  IncompleteRanking() = default;
  static IncompleteRanking from_order(int k, std::vector<int> best_first);
  static IncompleteRanking from_ranking(const Ranking& r);

  int k() const { return k_; }
  std::size_t size() const { return observed_.size(); }
  bool empty() const { return observed_.empty(); }
  bool is_complete() const { return static_cast<int>(observed_.size()) == k_; }
  std::span<const int> observed() const { return observed_; }
  /// 0-based index of `label` in the observed list, or -1 when erased.
  int rank_of(int label) const { return rank_[static_cast<std::size_t>(label)]; }
  bool contains(int label) const { return rank_of(label) >= 0; }
  /// Requires is_complete().
  Ranking to_ranking() const;

  friend bool operator==(const IncompleteRanking& a, const IncompleteRanking& b) {
    return a.k_ == b.k_ && a.observed_ == b.observed_;
  }

 private:
  int k_ = 0;
  std::vector<int> observed_;
  std::vector<int> rank_;
};

/// Ordered blocks of tied labels, best block first; blocks cover all k labels.
class PartialRanking {
 public:
  PartialRanking() = default;
  static PartialRanking from_blocks(int k, std::vector<std::vector<int>> blocks);
  static PartialRanking from_ranking(const Ranking& r);

  int k() const { return static_cast<int>(block_of_.size()); }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int label) const { return block_of_[static_cast<std::size_t>(label)]; }
  /// Requires one label per block.
  Ranking to_ranking() const;

  friend bool operator==(const PartialRanking&, const PartialRanking&) = default;

 private:
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
};

/// Per-label scores; std::nullopt marks an erased label.
using ScoreVector = std::vector<std::optional<double>>;

/// Inclusive 1-based range of positions.
struct PositionInterval {
  int first = 1;
  int last = 1;
  friend bool operator==(const PositionInterval&, const PositionInterval&) = default;
};

/// Number of discordant label pairs.
std::size_t kendall_tau(const Ranking& a, const Ranking& b);
/// 1 - 2 * kendall_tau / C(k,2), in [-1, 1].
double kt_coefficient(const Ranking& a, const Ranking& b);
/// Sum of squared position differences.
long long spearman(const Ranking& a, const Ranking& b);

/// Kendall tau coefficient restricted to pairs that `truth` orders, i.e. both
/// labels observed. nullopt when fewer than one such pair exists.
std::optional<double> kt_coefficient_observed(const Ranking& predicted,
                                              const IncompleteRanking& truth);
/// Same, restricted to pairs lying in different blocks of `truth`.
std::optional<double> kt_coefficient_observed(const Ranking& predicted,
                                              const PartialRanking& truth);

/// Non-erased labels by descending score; equal scores keep ascending label order.
IncompleteRanking argsort(std::span<const std::optional<double>> scores);
/// Complete-vector form of argsort (descending, ties by label index).
Ranking argsort_descending(std::span<const double> scores);
/// Ascending order: the smallest value is ranked first. Ties by label index.
Ranking argsort_ascending(std::span<const double> values);

/// (sigma(i) / k) for every label.
std::vector<double> canonical_repr(const Ranking& sigma);

/// Groups labels whose positions fall in the same interval. The intervals
/// must be contiguous, increasing and cover [1, k].
PartialRanking partial_rank(const Ranking& sigma, std::span<const PositionInterval> partition);
void validate_partition(int k, std::span<const PositionInterval> partition);

/// -1 when i precedes j, +1 when j precedes i, nullopt when either label is
/// missing (or, for partial rankings, when both share a block). Requires i != j.
std::optional<int> pairwise_sign(const Ranking& sigma, int i, int j);
std::optional<int> pairwise_sign(const IncompleteRanking& sigma, int i, int j);
std::optional<int> pairwise_sign(const PartialRanking& sigma, int i, int j);

// Text forms: complete "2 1 3" (positions), incomplete ">3 1 5" (labels best
// first), partial "{5,2}>{4}>{1,3}".
std::string to_string(const Ranking& r);
std::string to_string(const IncompleteRanking& r);
std::string to_string(const PartialRanking& r);
Ranking parse_ranking(std::string_view text);
IncompleteRanking parse_incomplete(std::string_view text, int k);
PartialRanking parse_partial(std::string_view text, int k);

constexpr std::size_t num_pairs(int k) {
  return static_cast<std::size_t>(k) * static_cast<std::size_t>(k - 1) / 2;
}

}  // namespace lrnp
