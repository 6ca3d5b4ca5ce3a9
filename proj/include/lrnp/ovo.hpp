#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lrnp/common.hpp"
#include "lrnp/dataset.hpp"

namespace lrnp {

/// A constant classifier or a decision stump; stumps output `polarity` when
/// x[feature] <= threshold and -polarity otherwise.
struct BinaryHypothesis {
  enum class Kind { constant, stump };
  Kind kind = Kind::constant;
  int feature = -1;
  double threshold = 0.0;
  int polarity = +1;

  static BinaryHypothesis constant(int sign);
  static BinaryHypothesis stump(int feature, double threshold, int polarity);

  int operator()(std::span<const double> x) const {
    if (kind == Kind::constant) return polarity;
    return x[static_cast<std::size_t>(feature)] <= threshold ? polarity : -polarity;
  }

  std::string to_string() const;
  static BinaryHypothesis parse(std::string_view text);
  friend bool operator==(const BinaryHypothesis&, const BinaryHypothesis&) = default;
};

/// Training set T_ij for labels i < j: rows of the source feature matrix where
/// the pair is comparable, labelled +1 when j is ranked above i.
struct PairTask {
  int i = 0;
  int j = 0;
  std::vector<std::size_t> rows;
  std::vector<int> labels;
};

/// Index of pair (i, j), i < j, in the lexicographic pair order.
std::size_t pair_index(int k, int i, int j);

std::vector<PairTask> decompose_pairwise(const RankingDataset& data);

struct ErmResult {
  BinaryHypothesis hypothesis;
  std::size_t errors = 0;
};

enum class HypothesisClass { stump, constant };
std::string to_string(HypothesisClass c);
HypothesisClass parse_hypothesis_class(std::string_view text);

/// Exact empirical risk minimizer. Candidates are scanned in the order
/// constant +1, constant -1, then stumps by (feature, threshold, polarity)
/// with thresholds at midpoints between consecutive distinct values; only a
/// strictly smaller error replaces the incumbent. An empty sample yields
/// constant +1.
ErmResult erm_stump(const FeatureMatrix& x, std::span<const std::size_t> rows,
                    std::span<const int> labels, HypothesisClass cls = HypothesisClass::stump);

std::size_t empirical_errors(const BinaryHypothesis& h, const FeatureMatrix& x,
                             std::span<const std::size_t> rows, std::span<const int> labels);

struct OvoParams {
  HypothesisClass hypothesis_class = HypothesisClass::stump;
  unsigned threads = 1;
};

/// One classifier per label pair, aggregated with the Copeland rule.
class PairwiseEnsemble {
 public:
  PairwiseEnsemble() = default;
  PairwiseEnsemble(int k, std::size_t dimension, std::vector<BinaryHypothesis> classifiers,
                   std::vector<std::size_t> pair_sizes, std::uint64_t seed);

  int num_labels() const { return k_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<BinaryHypothesis>& classifiers() const { return classifiers_; }
  const BinaryHypothesis& classifier(int i, int j) const;
  /// Training-set size per pair; zero marks a pair that fell back to the
  /// constant default.
  const std::vector<std::size_t>& pair_sizes() const { return pair_sizes_; }
  std::uint64_t seed() const { return seed_; }

  /// 1 + number of labels predicted to beat label i.
  std::vector<double> copeland_scores(std::span<const double> x) const;
  /// Ascending Copeland score; tied labels in uniformly random order.
  Ranking predict(std::span<const double> x, Rng& rng) const;
  /// Tie-breaking drawn from a stream keyed by the ensemble seed and `row`.
  Ranking predict(std::span<const double> x, std::uint64_t row) const;

  void serialize(std::ostream& os) const;
  std::string serialize() const;
  static PairwiseEnsemble parse(std::istream& is);

  friend bool operator==(const PairwiseEnsemble&, const PairwiseEnsemble&) = default;

 private:
  int k_ = 0;
  std::size_t dimension_ = 0;
  std::vector<BinaryHypothesis> classifiers_;
  std::vector<std::size_t> pair_sizes_;
  std::uint64_t seed_ = 0;
};

/// Sorts labels by ascending score, shuffling tied labels with `rng`.
Ranking rank_by_score_random_ties(std::span<const double> scores, Rng& rng);

PairwiseEnsemble fit_ovo(const RankingDataset& data, const OvoParams& params, std::uint64_t seed);

/// p(i, j) = probability that label i is ranked above label j.
class PairwiseProbabilityMatrix {
 public:
  /// Upper-triangle values p(i, j) for i < j in pair_index order.
  PairwiseProbabilityMatrix(int k, std::span<const double> upper);
  /// Deterministic preferences: p(i, j) = 1 when scores[i] > scores[j].
  static PairwiseProbabilityMatrix from_scores(std::span<const double> scores);

  int k() const { return k_; }
  double operator()(int i, int j) const { return p_[static_cast<std::size_t>(i * k_ + j)]; }
  /// No entry equals 1/2, and majority preferences are transitive.
  bool is_sst() const;

 private:
  int k_ = 0;
  std::vector<double> p_;
};

/// h*(i) = 1 + sum over j of 1{p(i, j) < 1/2}.
std::vector<double> bayes_scores(const PairwiseProbabilityMatrix& p);
/// Ascending Bayes score with ties to the lower label.
Ranking bayes_ranking(const PairwiseProbabilityMatrix& p);

/// Expected Kendall tau distance of `sigma` under p.
double expected_kendall_tau(const PairwiseProbabilityMatrix& p, const Ranking& sigma);
/// Minimizer of expected_kendall_tau by enumeration of S_k (k <= 8). Among
/// exact ties the first ranking in lexicographic best-first order wins.
Ranking kemeny_median_bruteforce(const PairwiseProbabilityMatrix& p);

}  // namespace lrnp
