#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrnp/common.hpp"
#include "lrnp/dataset.hpp"
#include "lrnp/ranking.hpp"

namespace lrnp {

/// Target score function m : X -> [0,1]^k.
class ScoreFunction {
 public:
  virtual ~ScoreFunction() = default;
  virtual int dimension() const = 0;
  virtual int num_labels() const = 0;
  /// Writes m(x) into out (size num_labels()).
  virtual void evaluate(std::span<const double> x, std::span<double> out) const = 0;

  std::vector<double> operator()(std::span<const double> x) const;
  /// argsort(m(x)), best (highest score) first.
  Ranking ranking(std::span<const double> x) const;
};

/// How relevant coordinate sets are assigned to labels.
enum class SupportMode {
  /// One set R of r coordinates, shared by every label; each label still has
  /// its own lookup table.
  shared,
  /// An independent set R_j per label.
  independent,
};

/// m_j(x) = t_j(x restricted to R_j) with |R_j| = r and binary x.
class SparseScoreFunction final : public ScoreFunction {
 public:
  /// Relevant sets are drawn without replacement from [d]; table entries are
  /// i.i.d. uniform on [0,1]. Deterministic in `seed`.
  static SparseScoreFunction make(int d, int k, int r, std::uint64_t seed,
                                  SupportMode mode = SupportMode::shared);
  SparseScoreFunction(int d, std::vector<std::vector<int>> relevant,
                      std::vector<std::vector<double>> tables);

  int dimension() const override { return d_; }
  int num_labels() const override { return static_cast<int>(relevant_.size()); }
  int sparsity() const { return r_; }
  void evaluate(std::span<const double> x, std::span<double> out) const override;

  const std::vector<int>& relevant_set(int label) const {
    return relevant_[static_cast<std::size_t>(label)];
  }
  const std::vector<double>& table(int label) const {
    return tables_[static_cast<std::size_t>(label)];
  }
  /// Sorted union of all relevant sets.
  std::vector<int> relevant_union() const;

 private:
  int d_ = 0;
  int r_ = 0;
  std::vector<std::vector<int>> relevant_;
  std::vector<std::vector<double>> tables_;
};

/// m_i(x) = clamp(intercept_i + <w_i, x>, 0, 1). When every weight vector is
/// supported on one shared feature, each pairwise comparison is a threshold
/// rule on that feature.
class AffineScoreFunction final : public ScoreFunction {
 public:
  AffineScoreFunction(std::vector<double> intercepts, std::vector<std::vector<double>> weights);

  int dimension() const override { return d_; }
  int num_labels() const override { return static_cast<int>(intercepts_.size()); }
  void evaluate(std::span<const double> x, std::span<double> out) const override;

 private:
  int d_ = 0;
  std::vector<double> intercepts_;
  std::vector<std::vector<double>> weights_;
};

/// Distribution of feature vectors. Defaults to uniform on {0,1}^d.
struct FeatureDistribution {
  enum class Kind { uniform_binary, bernoulli, uniform_real };
  Kind kind = Kind::uniform_binary;
  /// Per-coordinate P(x_j = 1) for Kind::bernoulli.
  std::vector<double> biases;

  static FeatureDistribution uniform_binary() { return {}; }
  static FeatureDistribution bernoulli(std::vector<double> p) {
    return {Kind::bernoulli, std::move(p)};
  }
  static FeatureDistribution uniform_real() { return {Kind::uniform_real, {}}; }

  void sample(Rng& rng, std::span<double> x) const;
};

struct NoiseSpec {
  enum class Kind { none, truncated_gaussian, mallows };
  Kind kind = Kind::none;
  double stddev = 0.0;
  double theta = 0.0;

  static NoiseSpec none() { return {}; }
  static NoiseSpec gaussian(double stddev);
  static NoiseSpec mallows(double theta);

  std::string describe() const;
};

/// Per-label survival probabilities q_i(x). Coins are independent across
/// labels, so the pair (i, j) survives with probability q_i(x) * q_j(x).
struct SurvivalSpec {
  /// Probabilities used when no rule applies (or the rule does not fire).
  std::vector<double> q;
  /// Optional feature-dependent rule: when x[feature] > threshold the
  /// probabilities q_above are used instead.
  struct ThresholdRule {
    int feature = 0;
    double threshold = 0.5;
    std::vector<double> q_above;
  };
  std::optional<ThresholdRule> rule;

  static SurvivalSpec constant(std::vector<double> q);
  static SurvivalSpec uniform(int k, double q) {
    return constant(std::vector<double>(static_cast<std::size_t>(k), q));
  }

  void validate(int k) const;
  std::span<const double> probabilities(std::span<const double> x) const;
  /// Lower bound on pairwise survival: min over i < j of q_i q_j, over both
  /// regimes when a rule is present.
  double deletion_tolerance() const;
};

/// Distribution over increasing interval partitions of positions [1..k].
struct PartitionSpec {
  /// nullopt: block count uniform on {1..k}, then cut points uniform among
  /// the C(k-1, blocks-1) increasing compositions. Otherwise a fixed count.
  std::optional<int> num_blocks;

  static PartitionSpec uniform() { return {}; }
  static PartitionSpec fixed(int blocks) { return {blocks}; }

  std::vector<PositionInterval> sample(Rng& rng, int k) const;
};

/// Zero-mean normal with the given stddev, conditioned on [-bound, bound]
/// by rejection.
double truncated_gaussian(Rng& rng, double stddev, double bound = 0.25);

/// Exact draw from the Mallows model centred at `center` with dispersion
/// theta under Kendall tau distance (repeated insertion).
Ranking apply_mallows(const Ranking& center, double theta, Rng& rng);
Ranking apply_mallows(const Ranking& center, double theta, std::uint64_t seed);

/// argsort(m(x) + xi) for the given noise (none or truncated Gaussian), or a
/// Mallows draw around argsort(m(x)).
Ranking noisy_ranking(const ScoreFunction& m, std::span<const double> x, const NoiseSpec& noise,
                      Rng& noise_rng);

RankingDataset sample_complete(const ScoreFunction& m, const NoiseSpec& noise, std::size_t n,
                               std::uint64_t seed, const FeatureDistribution& features = {});

RankingDataset sample_incomplete(const ScoreFunction& m, const NoiseSpec& noise,
                                 const SurvivalSpec& survival, std::size_t n, std::uint64_t seed,
                                 const FeatureDistribution& features = {});

RankingDataset sample_partial(const ScoreFunction& m, const NoiseSpec& noise,
                              const PartitionSpec& partitions, std::size_t n, std::uint64_t seed,
                              const FeatureDistribution& features = {});

/// Noiseless labels h(x) and noisy labels for the same feature draws.
struct PairedSample {
  RankingDataset noiseless;
  RankingDataset noisy;
};
PairedSample sample_paired(const ScoreFunction& m, const NoiseSpec& noise, std::size_t n,
                           std::uint64_t seed, const FeatureDistribution& features = {});

/// Fraction of rows whose noisy ranking differs from the noiseless one.
double alpha_inconsistency(const RankingDataset& noiseless, const RankingDataset& noisy);
/// Mean Kendall tau coefficient between paired rankings.
double beta_kt_gap(const RankingDataset& noiseless, const RankingDataset& noisy);

/// True when flipping any binary coordinate outside the relevant union of m
/// leaves argsort(m(x)) unchanged.
bool sparsity_certificate(const SparseScoreFunction& m, std::span<const double> x);

/// Minimum over label pairs of the fraction of rows in which the pair is
/// comparable; the empirical counterpart of the deletion tolerance.
double min_pair_observation_frequency(const RankingDataset& data);

}  // namespace lrnp
