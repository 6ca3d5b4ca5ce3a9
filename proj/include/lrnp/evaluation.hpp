#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lrnp/dataset.hpp"
#include "lrnp/labelrank.hpp"
#include "lrnp/ovo.hpp"

namespace lrnp {

/// Either the labelwise ranker (complete labels) or the pairwise ensemble.
struct ModelConfig {
  enum class Method { labelwise, pairwise };
  Method method = Method::labelwise;
  LearnerConfig learner;
  OvoParams ovo;

  static ModelConfig labelwise(LearnerConfig learner) { return {Method::labelwise, learner, {}}; }
  static ModelConfig pairwise(OvoParams ovo = {}) { return {Method::pairwise, {}, ovo}; }

  std::string describe() const;
  void set_threads(unsigned threads);
};

using RankingModel = std::variant<LabelwiseRanker, PairwiseEnsemble>;

RankingModel fit_model(const RankingDataset& data, const ModelConfig& config, std::uint64_t seed);
/// `row` keys the tie-breaking stream of pairwise models.
Ranking predict_model(const RankingModel& model, std::span<const double> x, std::uint64_t row = 0);
std::size_t model_dimension(const RankingModel& model);
int model_num_labels(const RankingModel& model);

void save_model(const RankingModel& model, std::ostream& os);
RankingModel load_model(std::istream& is);

/// Kendall tau coefficient of a prediction against a label of any kind;
/// incomplete and partial labels are scored on the pairs they order.
std::optional<double> score_prediction(const Ranking& predicted, const Ranking& truth);
std::optional<double> score_prediction(const Ranking& predicted, const IncompleteRanking& truth);
std::optional<double> score_prediction(const Ranking& predicted, const PartialRanking& truth);

/// Mean score over rows that order at least one pair; nullopt if none does.
std::optional<double> mean_kt(const RankingModel& model, const RankingDataset& test);

/// Shuffles [0, n) with `seed` and cuts it into `folds` contiguous folds
/// whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed);

struct CvParams {
  int repetitions = 5;
  int folds = 10;
  unsigned threads = 1;
};

struct CvRun {
  int repetition = 0;
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::optional<double> mean_kt;
};

struct CvReport {
  std::string learner;
  std::uint64_t seed = 0;
  std::vector<CvRun> runs;
  /// Over runs with a defined score; stddev is the sample standard deviation.
  double mean = 0.0;
  double stddev = 0.0;

  void write_csv(std::ostream& os) const;
};

CvReport cross_validate(const RankingDataset& data, const ModelConfig& config,
                        const CvParams& params, std::uint64_t seed);

}  // namespace lrnp
