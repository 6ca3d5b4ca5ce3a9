#include "lrnp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>

#include "lrnp/common.hpp"

namespace lrnp {

std::string ModelConfig::describe() const {
  if (method == Method::labelwise) return "labelwise " + learner.describe();
  return "pairwise " + to_string(ovo.hypothesis_class);
}

void ModelConfig::set_threads(unsigned threads) {
  learner.threads = threads;
  learner.forest.threads = threads;
  ovo.threads = threads;
}

RankingModel fit_model(const RankingDataset& data, const ModelConfig& config, std::uint64_t seed) {
  if (config.method == ModelConfig::Method::labelwise)
    return fit_label_ranker(data, config.learner, seed);
  return fit_ovo(data, config.ovo, seed);
}

Ranking predict_model(const RankingModel& model, std::span<const double> x, std::uint64_t row) {
  if (const auto* lw = std::get_if<LabelwiseRanker>(&model)) return lw->predict(x);
  return std::get<PairwiseEnsemble>(model).predict(x, row);
}

std::size_t model_dimension(const RankingModel& model) {
  return std::visit([](const auto& m) { return m.dimension(); }, model);
}

int model_num_labels(const RankingModel& model) {
  return std::visit([](const auto& m) { return m.num_labels(); }, model);
}

void save_model(const RankingModel& model, std::ostream& os) {
  std::visit([&](const auto& m) { m.serialize(os); }, model);
}

RankingModel load_model(std::istream& is) {
  const int c = (is >> std::ws).peek();
  if (c == 'l') return LabelwiseRanker::parse(is);
  if (c == 'o') return PairwiseEnsemble::parse(is);
  throw ValidationError("unrecognized model file");
}

std::optional<double> score_prediction(const Ranking& predicted, const Ranking& truth) {
  return kt_coefficient(predicted, truth);
}

std::optional<double> score_prediction(const Ranking& predicted, const IncompleteRanking& truth) {
  return kt_coefficient_observed(predicted, truth);
}

std::optional<double> score_prediction(const Ranking& predicted, const PartialRanking& truth) {
  return kt_coefficient_observed(predicted, truth);
}

std::optional<double> mean_kt(const RankingModel& model, const RankingDataset& test) {
  double total = 0.0;
  std::size_t scored = 0;
  std::visit(
      [&](const auto& rows) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const auto pred = predict_model(model, test.features().row(r), r);
          if (const auto s = score_prediction(pred, rows[r])) {
            total += *s;
            ++scored;
          }
        }
      },
      test.labels());
  if (scored == 0) return std::nullopt;
  return total / static_cast<double>(scored);
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least two folds");
  const auto f = static_cast<std::size_t>(folds);
  if (n < f)
    throw ValidationError("cannot split " + std::to_string(n) + " rows into " +
                          std::to_string(folds) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> out(f);
  std::size_t at = 0;
  for (std::size_t i = 0; i < f; ++i) {
    const std::size_t size = n / f + (i < n % f ? 1 : 0);
    out[i].assign(perm.begin() + static_cast<std::ptrdiff_t>(at),
                  perm.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(out[i].begin(), out[i].end());
    at += size;
  }
  return out;
}

CvReport cross_validate(const RankingDataset& data, const ModelConfig& config,
                        const CvParams& params, std::uint64_t seed) {
  if (params.repetitions < 1) throw ValidationError("need at least one repetition");
  const auto reps = static_cast<std::size_t>(params.repetitions);
  const auto folds = static_cast<std::size_t>(params.folds);
  std::vector<std::vector<std::vector<std::size_t>>> splits;
  for (std::size_t r = 0; r < reps; ++r)
    splits.push_back(make_folds(data.size(), params.folds, derive_seed(seed, stream::fold, r)));

  ModelConfig inner = config;
  inner.set_threads(1);
  CvReport report;
  report.learner = config.describe();
  report.seed = seed;
  report.runs.resize(reps * folds);
  parallel_for(report.runs.size(), params.threads, [&](std::size_t t) {
    const std::size_t r = t / folds, f = t % folds;
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) train.insert(train.end(), splits[r][g].begin(), splits[r][g].end());
    std::sort(train.begin(), train.end());
    const auto& test_rows = splits[r][f];
    const auto model = fit_model(data.subset(train), inner, derive_seed(seed, stream::run, t));
    auto& run = report.runs[t];
    run.repetition = static_cast<int>(r);
    run.fold = static_cast<int>(f);
    run.n_train = train.size();
    run.n_test = test_rows.size();
    run.mean_kt = mean_kt(model, data.subset(test_rows));
  });

  std::vector<double> values;
  for (const auto& run : report.runs)
    if (run.mean_kt) values.push_back(*run.mean_kt);
  if (!values.empty()) {
    report.mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - report.mean) * (v - report.mean);
    report.stddev =
        values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  } else {
    report.mean = report.stddev = std::nan("");
  }
  return report;
}

void CvReport::write_csv(std::ostream& os) const {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(10);
  os << "repetition,fold,n_train,n_test,mean_kt\n";
  for (const auto& r : runs) {
    os << r.repetition + 1 << ',' << r.fold + 1 << ',' << r.n_train << ',' << r.n_test << ',';
    if (r.mean_kt) os << *r.mean_kt;
    os << "\n";
  }
  os << "mean,,,," << mean << "\n";
  os << "stddev,,,," << stddev << "\n";
  os.flags(flags);
  os.precision(precision);
}

}  // namespace lrnp
