#include "lrnp/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "lrnp/common.hpp"

namespace lrnp {

std::vector<NamedLearner> default_sweep_learners(int n_trees) {
  return {{"tree", LearnerConfig::fully_grown_tree()},
          {"shallow-tree", LearnerConfig::shallow_tree()},
          {"forest", LearnerConfig::honest_forest(n_trees)}};
}

std::vector<NoiseSpec> default_gaussian_grid() {
  std::vector<NoiseSpec> grid{NoiseSpec::none()};
  for (double s : {0.01, 0.02, 0.04, 0.07, 0.1, 0.15, 0.2}) grid.push_back(NoiseSpec::gaussian(s));
  return grid;
}

std::vector<double> default_theta_grid() {
  std::vector<double> out;
  for (int t = 6; t <= 44; t += 2) out.push_back(t / 10.0);
  return out;
}

namespace {

struct Synthetic {
  SparseScoreFunction target;
  RankingDataset test;
  std::uint64_t train_seed;
};

Synthetic build(const SyntheticSetup& s) {
  auto m = SparseScoreFunction::make(s.d, s.k, s.r, s.seed, s.support);
  auto test =
      sample_complete(m, NoiseSpec::none(), s.n_test, derive_seed(s.seed, stream::sweep, 1));
  return {std::move(m), std::move(test), derive_seed(s.seed, stream::sweep, 0)};
}

double held_out_kt(const LabelwiseRanker& model, const RankingDataset& test) {
  const auto& truth = test.complete();
  double total = 0.0;
  for (std::size_t r = 0; r < truth.size(); ++r)
    total += kt_coefficient(model.predict(test.features().row(r)), truth[r]);
  return total / static_cast<double>(truth.size());
}

double learner_kt(const NamedLearner& learner, const RankingDataset& train,
                  const RankingDataset& test, std::uint64_t seed) {
  LearnerConfig config = learner.config;
  config.threads = 1;
  config.forest.threads = 1;
  return held_out_kt(fit_label_ranker(train, config, seed), test);
}

}  // namespace

std::vector<SweepRow> noise_sweep(const SyntheticSetup& setup, const std::vector<NoiseSpec>& grid,
                                  const std::vector<NamedLearner>& learners, unsigned threads) {
  const auto syn = build(setup);
  std::vector<SweepRow> rows(grid.size() * learners.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    const auto paired = sample_paired(syn.target, grid[g], setup.n_train, syn.train_seed);
    const double alpha = alpha_inconsistency(paired.noiseless, paired.noisy);
    const double beta = beta_kt_gap(paired.noiseless, paired.noisy);
    for (std::size_t l = 0; l < learners.size(); ++l) {
      auto& row = rows[g * learners.size() + l];
      row.noise = grid[g].describe();
      row.alpha = alpha;
      row.beta = beta;
      row.learner = learners[l].name;
      row.kt = learner_kt(learners[l], paired.noisy, syn.test, setup.seed);
    }
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto precision = os.precision();
  os << std::setprecision(10);
  os << "noise,alpha,beta,learner,kt,kt_over_beta\n";
  for (const auto& r : rows)
    os << r.noise << ',' << r.alpha << ',' << r.beta << ',' << r.learner << ',' << r.kt << ','
       << r.kt / r.beta << "\n";
  os.precision(precision);
}

std::optional<double> calibrate_gaussian(const ScoreFunction& m, const SyntheticSetup& setup,
                                         double target_alpha, double tolerance,
                                         int max_iterations) {
  const auto seed = derive_seed(setup.seed, stream::sweep, 0);
  const auto noiseless = sample_complete(m, NoiseSpec::none(), setup.n_train, seed);
  auto alpha_at = [&](double sd) {
    return alpha_inconsistency(noiseless,
                               sample_complete(m, NoiseSpec::gaussian(sd), setup.n_train, seed));
  };
  double lo = std::log(1e-4), hi = std::log(10.0);
  std::optional<double> best;
  double best_gap = tolerance;
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double a = alpha_at(std::exp(mid));
    const double gap = std::abs(a - target_alpha);
    if (gap <= best_gap) {
      best_gap = gap;
      best = std::exp(mid);
      if (gap <= tolerance / 10) break;
    }
    (a < target_alpha ? lo : hi) = mid;
  }
  return best;
}

std::vector<MallowsRow> mallows_sweep(const SyntheticSetup& setup,
                                      const std::vector<double>& thetas,
                                      const std::vector<NamedLearner>& learners, double tolerance,
                                      unsigned threads) {
  const auto syn = build(setup);
  std::vector<MallowsRow> rows(thetas.size() * learners.size());
  parallel_for(thetas.size(), threads, [&](std::size_t t) {
    const auto mallows =
        sample_paired(syn.target, NoiseSpec::mallows(thetas[t]), setup.n_train, syn.train_seed);
    const double ma = alpha_inconsistency(mallows.noiseless, mallows.noisy);
    const double mb = beta_kt_gap(mallows.noiseless, mallows.noisy);
    const auto sd = calibrate_gaussian(syn.target, setup, ma, tolerance);
    std::optional<PairedSample> gaussian;
    if (sd)
      gaussian = sample_paired(syn.target, NoiseSpec::gaussian(*sd), setup.n_train, syn.train_seed);
    for (std::size_t l = 0; l < learners.size(); ++l) {
      auto& row = rows[t * learners.size() + l];
      row.theta = thetas[t];
      row.learner = learners[l].name;
      row.mallows_alpha = ma;
      row.mallows_beta = mb;
      row.mallows_kt = learner_kt(learners[l], mallows.noisy, syn.test, setup.seed);
      if (!gaussian) {
        row.error = "no Gaussian stddev matches alpha within tolerance";
        continue;
      }
      row.gaussian_stddev = sd;
      row.gaussian_alpha = alpha_inconsistency(gaussian->noiseless, gaussian->noisy);
      row.gaussian_beta = beta_kt_gap(gaussian->noiseless, gaussian->noisy);
      row.gaussian_kt = learner_kt(learners[l], gaussian->noisy, syn.test, setup.seed);
    }
  });
  return rows;
}

void write_mallows_csv(std::ostream& os, const std::vector<MallowsRow>& rows) {
  const auto precision = os.precision();
  os << std::setprecision(10);
  os << "theta,learner,mallows_alpha,mallows_beta,mallows_kt,gaussian_stddev,gaussian_alpha,"
        "gaussian_beta,gaussian_kt,error\n";
  for (const auto& r : rows) {
    os << r.theta << ',' << r.learner << ',' << r.mallows_alpha << ',' << r.mallows_beta << ','
       << r.mallows_kt << ',';
    if (r.gaussian_stddev)
      os << *r.gaussian_stddev << ',' << r.gaussian_alpha << ',' << r.gaussian_beta << ','
         << r.gaussian_kt << ",\n";
    else
      os << ",,,," << r.error << "\n";
  }
  os.precision(precision);
}

}  // namespace lrnp
