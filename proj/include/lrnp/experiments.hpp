#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lrnp/labelrank.hpp"
#include "lrnp/oracles.hpp"

namespace lrnp {

/// Synthetic sparse target plus train/test sizes shared by the sweeps.
struct SyntheticSetup {
  int d = 30;
  int k = 6;
  int r = 5;
  SupportMode support = SupportMode::shared;
  std::size_t n_train = 4000;
  std::size_t n_test = 1000;
  std::uint64_t seed = 0;
};

struct NamedLearner {
  std::string name;
  LearnerConfig config;
};

/// Fully grown tree, depth-5 tree and honest forest.
std::vector<NamedLearner> default_sweep_learners(int n_trees = 100);

/// Truncated-Gaussian stddevs from 0.01 to 0.2, preceded by the noiseless
/// point. For the default setup this spans alpha from 0 to about 0.88.
std::vector<NoiseSpec> default_gaussian_grid();
std::vector<double> default_theta_grid();

struct SweepRow {
  std::string noise;
  double alpha = 0.0;
  double beta = 0.0;
  std::string learner;
  /// Mean Kendall tau coefficient on noiseless held-out labels.
  double kt = 0.0;
};

/// Every grid point reuses the same feature draws and noise streams, so the
/// points differ only in the noise parameters.
std::vector<SweepRow> noise_sweep(const SyntheticSetup& setup, const std::vector<NoiseSpec>& grid,
                                  const std::vector<NamedLearner>& learners, unsigned threads = 1);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Stddev whose alpha-inconsistency on `setup`'s training draws lies within
/// `tolerance` of target_alpha, by bisection on a log scale over
/// [1e-4, 10]; nullopt when no such stddev is found.
std::optional<double> calibrate_gaussian(const ScoreFunction& m, const SyntheticSetup& setup,
                                         double target_alpha, double tolerance = 0.01,
                                         int max_iterations = 60);

struct MallowsRow {
  double theta = 0.0;
  std::string learner;
  double mallows_alpha = 0.0;
  double mallows_beta = 0.0;
  double mallows_kt = 0.0;
  std::optional<double> gaussian_stddev;
  double gaussian_alpha = 0.0;
  double gaussian_beta = 0.0;
  double gaussian_kt = 0.0;
  /// Non-empty when calibration failed; the Gaussian columns are then unset.
  std::string error;
};

std::vector<MallowsRow> mallows_sweep(const SyntheticSetup& setup,
                                      const std::vector<double>& thetas,
                                      const std::vector<NamedLearner>& learners,
                                      double tolerance = 0.01, unsigned threads = 1);
void write_mallows_csv(std::ostream& os, const std::vector<MallowsRow>& rows);

}  // namespace lrnp
