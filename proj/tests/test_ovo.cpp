#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "lrnp/ovo.hpp"
#include "test_util.hpp"

using namespace lrnp;
using lrnp::testing::all_rankings;

namespace {

// Ensemble of constants: sign[(i,j)] = +1 means j beats i.
PairwiseEnsemble constant_ensemble(int k, const std::vector<int>& signs) {
  std::vector<BinaryHypothesis> h;
  for (int s : signs) h.push_back(BinaryHypothesis::constant(s));
  return PairwiseEnsemble(k, 1, h, std::vector<std::size_t>(signs.size(), 1), 0);
}

// Minimum error over constants and every stump whose threshold separates two
// consecutive distinct values, enumerated directly.
std::size_t brute_force_min(const FeatureMatrix& x, const std::vector<int>& y) {
  const std::size_t n = y.size();
  std::size_t best = n;
  for (int s : {+1, -1}) {
    std::size_t e = 0;
    for (int v : y) e += v != s;
    best = std::min(best, e);
  }
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t r = 0; r < n; ++r) values.push_back(x(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
      const double thr = 0.5 * (values[t] + values[t + 1]);
      for (int pol : {+1, -1}) {
        std::size_t e = 0;
        for (std::size_t r = 0; r < n; ++r) e += (x(r, f) <= thr ? pol : -pol) != y[r];
        best = std::min(best, e);
      }
    }
  }
  return best;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Scores on a single real feature; every pairwise order is a threshold rule.
AffineScoreFunction crossing_lines(int d) {
  std::vector<std::vector<double>> w(4, std::vector<double>(static_cast<std::size_t>(d)));
  w[0][0] = -0.8;
  w[1][0] = 0.6;
  w[2][0] = 0.1;
  w[3][0] = 0.3;
  return AffineScoreFunction({0.9, 0.2, 0.5, 0.3}, w);
}

PairwiseProbabilityMatrix random_sst(Rng& rng, int k) {
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> rank(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t)
    rank[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = t;
  std::uniform_real_distribution<double> margin(0.05, 0.5);
  std::vector<double> upper;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double m = margin(rng);
      upper.push_back(rank[static_cast<std::size_t>(i)] < rank[static_cast<std::size_t>(j)]
                          ? 0.5 + m
                          : 0.5 - m);
    }
  return PairwiseProbabilityMatrix(k, upper);
}

}  // namespace

TEST(Decompose, CompleteRankingsFillEveryPair) {
  const auto m = SparseScoreFunction::make(6, 4, 2, 1);
  const auto data = sample_complete(m, NoiseSpec::none(), 40, 1);
  const auto tasks = decompose_pairwise(data);
  ASSERT_EQ(tasks.size(), 6u);
  for (const auto& t : tasks) EXPECT_EQ(t.rows.size(), 40u);
}

TEST(Decompose, EmptyRankingsGiveEmptyTasks) {
  const auto m = SparseScoreFunction::make(6, 4, 2, 1);
  const auto data = sample_incomplete(m, NoiseSpec::none(), SurvivalSpec::uniform(4, 0.0), 30, 1);
  for (const auto& t : decompose_pairwise(data)) EXPECT_TRUE(t.rows.empty());
}

TEST(Decompose, SingleIncompleteSample) {
  const RankingDataset data(
      FeatureMatrix(1, 2), std::vector<IncompleteRanking>{IncompleteRanking::from_order(3, {2, 0})},
      3);
  const auto tasks = decompose_pairwise(data);
  const auto& t01 = tasks[pair_index(3, 0, 1)];
  const auto& t02 = tasks[pair_index(3, 0, 2)];
  const auto& t12 = tasks[pair_index(3, 1, 2)];
  EXPECT_TRUE(t01.rows.empty());
  EXPECT_TRUE(t12.rows.empty());
  ASSERT_EQ(t02.rows.size(), 1u);
  EXPECT_EQ(t02.labels[0], +1);
}

TEST(Decompose, PartialTiesAreSkipped) {
  const RankingDataset data(
      FeatureMatrix(1, 1),
      std::vector<PartialRanking>{PartialRanking::from_blocks(3, {{1, 2}, {0}})}, 3);
  const auto tasks = decompose_pairwise(data);
  EXPECT_EQ(tasks[pair_index(3, 0, 1)].labels, std::vector<int>{+1});
  EXPECT_EQ(tasks[pair_index(3, 0, 2)].labels, std::vector<int>{+1});
  EXPECT_TRUE(tasks[pair_index(3, 1, 2)].rows.empty());
}

TEST(Decompose, ObservationCountsFollowTheBinomial) {
  const auto m = SparseScoreFunction::make(6, 4, 2, 1);
  const std::size_t n = 5000;
  const double q = 0.7;
  const auto data = sample_incomplete(m, NoiseSpec::none(), SurvivalSpec::uniform(4, q), n, 3);
  const double mean = n * q * q, sd = std::sqrt(n * q * q * (1 - q * q));
  for (const auto& t : decompose_pairwise(data)) {
    EXPECT_NEAR(static_cast<double>(t.rows.size()), mean, 3 * sd);
    for (std::size_t s = 0; s < t.rows.size(); ++s) {
      const auto& sigma = data.incomplete()[t.rows[s]];
      EXPECT_EQ(pairwise_sign(sigma, t.i, t.j), t.labels[s]);
    }
  }
}

TEST(Erm, Examples) {
  const auto x = FeatureMatrix::from_rows({{0.1}, {0.2}, {0.3}, {0.4}});
  const auto rows = iota(4);
  const std::vector<int> separable = {+1, +1, -1, -1};
  EXPECT_EQ(erm_stump(x, rows, separable).errors, 0u);

  const std::vector<int> all_plus = {+1, +1, +1, +1};
  const auto c = erm_stump(x, rows, all_plus);
  EXPECT_EQ(c.errors, 0u);
  EXPECT_EQ(c.hypothesis, BinaryHypothesis::constant(+1));

  const std::vector<int> alternating = {+1, -1, +1, -1};
  EXPECT_EQ(erm_stump(x, rows, alternating).errors, 1u);
  EXPECT_EQ(erm_stump(x, rows, alternating).errors, brute_force_min(x, alternating));

  const auto empty = erm_stump(x, {}, {});
  EXPECT_EQ(empty.hypothesis, BinaryHypothesis::constant(+1));
  EXPECT_EQ(empty.errors, 0u);
}

TEST(Erm, MatchesExhaustiveEnumeration) {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 50;
    const std::size_t d = 1 + rng() % 5;
    FeatureMatrix x(n, d);
    std::vector<int> y(n);
    std::uniform_int_distribution<int> level(0, 6);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < d; ++j) x(r, j) = level(rng) / 6.0;
      y[r] = rng() % 2 ? +1 : -1;
    }
    const auto result = erm_stump(x, iota(n), y);
    EXPECT_EQ(result.errors, brute_force_min(x, y));
    EXPECT_EQ(result.errors, empirical_errors(result.hypothesis, x, iota(n), y));
  }
}

TEST(Erm, ConstantClassOnlyReturnsConstants) {
  const auto x = FeatureMatrix::from_rows({{0.1}, {0.2}, {0.3}});
  const std::vector<int> y = {+1, -1, -1};
  const auto r = erm_stump(x, iota(3), y, HypothesisClass::constant);
  EXPECT_EQ(r.hypothesis, BinaryHypothesis::constant(-1));
  EXPECT_EQ(r.errors, 1u);
}

TEST(Copeland, Examples) {
  // Label 0 beats everyone.
  const auto top = constant_ensemble(3, {-1, -1, +1});
  const auto s = top.copeland_scores(std::vector<double>{0.0});
  EXPECT_EQ(s[0], 1.0);

  // Label 2 loses to everyone.
  const auto bottom = constant_ensemble(3, {-1, -1, -1});
  EXPECT_EQ(bottom.copeland_scores(std::vector<double>{0.0})[2], 3.0);

  // 0 beats 1, 1 beats 2, 2 beats 0.
  const auto cycle = constant_ensemble(3, {-1, +1, -1});
  EXPECT_EQ(cycle.copeland_scores(std::vector<double>{0.0}), (std::vector<double>{2, 2, 2}));
}

TEST(Copeland, ScoresSumToKPlusPairs) {
  Rng rng(1);
  for (int k = 2; k <= 6; ++k)
    for (int t = 0; t < 50; ++t) {
      std::vector<int> signs;
      for (std::size_t p = 0; p < num_pairs(k); ++p) signs.push_back(rng() % 2 ? 1 : -1);
      const auto s = constant_ensemble(k, signs).copeland_scores(std::vector<double>{0.0});
      double sum = 0;
      for (double v : s) {
        EXPECT_GE(v, 1);
        EXPECT_LE(v, k);
        sum += v;
      }
      EXPECT_EQ(sum, k + static_cast<double>(num_pairs(k)));
    }
}

TEST(RandomTies, Examples) {
  Rng rng(5);
  EXPECT_EQ(rank_by_score_random_ties(std::vector<double>{1, 2, 3}, rng), Ranking::identity(3));
  EXPECT_EQ(rank_by_score_random_ties(std::vector<double>{1, 3, 2}, rng),
            Ranking::from_positions({1, 3, 2}));
}

TEST(RandomTies, UniformOverPermutations) {
  Rng rng(6);
  std::map<std::string, int> counts;
  const int draws = 60000;
  for (int t = 0; t < draws; ++t)
    ++counts[to_string(rank_by_score_random_ties(std::vector<double>{2, 2, 2}, rng))];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [key, c] : counts) EXPECT_NEAR(static_cast<double>(c) / draws, 1.0 / 6.0, 0.02);
}

TEST(FitOvo, RecoversBinaryRealizableTarget) {
  const AffineScoreFunction m({0.1, 0.5, 0.3}, {{0.8, 0, 0}, {0, 0, 0}, {0.0, 0, 0.5}});
  const auto train = sample_complete(m, NoiseSpec::none(), 500, 1);
  const auto test = sample_complete(m, NoiseSpec::none(), 500, 2);
  const auto ens = fit_ovo(train, {}, 3);
  for (std::size_t r = 0; r < test.size(); ++r)
    EXPECT_EQ(ens.predict(test.features().row(r), r), test.complete()[r]);
}

TEST(FitOvo, RecoversThresholdTargetUnderErasure) {
  const auto m = crossing_lines(3);
  const auto real = FeatureDistribution::uniform_real();
  const auto train =
      sample_incomplete(m, NoiseSpec::none(), SurvivalSpec::uniform(4, 0.7), 5000, 1, real);
  const auto test = sample_complete(m, NoiseSpec::none(), 1000, 2, real);
  const auto ens = fit_ovo(train, {}, 4);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < test.size(); ++r)
    hits += ens.predict(test.features().row(r), r) == test.complete()[r];
  EXPECT_GE(hits, 950u);
}

TEST(FitOvo, EmptyDataGivesRandomPermutations) {
  const RankingDataset empty(FeatureMatrix(0, 2), std::vector<IncompleteRanking>{}, 3);
  const auto ens = fit_ovo(empty, {}, 1);
  for (const auto& h : ens.classifiers()) EXPECT_EQ(h, BinaryHypothesis::constant(+1));
  for (auto size : ens.pair_sizes()) EXPECT_EQ(size, 0u);
  std::set<std::string> seen;
  for (std::uint64_t r = 0; r < 200; ++r)
    seen.insert(to_string(ens.predict(std::vector<double>{0, 0}, r)));
  EXPECT_GT(seen.size(), 1u);
}

TEST(FitOvo, DeterministicAndThreadIndependent) {
  const auto m = SparseScoreFunction::make(8, 4, 3, 2);
  const auto data = sample_partial(m, NoiseSpec::gaussian(0.05), {}, 400, 2);
  OvoParams p;
  const auto a = fit_ovo(data, p, 5);
  p.threads = 3;
  EXPECT_EQ(a, fit_ovo(data, p, 5));
  const std::vector<double> x(8, 1.0);
  EXPECT_EQ(a.predict(x, 7), a.predict(x, 7));
}

TEST(FitOvo, SerializationRoundTrip) {
  const auto m = SparseScoreFunction::make(8, 4, 3, 2);
  const auto data = sample_incomplete(m, NoiseSpec::none(), SurvivalSpec::uniform(4, 0.6), 300, 2);
  const auto ens = fit_ovo(data, {}, 5);
  std::istringstream is(ens.serialize());
  EXPECT_EQ(PairwiseEnsemble::parse(is), ens);
  for (const auto& h : ens.classifiers()) EXPECT_EQ(BinaryHypothesis::parse(h.to_string()), h);
  EXPECT_THROW(BinaryHypothesis::parse("stump x"), ValidationError);
}

TEST(Kemeny, Examples) {
  const std::vector<double> unanimous = {1, 1, 1};
  EXPECT_EQ(kemeny_median_bruteforce(PairwiseProbabilityMatrix(3, unanimous)),
            Ranking::identity(3));

  const PairwiseProbabilityMatrix sst(3, std::vector<double>{0.9, 0.8, 0.7});
  EXPECT_TRUE(sst.is_sst());
  EXPECT_EQ(kemeny_median_bruteforce(sst), Ranking::identity(3));
  EXPECT_EQ(bayes_ranking(sst), Ranking::identity(3));

  const std::vector<double> reversal(6, 0.0);
  EXPECT_EQ(kemeny_median_bruteforce(PairwiseProbabilityMatrix(4, reversal)),
            Ranking::from_positions({4, 3, 2, 1}));

  EXPECT_THROW(kemeny_median_bruteforce(PairwiseProbabilityMatrix(9, std::vector<double>(36, 1.0))),
               ValidationError);
}

TEST(Kemeny, ExpectedDistanceMatchesEnumeration) {
  Rng rng(3);
  const auto p = random_sst(rng, 4);
  for (const auto& sigma : all_rankings(4)) {
    double e = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j && sigma.position(i) < sigma.position(j)) e += p(j, i);
    EXPECT_NEAR(expected_kendall_tau(p, sigma), e, 1e-12);
  }
}

TEST(Kemeny, CopelandEqualsKemenyUnderSst) {
  Rng rng(11);
  for (int t = 0; t < 300; ++t) {
    const int k = 3 + t % 3;
    const auto p = random_sst(rng, k);
    ASSERT_TRUE(p.is_sst());
    EXPECT_EQ(bayes_ranking(p), kemeny_median_bruteforce(p));
  }
}

TEST(ProbabilityMatrix, ComplementAndFromScores) {
  const PairwiseProbabilityMatrix p(3, std::vector<double>{0.9, 0.2, 0.6});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_DOUBLE_EQ(p(i, j) + p(j, i), 1.0);
      }
  EXPECT_FALSE(p.is_sst());  // 0 > 1, 1 > 2, 2 > 0
  EXPECT_FALSE(PairwiseProbabilityMatrix(3, std::vector<double>{0.5, 1, 1}).is_sst());
  const auto s = PairwiseProbabilityMatrix::from_scores(std::vector<double>{0.1, 0.7, 0.4});
  EXPECT_EQ(bayes_ranking(s), Ranking::from_positions({3, 1, 2}));
}
