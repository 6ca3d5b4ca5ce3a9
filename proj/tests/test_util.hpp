#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lrnp/cart.hpp"
#include "lrnp/dataset.hpp"
#include "lrnp/oracles.hpp"
#include "lrnp/ranking.hpp"

namespace lrnp::testing {

// Every ranking of k labels as position vectors, in lexicographic order.
inline std::vector<Ranking> all_rankings(int k) {
  std::vector<int> p(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) p[static_cast<std::size_t>(i)] = i + 1;
  std::vector<Ranking> out;
  do {
    out.push_back(Ranking::from_positions(p));
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// All 2^d points of {0,1}^d, each repeated `copies` times.
inline FeatureMatrix hypercube(int d, int copies = 1) {
  const std::size_t n = std::size_t{1} << d;
  FeatureMatrix x(n * static_cast<std::size_t>(copies), static_cast<std::size_t>(d));
  for (int c = 0; c < copies; ++c)
    for (std::size_t v = 0; v < n; ++v)
      for (int j = 0; j < d; ++j)
        x(static_cast<std::size_t>(c) * n + v, static_cast<std::size_t>(j)) =
            static_cast<double>((v >> j) & 1U);
  return x;
}

// Labels h(x) = argsort(m(x)) for every row of x.
inline RankingDataset label_with(const ScoreFunction& m, FeatureMatrix x) {
  std::vector<Ranking> labels;
  for (std::size_t r = 0; r < x.rows(); ++r) labels.push_back(m.ranking(x.row(r)));
  return RankingDataset(std::move(x), std::move(labels), m.num_labels());
}

inline double mse(const std::vector<double>& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace lrnp::testing
