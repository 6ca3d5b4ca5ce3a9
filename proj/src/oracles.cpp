#include "lrnp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace lrnp {

std::vector<double> ScoreFunction::operator()(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(num_labels()));
  evaluate(x, out);
  return out;
}

Ranking ScoreFunction::ranking(std::span<const double> x) const {
  return argsort_descending((*this)(x));
}

namespace {

void check_dimension(const ScoreFunction& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.dimension())
    throw ValidationError("feature vector has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(m.dimension()));
}

std::vector<int> draw_without_replacement(Rng& rng, int d, int r) {
  std::vector<int> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < r; ++i) {
    std::uniform_int_distribution<int> pick(i, d - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(r));
  return pool;
}

}  // namespace

SparseScoreFunction SparseScoreFunction::make(int d, int k, int r, std::uint64_t seed,
                                              SupportMode mode) {
  if (k < 1) throw ValidationError("k must be positive");
  if (r < 1 || r > d) throw ValidationError("sparsity r must lie in [1, d]");
  if (r > 24) throw ValidationError("sparsity r above 24 would need a 2^r lookup table");
  Rng rng(derive_seed(seed, stream::target));
  std::vector<std::vector<int>> relevant;
  std::vector<std::vector<double>> tables;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<int> shared =
      mode == SupportMode::shared ? draw_without_replacement(rng, d, r) : std::vector<int>{};
  for (int j = 0; j < k; ++j) {
    relevant.push_back(mode == SupportMode::shared ? shared : draw_without_replacement(rng, d, r));
    std::vector<double> t(std::size_t{1} << r);
    for (auto& v : t) v = unit(rng);
    tables.push_back(std::move(t));
  }
  return SparseScoreFunction(d, std::move(relevant), std::move(tables));
}

SparseScoreFunction::SparseScoreFunction(int d, std::vector<std::vector<int>> relevant,
                                         std::vector<std::vector<double>> tables)
    : d_(d), relevant_(std::move(relevant)), tables_(std::move(tables)) {
  if (relevant_.empty() || relevant_.size() != tables_.size())
    throw ValidationError("need one relevant set and one table per label");
  r_ = static_cast<int>(relevant_.front().size());
  for (std::size_t j = 0; j < relevant_.size(); ++j) {
    const auto& rel = relevant_[j];
    if (static_cast<int>(rel.size()) != r_)
      throw ValidationError("every relevant set must have the same size");
    if (std::set<int>(rel.begin(), rel.end()).size() != rel.size())
      throw ValidationError("relevant set has repeated coordinates");
    for (int c : rel)
      if (c < 0 || c >= d_) throw ValidationError("relevant coordinate outside [0, d)");
    if (tables_[j].size() != (std::size_t{1} << r_))
      throw ValidationError("lookup table must have 2^r entries");
    for (double v : tables_[j])
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("table values must lie in [0,1]");
  }
}

void SparseScoreFunction::evaluate(std::span<const double> x, std::span<double> out) const {
  check_dimension(*this, x);
  for (std::size_t j = 0; j < relevant_.size(); ++j) {
    std::size_t idx = 0;
    const auto& rel = relevant_[j];
    for (std::size_t b = 0; b < rel.size(); ++b)
      if (x[static_cast<std::size_t>(rel[b])] > 0.5) idx |= std::size_t{1} << b;
    out[j] = tables_[j][idx];
  }
}

std::vector<int> SparseScoreFunction::relevant_union() const {
  std::set<int> all;
  for (const auto& rel : relevant_) all.insert(rel.begin(), rel.end());
  return {all.begin(), all.end()};
}

AffineScoreFunction::AffineScoreFunction(std::vector<double> intercepts,
                                         std::vector<std::vector<double>> weights)
    : intercepts_(std::move(intercepts)), weights_(std::move(weights)) {
  if (intercepts_.size() < 2 || intercepts_.size() != weights_.size())
    throw ValidationError("need one intercept and one weight vector per label");
  d_ = static_cast<int>(weights_.front().size());
  for (const auto& w : weights_)
    if (static_cast<int>(w.size()) != d_) throw ValidationError("ragged weight vectors");
}

void AffineScoreFunction::evaluate(std::span<const double> x, std::span<double> out) const {
  check_dimension(*this, x);
  for (std::size_t i = 0; i < intercepts_.size(); ++i) {
    double v = intercepts_[i];
    for (std::size_t f = 0; f < x.size(); ++f) v += weights_[i][f] * x[f];
    out[i] = std::clamp(v, 0.0, 1.0);
  }
}

void FeatureDistribution::sample(Rng& rng, std::span<double> x) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (kind) {
    case Kind::uniform_binary:
      for (auto& v : x) v = unit(rng) < 0.5 ? 0.0 : 1.0;
      break;
    case Kind::bernoulli:
      if (biases.size() != x.size())
        throw ValidationError("Bernoulli feature distribution needs one bias per coordinate");
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = unit(rng) < biases[j] ? 1.0 : 0.0;
      break;
    case Kind::uniform_real:
      for (auto& v : x) v = unit(rng);
      break;
  }
}

NoiseSpec NoiseSpec::gaussian(double stddev) {
  if (!(stddev > 0.0)) throw ValidationError("truncated Gaussian stddev must be positive");
  return {Kind::truncated_gaussian, stddev, 0.0};
}

NoiseSpec NoiseSpec::mallows(double theta) {
  if (!(theta >= 0.0)) throw ValidationError("Mallows theta must be non-negative");
  return {Kind::mallows, 0.0, theta};
}

std::string NoiseSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: return "none";
    case Kind::truncated_gaussian: os << "gaussian(" << stddev << ")"; break;
    case Kind::mallows: os << "mallows(" << theta << ")"; break;
  }
  return os.str();
}

SurvivalSpec SurvivalSpec::constant(std::vector<double> q) {
  SurvivalSpec s;
  s.q = std::move(q);
  s.validate(static_cast<int>(s.q.size()));
  return s;
}

void SurvivalSpec::validate(int k) const {
  auto check = [k](const std::vector<double>& p) {
    if (static_cast<int>(p.size()) != k)
      throw ValidationError("survival spec needs " + std::to_string(k) + " probabilities");
    for (double v : p)
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("survival probabilities must lie in [0,1]");
  };
  check(q);
  if (rule) check(rule->q_above);
}

std::span<const double> SurvivalSpec::probabilities(std::span<const double> x) const {
  if (rule && x[static_cast<std::size_t>(rule->feature)] > rule->threshold) return rule->q_above;
  return q;
}

double SurvivalSpec::deletion_tolerance() const {
  auto worst = [](const std::vector<double>& p) {
    double lo = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) lo = std::min(lo, p[i] * p[j]);
    return lo;
  };
  double phi = worst(q);
  if (rule) phi = std::min(phi, worst(rule->q_above));
  return phi;
}

std::vector<PositionInterval> PartitionSpec::sample(Rng& rng, int k) const {
  int blocks = 0;
  if (num_blocks) {
    blocks = *num_blocks;
    if (blocks < 1 || blocks > k)
      throw ValidationError("block count must lie in [1, " + std::to_string(k) + "]");
  } else {
    blocks = std::uniform_int_distribution<int>(1, k)(rng);
  }
  // Cut after position c, for c drawn without replacement from {1..k-1}.
  std::vector<int> cuts = draw_without_replacement(rng, k - 1, blocks - 1);
  for (auto& c : cuts) ++c;
  std::sort(cuts.begin(), cuts.end());
  std::vector<PositionInterval> out;
  int first = 1;
  for (int c : cuts) {
    out.push_back({first, c});
    first = c + 1;
  }
  out.push_back({first, k});
  return out;
}

double truncated_gaussian(Rng& rng, double stddev, double bound) {
  if (!(stddev > 0.0)) throw ValidationError("truncated Gaussian stddev must be positive");
  std::normal_distribution<double> normal(0.0, stddev);
  for (;;) {
    const double v = normal(rng);
    if (v >= -bound && v <= bound) return v;
  }
}

Ranking apply_mallows(const Ranking& center, double theta, Rng& rng) {
  if (!(theta >= 0.0)) throw ValidationError("Mallows theta must be non-negative");
  const auto reference = center.order();
  const std::size_t k = reference.size();
  std::vector<int> order;
  order.reserve(k);
  std::vector<double> weights(k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    // Inserting at slot j places the new label ahead of (i - j) labels that
    // precede it in the centre, creating exactly that many inversions.
    double total = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      weights[j] = std::exp(-theta * static_cast<double>(i - j));
      total += weights[j];
    }
    double u = unit(rng) * total;
    std::size_t slot = i;
    for (std::size_t j = 0; j <= i; ++j) {
      if (u < weights[j]) {
        slot = j;
        break;
      }
      u -= weights[j];
    }
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(slot), reference[i]);
  }
  return Ranking::from_order(order);
}

Ranking apply_mallows(const Ranking& center, double theta, std::uint64_t seed) {
  Rng rng(seed);
  return apply_mallows(center, theta, rng);
}

Ranking noisy_ranking(const ScoreFunction& m, std::span<const double> x, const NoiseSpec& noise,
                      Rng& noise_rng) {
  auto scores = m(x);
  switch (noise.kind) {
    case NoiseSpec::Kind::none: return argsort_descending(scores);
    case NoiseSpec::Kind::truncated_gaussian:
      for (auto& s : scores) s += truncated_gaussian(noise_rng, noise.stddev);
      return argsort_descending(scores);
    case NoiseSpec::Kind::mallows:
      return apply_mallows(argsort_descending(scores), noise.theta, noise_rng);
  }
  throw std::logic_error("unhandled noise kind");
}

namespace {

// Every row draws from three independent streams keyed by its index, so the
// feature draws are shared by all oracles that use the same seed.
struct RowStreams {
  Rng features;
  Rng noise;
  Rng mechanism;
  RowStreams(std::uint64_t seed, std::size_t row)
      : features(derive_seed(seed, stream::features, row)),
        noise(derive_seed(seed, stream::noise, row)),
        mechanism(derive_seed(seed, stream::mechanism, row)) {}
};

template <class Label, class MakeLabel>
RankingDataset sample_rows(const ScoreFunction& m, std::size_t n, std::uint64_t seed,
                           const FeatureDistribution& features, MakeLabel&& make_label,
                           const std::string& provenance) {
  const auto d = static_cast<std::size_t>(m.dimension());
  FeatureMatrix x(n, d);
  std::vector<Label> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RowStreams rs(seed, i);
    features.sample(rs.features, x.row(i));
    labels.push_back(make_label(std::span<const double>(x.row(i)), rs));
  }
  return RankingDataset(std::move(x), std::move(labels), m.num_labels(), provenance);
}

std::string provenance_of(const std::string& oracle, const NoiseSpec& noise, std::uint64_t seed) {
  return oracle + " noise=" + noise.describe() + " seed=" + std::to_string(seed);
}

}  // namespace

RankingDataset sample_complete(const ScoreFunction& m, const NoiseSpec& noise, std::size_t n,
                               std::uint64_t seed, const FeatureDistribution& features) {
  return sample_rows<Ranking>(
      m, n, seed, features,
      [&](std::span<const double> x, RowStreams& rs) {
        return noisy_ranking(m, x, noise, rs.noise);
      },
      provenance_of("complete", noise, seed));
}

RankingDataset sample_incomplete(const ScoreFunction& m, const NoiseSpec& noise,
                                 const SurvivalSpec& survival, std::size_t n, std::uint64_t seed,
                                 const FeatureDistribution& features) {
  survival.validate(m.num_labels());
  return sample_rows<IncompleteRanking>(
      m, n, seed, features,
      [&](std::span<const double> x, RowStreams& rs) {
        // Erasing labels from argsort(m + xi) equals argsort of the score
        // vector with erased entries ignored.
        const Ranking full = noisy_ranking(m, x, noise, rs.noise);
        const auto q = survival.probabilities(x);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<char> alive(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) alive[i] = unit(rs.mechanism) < q[i];
        std::vector<int> kept;
        for (int label : full.order())
          if (alive[static_cast<std::size_t>(label)]) kept.push_back(label);
        return IncompleteRanking::from_order(m.num_labels(), std::move(kept));
      },
      provenance_of("incomplete", noise, seed));
}

RankingDataset sample_partial(const ScoreFunction& m, const NoiseSpec& noise,
                              const PartitionSpec& partitions, std::size_t n, std::uint64_t seed,
                              const FeatureDistribution& features) {
  return sample_rows<PartialRanking>(
      m, n, seed, features,
      [&](std::span<const double> x, RowStreams& rs) {
        const Ranking full = noisy_ranking(m, x, noise, rs.noise);
        const auto cuts = partitions.sample(rs.mechanism, m.num_labels());
        return partial_rank(full, cuts);
      },
      provenance_of("partial", noise, seed));
}

PairedSample sample_paired(const ScoreFunction& m, const NoiseSpec& noise, std::size_t n,
                           std::uint64_t seed, const FeatureDistribution& features) {
  return {sample_complete(m, NoiseSpec::none(), n, seed, features),
          sample_complete(m, noise, n, seed, features)};
}

namespace {

void require_paired(const RankingDataset& a, const RankingDataset& b) {
  if (a.size() != b.size())
    throw ValidationError("paired datasets differ in length: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  if (a.size() == 0) throw ValidationError("paired datasets are empty");
}

}  // namespace

double alpha_inconsistency(const RankingDataset& noiseless, const RankingDataset& noisy) {
  require_paired(noiseless, noisy);
  const auto& h = noiseless.complete();
  const auto& s = noisy.complete();
  std::size_t differ = 0;
  for (std::size_t i = 0; i < h.size(); ++i) differ += h[i] != s[i];
  return static_cast<double>(differ) / static_cast<double>(h.size());
}

double beta_kt_gap(const RankingDataset& noiseless, const RankingDataset& noisy) {
  require_paired(noiseless, noisy);
  const auto& h = noiseless.complete();
  const auto& s = noisy.complete();
  double total = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) total += kt_coefficient(h[i], s[i]);
  return total / static_cast<double>(h.size());
}

bool sparsity_certificate(const SparseScoreFunction& m, std::span<const double> x) {
  std::vector<double> probe(x.begin(), x.end());
  const Ranking base = m.ranking(probe);
  const auto relevant = m.relevant_union();
  for (int c = 0; c < m.dimension(); ++c) {
    if (std::binary_search(relevant.begin(), relevant.end(), c)) continue;
    auto& v = probe[static_cast<std::size_t>(c)];
    v = 1.0 - v;
    const bool same = m.ranking(probe) == base;
    v = 1.0 - v;
    if (!same) return false;
  }
  return true;
}

double min_pair_observation_frequency(const RankingDataset& data) {
  if (data.size() == 0) throw ValidationError("empty dataset");
  const int k = data.num_labels();
  std::vector<std::size_t> counts(static_cast<std::size_t>(k * k), 0);
  std::visit(
      [&](const auto& rows) {
        for (const auto& r : rows)
          for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
              if (pairwise_sign(r, i, j)) ++counts[static_cast<std::size_t>(i * k + j)];
      },
      data.labels());
  std::size_t lo = data.size();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) lo = std::min(lo, counts[static_cast<std::size_t>(i * k + j)]);
  return static_cast<double>(lo) / static_cast<double>(data.size());
}

}  // namespace lrnp
