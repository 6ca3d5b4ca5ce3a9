#include "lrnp/ovo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace lrnp {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_number(std::string_view token, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    throw ValidationError(std::string("invalid ") + what + " '" + std::string(token) + "'");
  return v;
}

int parse_sign(std::string_view t) {
  if (t == "+1" || t == "1") return +1;
  if (t == "-1") return -1;
  throw ValidationError("invalid sign '" + std::string(t) + "'");
}

}  // namespace

BinaryHypothesis BinaryHypothesis::constant(int sign) {
  if (sign != 1 && sign != -1) throw ValidationError("constant classifier must output +1 or -1");
  return {Kind::constant, -1, 0.0, sign};
}

BinaryHypothesis BinaryHypothesis::stump(int feature, double threshold, int polarity) {
  if (feature < 0) throw ValidationError("stump feature must be non-negative");
  if (polarity != 1 && polarity != -1) throw ValidationError("stump polarity must be +1 or -1");
  return {Kind::stump, feature, threshold, polarity};
}

std::string BinaryHypothesis::to_string() const {
  const std::string sign = polarity > 0 ? "+1" : "-1";
  if (kind == Kind::constant) return "constant " + sign;
  return "stump " + std::to_string(feature) + " " + format_double(threshold) + " " + sign;
}

BinaryHypothesis BinaryHypothesis::parse(std::string_view text) {
  std::istringstream ss{std::string(text)};
  std::vector<std::string> t;
  for (std::string tok; ss >> tok;) t.push_back(tok);
  if (t.size() == 2 && t[0] == "constant") return constant(parse_sign(t[1]));
  if (t.size() == 4 && t[0] == "stump")
    return stump(parse_number<int>(t[1], "feature"), parse_number<double>(t[2], "threshold"),
                 parse_sign(t[3]));
  throw ValidationError("invalid hypothesis '" + std::string(text) + "'");
}

std::size_t pair_index(int k, int i, int j) {
  if (!(0 <= i && i < j && j < k)) throw ValidationError("pair index needs 0 <= i < j < k");
  // Pairs (0,1..k-1), (1,2..k-1), ...
  const auto ii = static_cast<std::size_t>(i);
  return ii * static_cast<std::size_t>(k) - ii * (ii + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

std::vector<PairTask> decompose_pairwise(const RankingDataset& data) {
  const int k = data.num_labels();
  std::vector<PairTask> tasks;
  tasks.reserve(num_pairs(k));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) tasks.push_back({i, j, {}, {}});
  std::visit(
      [&](const auto& rows) {
        for (std::size_t r = 0; r < rows.size(); ++r)
          for (auto& t : tasks)
            if (auto s = pairwise_sign(rows[r], t.i, t.j)) {
              t.rows.push_back(r);
              t.labels.push_back(*s);
            }
      },
      data.labels());
  return tasks;
}

std::string to_string(HypothesisClass c) {
  return c == HypothesisClass::stump ? "stump" : "constant";
}

HypothesisClass parse_hypothesis_class(std::string_view text) {
  if (text == "stump") return HypothesisClass::stump;
  if (text == "constant") return HypothesisClass::constant;
  throw ValidationError("unknown hypothesis class '" + std::string(text) + "'");
}

ErmResult erm_stump(const FeatureMatrix& x, std::span<const std::size_t> rows,
                    std::span<const int> labels, HypothesisClass cls) {
  if (rows.size() != labels.size()) throw ValidationError("rows and labels differ in length");
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 1 && y != -1) throw ValidationError("binary labels must be +1 or -1");
    pos += y > 0;
  }
  const std::size_t neg = labels.size() - pos;
  ErmResult best{BinaryHypothesis::constant(+1), neg};
  if (pos < best.errors) best = {BinaryHypothesis::constant(-1), pos};
  if (cls == HypothesisClass::constant || rows.size() < 2) return best;

  std::vector<std::pair<double, int>> sorted(rows.size());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    for (std::size_t t = 0; t < rows.size(); ++t) sorted[t] = {x(rows[t], f), labels[t]};
    std::sort(sorted.begin(), sorted.end());
    std::size_t left_pos = 0, left_neg = 0;
    for (std::size_t t = 0; t + 1 < sorted.size(); ++t) {
      (sorted[t].second > 0 ? left_pos : left_neg) += 1;
      const double a = sorted[t].first, b = sorted[t + 1].first;
      if (a == b) continue;
      double thr = a + (b - a) / 2;
      if (thr >= b) thr = a;
      const std::size_t right_pos = pos - left_pos, right_neg = neg - left_neg;
      // Polarity -1 predicts -1 on the left, +1 on the right.
      const std::size_t err_minus = left_pos + right_neg;
      const std::size_t err_plus = left_neg + right_pos;
      if (err_minus < best.errors)
        best = {BinaryHypothesis::stump(static_cast<int>(f), thr, -1), err_minus};
      if (err_plus < best.errors)
        best = {BinaryHypothesis::stump(static_cast<int>(f), thr, +1), err_plus};
    }
  }
  return best;
}

std::size_t empirical_errors(const BinaryHypothesis& h, const FeatureMatrix& x,
                             std::span<const std::size_t> rows, std::span<const int> labels) {
  std::size_t e = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) e += h(x.row(rows[t])) != labels[t];
  return e;
}

PairwiseEnsemble::PairwiseEnsemble(int k, std::size_t dimension,
                                   std::vector<BinaryHypothesis> classifiers,
                                   std::vector<std::size_t> pair_sizes, std::uint64_t seed)
    : k_(k),
      dimension_(dimension),
      classifiers_(std::move(classifiers)),
      pair_sizes_(std::move(pair_sizes)),
      seed_(seed) {
  if (k_ < 2) throw ValidationError("a pairwise ensemble needs at least two labels");
  if (classifiers_.size() != num_pairs(k_) || pair_sizes_.size() != num_pairs(k_))
    throw ValidationError("a pairwise ensemble needs exactly C(k,2) classifiers");
  for (const auto& h : classifiers_)
    if (h.kind == BinaryHypothesis::Kind::stump &&
        static_cast<std::size_t>(h.feature) >= dimension_)
      throw ValidationError("stump feature outside the feature dimension");
}

const BinaryHypothesis& PairwiseEnsemble::classifier(int i, int j) const {
  return classifiers_[pair_index(k_, i, j)];
}

std::vector<double> PairwiseEnsemble::copeland_scores(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw ValidationError("feature vector has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(dimension_));
  std::vector<double> s(static_cast<std::size_t>(k_), 1.0);
  std::size_t p = 0;
  for (int i = 0; i < k_; ++i)
    for (int j = i + 1; j < k_; ++j, ++p)
      if (pair_sizes_[p] == 0) {
        // A pair never seen in training abstains and splits its loss.
        s[static_cast<std::size_t>(i)] += 0.5;
        s[static_cast<std::size_t>(j)] += 0.5;
      } else {
        // +1 means sigma(i) > sigma(j): j beats i.
        s[static_cast<std::size_t>(classifiers_[p](x) > 0 ? i : j)] += 1.0;
      }
  return s;
}

Ranking rank_by_score_random_ties(std::span<const double> scores, Rng& rng) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });
  return Ranking::from_order(order);
}

Ranking PairwiseEnsemble::predict(std::span<const double> x, Rng& rng) const {
  return rank_by_score_random_ties(copeland_scores(x), rng);
}

Ranking PairwiseEnsemble::predict(std::span<const double> x, std::uint64_t row) const {
  Rng rng(derive_seed(seed_, stream::tie_break, row));
  return predict(x, rng);
}

void PairwiseEnsemble::serialize(std::ostream& os) const {
  os << "ovo " << k_ << " dimension " << dimension_ << " seed " << seed_ << "\n";
  std::size_t p = 0;
  for (int i = 0; i < k_; ++i)
    for (int j = i + 1; j < k_; ++j, ++p)
      os << "pair " << i + 1 << ' ' << j + 1 << ' ' << pair_sizes_[p] << ' '
         << classifiers_[p].to_string() << "\n";
}

std::string PairwiseEnsemble::serialize() const {
  std::ostringstream os;
  serialize(os);
  return os.str();
}

PairwiseEnsemble PairwiseEnsemble::parse(std::istream& is) {
  std::string line;
  std::getline(is, line);
  std::istringstream head(line);
  std::string tag, dim_tag, seed_tag;
  int k = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  if (!(head >> tag >> k >> dim_tag >> d >> seed_tag >> seed) || tag != "ovo" ||
      dim_tag != "dimension" || seed_tag != "seed" || k < 2)
    throw ValidationError("pairwise model: malformed header '" + line + "'");
  std::vector<BinaryHypothesis> hs(num_pairs(k));
  std::vector<std::size_t> sizes(num_pairs(k));
  for (std::size_t p = 0; p < hs.size(); ++p) {
    if (!std::getline(is, line)) throw ValidationError("pairwise model: truncated pair list");
    std::istringstream ss(line);
    std::string pair_tag;
    int i = 0, j = 0;
    std::size_t n = 0;
    if (!(ss >> pair_tag >> i >> j >> n) || pair_tag != "pair" || i < 1 || j <= i || j > k)
      throw ValidationError("pairwise model: malformed pair line '" + line + "'");
    std::string rest;
    std::getline(ss, rest);
    const auto idx = pair_index(k, i - 1, j - 1);
    hs[idx] = BinaryHypothesis::parse(rest);
    sizes[idx] = n;
  }
  return PairwiseEnsemble(k, d, std::move(hs), std::move(sizes), seed);
}

PairwiseEnsemble fit_ovo(const RankingDataset& data, const OvoParams& params, std::uint64_t seed) {
  const auto tasks = decompose_pairwise(data);
  std::vector<BinaryHypothesis> hs(tasks.size());
  std::vector<std::size_t> sizes(tasks.size());
  parallel_for(tasks.size(), params.threads, [&](std::size_t p) {
    hs[p] = erm_stump(data.features(), tasks[p].rows, tasks[p].labels, params.hypothesis_class)
                .hypothesis;
    sizes[p] = tasks[p].rows.size();
  });
  return PairwiseEnsemble(data.num_labels(), data.dimension(), std::move(hs), std::move(sizes),
                          seed);
}

PairwiseProbabilityMatrix::PairwiseProbabilityMatrix(int k, std::span<const double> upper)
    : k_(k), p_(static_cast<std::size_t>(k * k), 0.5) {
  if (k < 2) throw ValidationError("need at least two labels");
  if (upper.size() != num_pairs(k))
    throw ValidationError("need C(k,2) upper-triangle probabilities");
  std::size_t t = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j, ++t) {
      const double v = upper[t];
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("probabilities must lie in [0,1]");
      p_[static_cast<std::size_t>(i * k + j)] = v;
      p_[static_cast<std::size_t>(j * k + i)] = 1.0 - v;
    }
}

PairwiseProbabilityMatrix PairwiseProbabilityMatrix::from_scores(std::span<const double> scores) {
  const int k = static_cast<int>(scores.size());
  std::vector<double> upper;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double a = scores[static_cast<std::size_t>(i)], b = scores[static_cast<std::size_t>(j)];
      upper.push_back(a > b ? 1.0 : a < b ? 0.0 : 0.5);
    }
  return PairwiseProbabilityMatrix(k, upper);
}

bool PairwiseProbabilityMatrix::is_sst() const {
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j)
      if (i != j && (*this)(i, j) == 0.5) return false;
  for (int i = 0; i < k_; ++i)
    for (int u = 0; u < k_; ++u)
      for (int j = 0; j < k_; ++j)
        if (i != u && u != j && i != j && (*this)(i, u) > 0.5 && (*this)(u, j) > 0.5 &&
            !((*this)(i, j) > 0.5))
          return false;
  return true;
}

std::vector<double> bayes_scores(const PairwiseProbabilityMatrix& p) {
  std::vector<double> s(static_cast<std::size_t>(p.k()), 1.0);
  for (int i = 0; i < p.k(); ++i)
    for (int j = 0; j < p.k(); ++j)
      if (i != j && p(i, j) < 0.5) s[static_cast<std::size_t>(i)] += 1.0;
  return s;
}

Ranking bayes_ranking(const PairwiseProbabilityMatrix& p) {
  return argsort_ascending(bayes_scores(p));
}

double expected_kendall_tau(const PairwiseProbabilityMatrix& p, const Ranking& sigma) {
  if (sigma.k() != p.k()) throw ValidationError("ranking and matrix disagree on k");
  double cost = 0.0;
  for (int i = 0; i < p.k(); ++i)
    for (int j = i + 1; j < p.k(); ++j)
      cost += sigma.position(i) < sigma.position(j) ? 1.0 - p(i, j) : p(i, j);
  return cost;
}

Ranking kemeny_median_bruteforce(const PairwiseProbabilityMatrix& p) {
  const int k = p.k();
  if (k > 8) throw ValidationError("brute-force Kemeny median supports k <= 8");
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<int> best;
  do {
    double cost = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b)
        cost += 1.0 - p(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
    if (cost < best_cost) {
      best_cost = cost;
      best = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return Ranking::from_order(best);
}

}  // namespace lrnp
