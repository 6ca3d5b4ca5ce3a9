#include "lrnp/ranking.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <sstream>

#include "lrnp/common.hpp"

namespace lrnp {

namespace {

void require_same_k(const Ranking& a, const Ranking& b) {
  if (a.k() != b.k())
    throw ValidationError("ranking size mismatch: " + std::to_string(a.k()) + " vs " +
                          std::to_string(b.k()));
}

void check_label(int label, int k) {
  if (label < 0 || label >= k)
    throw ValidationError("label " + std::to_string(label + 1) + " outside [1, " +
                          std::to_string(k) + "]");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError("expected an integer, got '" + std::string(s) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

Ranking Ranking::from_positions(std::vector<int> positions) {
  const int k = static_cast<int>(positions.size());
  if (k < 2) throw ValidationError("a ranking needs at least 2 labels");
  std::vector<char> seen(positions.size(), 0);
  for (int p : positions) {
    if (p < 1 || p > k)
      throw ValidationError("position " + std::to_string(p) + " outside [1, " + std::to_string(k) +
                            "]");
    if (seen[static_cast<std::size_t>(p - 1)]++)
      throw ValidationError("duplicate position " + std::to_string(p));
  }
  return Ranking(std::move(positions));
}

Ranking Ranking::from_order(std::span<const int> best_first) {
  const int k = static_cast<int>(best_first.size());
  std::vector<int> positions(best_first.size(), 0);
  for (int pos = 0; pos < k; ++pos) {
    const int label = best_first[static_cast<std::size_t>(pos)];
    check_label(label, k);
    if (positions[static_cast<std::size_t>(label)] != 0)
      throw ValidationError("label " + std::to_string(label + 1) + " listed twice");
    positions[static_cast<std::size_t>(label)] = pos + 1;
  }
  return from_positions(std::move(positions));
}

Ranking Ranking::identity(int k) {
  std::vector<int> positions(static_cast<std::size_t>(std::max(k, 0)));
  std::iota(positions.begin(), positions.end(), 1);
  return from_positions(std::move(positions));
}

std::vector<int> Ranking::order() const {
  std::vector<int> out(positions_.size());
  for (std::size_t i = 0; i < positions_.size(); ++i)
    out[static_cast<std::size_t>(positions_[i] - 1)] = static_cast<int>(i);
  return out;
}

IncompleteRanking IncompleteRanking::from_order(int k, std::vector<int> best_first) {
  if (k < 2) throw ValidationError("a ranking needs at least 2 labels");
  IncompleteRanking r;
  r.k_ = k;
  r.rank_.assign(static_cast<std::size_t>(k), -1);
  for (std::size_t idx = 0; idx < best_first.size(); ++idx) {
    const int label = best_first[idx];
    check_label(label, k);
    if (r.rank_[static_cast<std::size_t>(label)] >= 0)
      throw ValidationError("label " + std::to_string(label + 1) + " listed twice");
    r.rank_[static_cast<std::size_t>(label)] = static_cast<int>(idx);
  }
  r.observed_ = std::move(best_first);
  return r;
}

IncompleteRanking IncompleteRanking::from_ranking(const Ranking& r) {
  return from_order(r.k(), r.order());
}

Ranking IncompleteRanking::to_ranking() const {
  if (!is_complete()) throw ValidationError("incomplete ranking has erased labels");
  return Ranking::from_order(observed_);
}

PartialRanking PartialRanking::from_blocks(int k, std::vector<std::vector<int>> blocks) {
  if (k < 2) throw ValidationError("a ranking needs at least 2 labels");
  PartialRanking r;
  r.block_of_.assign(static_cast<std::size_t>(k), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw ValidationError("partial ranking has an empty block");
    for (int label : blocks[b]) {
      check_label(label, k);
      if (r.block_of_[static_cast<std::size_t>(label)] >= 0)
        throw ValidationError("label " + std::to_string(label + 1) + " appears in two blocks");
      r.block_of_[static_cast<std::size_t>(label)] = static_cast<int>(b);
    }
  }
  for (int label = 0; label < k; ++label)
    if (r.block_of_[static_cast<std::size_t>(label)] < 0)
      throw ValidationError("label " + std::to_string(label + 1) + " missing from partial ranking");
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  r.blocks_ = std::move(blocks);
  return r;
}

PartialRanking PartialRanking::from_ranking(const Ranking& r) {
  std::vector<std::vector<int>> blocks;
  for (int label : r.order()) blocks.push_back({label});
  return from_blocks(r.k(), std::move(blocks));
}

Ranking PartialRanking::to_ranking() const {
  std::vector<int> order;
  for (const auto& b : blocks_) {
    if (b.size() != 1) throw ValidationError("partial ranking contains ties");
    order.push_back(b.front());
  }
  return Ranking::from_order(order);
}

std::size_t kendall_tau(const Ranking& a, const Ranking& b) {
  require_same_k(a, b);
  const int k = a.k();
  std::size_t discordant = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if ((a.position(i) - a.position(j)) * (b.position(i) - b.position(j)) < 0) ++discordant;
  return discordant;
}

double kt_coefficient(const Ranking& a, const Ranking& b) {
  const std::size_t d = kendall_tau(a, b);
  return 1.0 - 2.0 * static_cast<double>(d) / static_cast<double>(num_pairs(a.k()));
}

long long spearman(const Ranking& a, const Ranking& b) {
  require_same_k(a, b);
  long long total = 0;
  for (int i = 0; i < a.k(); ++i) {
    const long long diff = a.position(i) - b.position(i);
    total += diff * diff;
  }
  return total;
}

namespace {

template <class Truth>
std::optional<double> restricted_kt(const Ranking& predicted, const Truth& truth) {
  if (predicted.k() != truth.k())
    throw ValidationError("ranking size mismatch: " + std::to_string(predicted.k()) + " vs " +
                          std::to_string(truth.k()));
  std::size_t pairs = 0;
  std::size_t discordant = 0;
  for (int i = 0; i < truth.k(); ++i) {
    for (int j = i + 1; j < truth.k(); ++j) {
      const auto s = pairwise_sign(truth, i, j);
      if (!s) continue;
      ++pairs;
      const int p = predicted.position(i) < predicted.position(j) ? -1 : 1;
      if (p != *s) ++discordant;
    }
  }
  if (pairs == 0) return std::nullopt;
  return 1.0 - 2.0 * static_cast<double>(discordant) / static_cast<double>(pairs);
}

}  // namespace

std::optional<double> kt_coefficient_observed(const Ranking& predicted,
                                              const IncompleteRanking& truth) {
  return restricted_kt(predicted, truth);
}

std::optional<double> kt_coefficient_observed(const Ranking& predicted,
                                              const PartialRanking& truth) {
  return restricted_kt(predicted, truth);
}

IncompleteRanking argsort(std::span<const std::optional<double>> scores) {
  std::vector<int> kept;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i]) kept.push_back(static_cast<int>(i));
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
    return *scores[static_cast<std::size_t>(a)] > *scores[static_cast<std::size_t>(b)];
  });
  return IncompleteRanking::from_order(static_cast<int>(scores.size()), std::move(kept));
}

Ranking argsort_descending(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return Ranking::from_order(order);
}

Ranking argsort_ascending(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
  });
  return Ranking::from_order(order);
}

std::vector<double> canonical_repr(const Ranking& sigma) {
  std::vector<double> out(static_cast<std::size_t>(sigma.k()));
  const double k = sigma.k();
  for (int i = 0; i < sigma.k(); ++i) out[static_cast<std::size_t>(i)] = sigma.position(i) / k;
  return out;
}

void validate_partition(int k, std::span<const PositionInterval> partition) {
  if (partition.empty()) throw ValidationError("partition has no intervals");
  int expected = 1;
  for (const auto& iv : partition) {
    if (iv.first != expected || iv.last < iv.first)
      throw ValidationError("partition intervals must be contiguous and increasing from 1");
    expected = iv.last + 1;
  }
  if (expected != k + 1)
    throw ValidationError("partition must end at position " + std::to_string(k));
}

PartialRanking partial_rank(const Ranking& sigma, std::span<const PositionInterval> partition) {
  validate_partition(sigma.k(), partition);
  const auto order = sigma.order();
  std::vector<std::vector<int>> blocks;
  blocks.reserve(partition.size());
  for (const auto& iv : partition) {
    std::vector<int> block;
    for (int pos = iv.first; pos <= iv.last; ++pos)
      block.push_back(order[static_cast<std::size_t>(pos - 1)]);
    blocks.push_back(std::move(block));
  }
  return PartialRanking::from_blocks(sigma.k(), std::move(blocks));
}

std::optional<int> pairwise_sign(const Ranking& sigma, int i, int j) {
  return sigma.position(i) < sigma.position(j) ? -1 : 1;
}

std::optional<int> pairwise_sign(const IncompleteRanking& sigma, int i, int j) {
  const int ri = sigma.rank_of(i);
  const int rj = sigma.rank_of(j);
  if (ri < 0 || rj < 0) return std::nullopt;
  return ri < rj ? -1 : 1;
}

std::optional<int> pairwise_sign(const PartialRanking& sigma, int i, int j) {
  const int bi = sigma.block_of(i);
  const int bj = sigma.block_of(j);
  if (bi == bj) return std::nullopt;
  return bi < bj ? -1 : 1;
}

std::string to_string(const Ranking& r) {
  std::ostringstream os;
  for (int i = 0; i < r.k(); ++i) os << (i ? " " : "") << r.position(i);
  return os.str();
}

std::string to_string(const IncompleteRanking& r) {
  std::ostringstream os;
  os << '>';
  for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << r.observed()[i] + 1;
  return os.str();
}

std::string to_string(const PartialRanking& r) {
  std::ostringstream os;
  for (std::size_t b = 0; b < r.num_blocks(); ++b) {
    os << (b ? ">{" : "{");
    for (std::size_t i = 0; i < r.blocks()[b].size(); ++i)
      os << (i ? "," : "") << r.blocks()[b][i] + 1;
    os << '}';
  }
  return os.str();
}

Ranking parse_ranking(std::string_view text) {
  std::vector<int> positions;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) positions.push_back(parse_int(tok));
  return Ranking::from_positions(std::move(positions));
}

IncompleteRanking parse_incomplete(std::string_view text, int k) {
  text = trim(text);
  if (text.empty() || text.front() != '>')
    throw ValidationError("incomplete ranking must start with '>'");
  text.remove_prefix(1);
  std::vector<int> labels;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) labels.push_back(parse_int(tok) - 1);
  return IncompleteRanking::from_order(k, std::move(labels));
}

PartialRanking parse_partial(std::string_view text, int k) {
  std::vector<std::vector<int>> blocks;
  for (auto part : split(trim(text), '>')) {
    part = trim(part);
    if (part.size() < 2 || part.front() != '{' || part.back() != '}')
      throw ValidationError("malformed partial ranking block '" + std::string(part) + "'");
    part = part.substr(1, part.size() - 2);
    std::vector<int> block;
    for (auto tok : split(part, ',')) block.push_back(parse_int(tok) - 1);
    blocks.push_back(std::move(block));
  }
  return PartialRanking::from_blocks(k, std::move(blocks));
}

}  // namespace lrnp
