#include "lrnp/cart.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lrnp/common.hpp"

namespace lrnp {

ScalarDataset::ScalarDataset(FeatureMatrix features, std::vector<double> targets)
    : features_(std::move(features)), targets_(std::move(targets)) {
  if (targets_.size() != features_.rows())
    throw ValidationError("target count " + std::to_string(targets_.size()) +
                          " does not match feature rows " + std::to_string(features_.rows()));
  for (std::size_t i = 0; i < targets_.size(); ++i)
    if (!(targets_[i] >= 0.0 && targets_[i] <= 1.0))
      throw ValidationError("target " + std::to_string(i) + " lies outside [0,1]");
}

std::string to_string(SplitCriterion c) {
  return c == SplitCriterion::level_splits ? "level-splits" : "breiman";
}

SplitCriterion parse_split_criterion(std::string_view text) {
  if (text == "level-splits") return SplitCriterion::level_splits;
  if (text == "breiman") return SplitCriterion::breiman;
  throw ValidationError("unknown split criterion '" + std::string(text) + "'");
}

void TreeParams::validate() const {
  if (max_levels < unlimited) throw ValidationError("max_levels must be >= 0 or unlimited");
  if (max_depth < unlimited) throw ValidationError("max_depth must be >= 0 or unlimited");
  if (max_nodes != unlimited && max_nodes < 1) throw ValidationError("max_nodes must be >= 1");
  if (max_leaf_samples < 1) throw ValidationError("max_leaf_samples must be >= 1");
}

TreeModel::TreeModel(SplitCriterion criterion, bool honest, std::size_t dimension,
                     std::vector<TreeNode> nodes, std::vector<int> split_set)
    : criterion_(criterion),
      honest_(honest),
      dimension_(dimension),
      nodes_(std::move(nodes)),
      split_set_(std::move(split_set)) {
  if (nodes_.empty()) throw ValidationError("a tree needs at least one node");
  const int count = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      if (n.right >= 0) throw ValidationError("node " + std::to_string(i) + " has one child");
      continue;
    }
    if (n.left <= i || n.right <= i || n.left >= count || n.right >= count)
      throw ValidationError("node " + std::to_string(i) + " has invalid children");
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= dimension_)
      throw ValidationError("node " + std::to_string(i) + " splits on an unknown feature");
  }
}

std::size_t TreeModel::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

int TreeModel::leaf_of(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw ValidationError("feature vector has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(dimension_));
  int at = 0;
  while (!nodes_[static_cast<std::size_t>(at)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return at;
}

double TreeModel::predict(std::span<const double> x) const {
  return nodes_[static_cast<std::size_t>(leaf_of(x))].value;
}

std::vector<double> TreeModel::predict(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_number(const std::string& token, const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
    throw ValidationError(std::string("invalid ") + what + " '" + token + "' in tree model");
  return v;
}

std::string expect_line(std::istream& is, const std::string& key) {
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) break;
  if (line.rfind(key, 0) != 0)
    throw ValidationError("tree model: expected '" + key + "', got '" + line + "'");
  const auto rest = line.substr(key.size());
  const auto b = rest.find_first_not_of(' ');
  return b == std::string::npos ? std::string() : rest.substr(b);
}

}  // namespace

void TreeModel::serialize(std::ostream& os) const {
  os << "tree " << to_string(criterion_) << "\n";
  os << "honest " << (honest_ ? 1 : 0) << "\n";
  os << "dimension " << dimension_ << "\n";
  os << "split_set";
  for (int s : split_set_) os << ' ' << s;
  os << "\n";
  os << "nodes " << nodes_.size() << "\n";
  for (const auto& n : nodes_) {
    os << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
       << format_double(n.value) << ' ' << n.partition_count << ' ' << n.estimation_count << ' '
       << n.depth << ' ' << n.level << "\n";
  }
}

std::string TreeModel::serialize() const {
  std::ostringstream os;
  serialize(os);
  return os.str();
}

TreeModel TreeModel::parse(std::istream& is) {
  const auto criterion = parse_split_criterion(expect_line(is, "tree"));
  const bool honest = parse_number<int>(expect_line(is, "honest"), "honest flag") != 0;
  const auto dim = parse_number<std::size_t>(expect_line(is, "dimension"), "dimension");
  std::vector<int> split_set;
  {
    std::istringstream ss(expect_line(is, "split_set"));
    std::string tok;
    while (ss >> tok) split_set.push_back(parse_number<int>(tok, "split coordinate"));
  }
  const auto count = parse_number<std::size_t>(expect_line(is, "nodes"), "node count");
  std::vector<TreeNode> nodes(count);
  for (auto& n : nodes) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("tree model: truncated node list");
    std::istringstream ss(line);
    std::vector<std::string> t;
    for (std::string tok; ss >> tok;) t.push_back(tok);
    if (t.size() != 9) throw ValidationError("tree model: malformed node line '" + line + "'");
    n.feature = parse_number<int>(t[0], "feature");
    n.threshold = parse_number<double>(t[1], "threshold");
    n.left = parse_number<int>(t[2], "child");
    n.right = parse_number<int>(t[3], "child");
    n.value = parse_number<double>(t[4], "value");
    n.partition_count = parse_number<std::size_t>(t[5], "count");
    n.estimation_count = parse_number<std::size_t>(t[6], "count");
    n.depth = parse_number<int>(t[7], "depth");
    n.level = parse_number<int>(t[8], "level");
  }
  return TreeModel(criterion, honest, dim, std::move(nodes), std::move(split_set));
}

double level_split_score(const ScalarDataset& data, std::span<const int> split_set, int feature) {
  const auto& x = data.features();
  if (data.size() == 0) throw ValidationError("empty dataset");
  if (feature < 0 || static_cast<std::size_t>(feature) >= x.cols())
    throw ValidationError("feature index out of range");
  std::vector<int> coords(split_set.begin(), split_set.end());
  coords.push_back(feature);
  for (int c : coords)
    if (!x.is_binary_column(static_cast<std::size_t>(c)))
      throw ValidationError("Level-Splits requires binary features; column " + std::to_string(c) +
                            " is not binary");
  std::map<std::vector<bool>, std::pair<double, std::size_t>> cells;
  std::vector<bool> key(coords.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t b = 0; b < coords.size(); ++b)
      key[b] = x(r, static_cast<std::size_t>(coords[b])) > 0.5;
    auto& [sum, count] = cells[key];
    sum += data.targets()[r];
    ++count;
  }
  double v = 0.0;
  for (const auto& [k, sc] : cells) v += sc.first * sc.first / static_cast<double>(sc.second);
  return v / static_cast<double>(data.size());
}

std::optional<double> breiman_local_score(const ScalarDataset& data,
                                          std::span<const std::size_t> cell, int feature,
                                          double threshold) {
  if (cell.empty()) throw ValidationError("empty cell");
  double s0 = 0.0, s1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
  for (auto r : cell) {
    const double y = data.targets()[r];
    if (data.features()(r, static_cast<std::size_t>(feature)) <= threshold) {
      s0 += y;
      ++n0;
    } else {
      s1 += y;
      ++n1;
    }
  }
  if (n0 == 0 || n1 == 0) return std::nullopt;
  const double n = static_cast<double>(cell.size());
  return (s0 * s0 / static_cast<double>(n0) + s1 * s1 / static_cast<double>(n1)) / n;
}

namespace {

constexpr double kTieTolerance = 1e-12;

bool improves(double candidate, double best) {
  return candidate > best + kTieTolerance * std::max(1.0, std::abs(best));
}

struct Halves {
  std::vector<std::size_t> partition;
  std::vector<std::size_t> estimation;
};

Halves split_rows(std::span<const std::size_t> rows, bool honest, std::uint64_t seed) {
  Halves h;
  h.partition.assign(rows.begin(), rows.end());
  if (!honest) {
    h.estimation = h.partition;
    return h;
  }
  Rng rng(derive_seed(seed, stream::honesty));
  std::shuffle(h.partition.begin(), h.partition.end(), rng);
  const std::size_t half = (h.partition.size() + 1) / 2;
  h.estimation.assign(h.partition.begin() + static_cast<std::ptrdiff_t>(half), h.partition.end());
  h.partition.resize(half);
  return h;
}

// Fills estimation counts and leaf values by routing the estimation rows.
// Children always follow their parent in node order, so one forward pass
// resolves the ancestor fallback.
void fill_values(std::vector<TreeNode>& nodes, const ScalarDataset& data,
                 std::span<const std::size_t> estimation, double root_fallback) {
  std::vector<double> sums(nodes.size(), 0.0);
  for (auto& n : nodes) n.estimation_count = 0;
  for (auto r : estimation) {
    const auto x = data.features().row(r);
    int at = 0;
    for (;;) {
      auto& n = nodes[static_cast<std::size_t>(at)];
      ++n.estimation_count;
      sums[static_cast<std::size_t>(at)] += data.targets()[r];
      if (n.is_leaf()) break;
      at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
  }
  std::vector<double> inherited(nodes.size(), root_fallback);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    n.value =
        n.estimation_count > 0 ? sums[i] / static_cast<double>(n.estimation_count) : inherited[i];
    if (!n.is_leaf()) {
      inherited[static_cast<std::size_t>(n.left)] = n.value;
      inherited[static_cast<std::size_t>(n.right)] = n.value;
    }
  }
}

double mean_of(const ScalarDataset& data, std::span<const std::size_t> rows) {
  double s = 0.0;
  for (auto r : rows) s += data.targets()[r];
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

TreeModel grow_level_splits(const ScalarDataset& data, const Halves& halves,
                            const TreeParams& params) {
  const auto& x = data.features();
  const std::size_t d = x.cols();
  for (std::size_t c = 0; c < d; ++c)
    if (!x.is_binary_column(c))
      throw ValidationError("Level-Splits requires binary features; column " + std::to_string(c) +
                            " is not binary");
  const auto& part = halves.partition;
  const auto limit = static_cast<std::size_t>(params.max_leaf_samples);

  std::vector<TreeNode> nodes(1);
  nodes[0].partition_count = part.size();
  std::vector<int> leaf_of_row(part.size(), 0);
  std::vector<int> leaves{0};
  std::vector<char> used(d, 0);
  std::vector<int> split_set;

  std::vector<int> slot(1, 0);
  std::vector<double> sum0, sum1, total;
  std::vector<std::size_t> cnt0, cnt1, cnt;
  for (;;) {
    const int level = static_cast<int>(split_set.size());
    if (params.max_levels != unlimited && level >= params.max_levels) break;
    if (split_set.size() == d) break;
    bool any_large = false;
    for (int l : leaves) any_large |= nodes[static_cast<std::size_t>(l)].partition_count > limit;
    if (!any_large) break;

    const std::size_t m = leaves.size();
    slot.assign(nodes.size(), -1);
    for (std::size_t s = 0; s < m; ++s)
      slot[static_cast<std::size_t>(leaves[s])] = static_cast<int>(s);
    total.assign(m, 0.0);
    cnt.assign(m, 0);
    for (std::size_t t = 0; t < part.size(); ++t) {
      const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(leaf_of_row[t])]);
      total[s] += data.targets()[part[t]];
      ++cnt[s];
    }

    int best_feature = -1;
    double best = -1.0;
    for (std::size_t f = 0; f < d; ++f) {
      if (used[f]) continue;
      sum1.assign(m, 0.0);
      cnt1.assign(m, 0);
      for (std::size_t t = 0; t < part.size(); ++t) {
        if (x(part[t], f) <= 0.5) continue;
        const auto s = static_cast<std::size_t>(slot[static_cast<std::size_t>(leaf_of_row[t])]);
        sum1[s] += data.targets()[part[t]];
        ++cnt1[s];
      }
      double v = 0.0;
      for (std::size_t s = 0; s < m; ++s) {
        const std::size_t n1 = cnt1[s], n0 = cnt[s] - n1;
        if (cnt[s] > limit && n0 > 0 && n1 > 0) {
          const double s0 = total[s] - sum1[s];
          v += s0 * s0 / static_cast<double>(n0) + sum1[s] * sum1[s] / static_cast<double>(n1);
        } else if (cnt[s] > 0) {
          v += total[s] * total[s] / static_cast<double>(cnt[s]);
        }
      }
      v /= static_cast<double>(part.size());
      if (best_feature < 0 || improves(v, best)) {
        best = v;
        best_feature = static_cast<int>(f);
      }
    }

    const auto f = static_cast<std::size_t>(best_feature);
    used[f] = 1;
    split_set.push_back(best_feature);
    sum0.assign(m, 0.0);
    cnt0.assign(m, 0);
    for (std::size_t t = 0; t < part.size(); ++t)
      if (x(part[t], f) <= 0.5)
        ++cnt0[static_cast<std::size_t>(slot[static_cast<std::size_t>(leaf_of_row[t])])];

    std::vector<int> next_leaves;
    for (std::size_t s = 0; s < m; ++s) {
      const int id = leaves[s];
      const std::size_t n0 = cnt0[s], n1 = cnt[s] - n0;
      if (cnt[s] <= limit || n0 == 0 || n1 == 0) {
        next_leaves.push_back(id);
        continue;
      }
      const int left = static_cast<int>(nodes.size());
      const int depth = nodes[static_cast<std::size_t>(id)].depth + 1;
      TreeNode l, r;
      l.depth = r.depth = depth;
      l.partition_count = n0;
      r.partition_count = n1;
      nodes.push_back(l);
      nodes.push_back(r);
      auto& parent = nodes[static_cast<std::size_t>(id)];
      parent.feature = best_feature;
      parent.threshold = 0.5;
      parent.left = left;
      parent.right = left + 1;
      parent.level = level;
      next_leaves.push_back(left);
      next_leaves.push_back(left + 1);
    }
    for (std::size_t t = 0; t < part.size(); ++t) {
      const auto& n = nodes[static_cast<std::size_t>(leaf_of_row[t])];
      if (!n.is_leaf()) leaf_of_row[t] = x(part[t], f) <= 0.5 ? n.left : n.right;
    }
    std::sort(next_leaves.begin(), next_leaves.end());
    leaves = std::move(next_leaves);
  }
  fill_values(nodes, data, halves.estimation, mean_of(data, part));
  return TreeModel(SplitCriterion::level_splits, params.honest, d, std::move(nodes),
                   std::move(split_set));
}

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

std::optional<Candidate> best_breiman_split(const ScalarDataset& data,
                                            std::span<const std::size_t> cell,
                                            const std::vector<char>& binary) {
  const auto& x = data.features();
  const auto y = data.targets();
  const double n = static_cast<double>(cell.size());
  double total = 0.0;
  for (auto r : cell) total += y[r];
  std::optional<Candidate> best;
  auto offer = [&](int f, double thr, double s0, std::size_t n0) {
    const std::size_t n1 = cell.size() - n0;
    const double s1 = total - s0;
    const double score =
        (s0 * s0 / static_cast<double>(n0) + s1 * s1 / static_cast<double>(n1)) / n;
    if (!best || improves(score, best->score)) best = Candidate{f, thr, score};
  };
  std::vector<std::pair<double, double>> sorted;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    if (binary[f]) {
      double s0 = 0.0;
      std::size_t n0 = 0;
      for (auto r : cell)
        if (x(r, f) <= 0.5) {
          s0 += y[r];
          ++n0;
        }
      if (n0 > 0 && n0 < cell.size()) offer(static_cast<int>(f), 0.5, s0, n0);
      continue;
    }
    sorted.clear();
    for (auto r : cell) sorted.emplace_back(x(r, f), y[r]);
    std::sort(sorted.begin(), sorted.end());
    double s0 = 0.0;
    for (std::size_t t = 0; t + 1 < sorted.size(); ++t) {
      s0 += sorted[t].second;
      const double a = sorted[t].first, b = sorted[t + 1].first;
      if (a == b) continue;
      double thr = a + (b - a) / 2;
      if (thr >= b) thr = a;
      offer(static_cast<int>(f), thr, s0, t + 1);
    }
  }
  return best;
}

TreeModel grow_breiman(const ScalarDataset& data, const Halves& halves, const TreeParams& params) {
  const auto& x = data.features();
  std::vector<char> binary(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) binary[f] = x.is_binary_column(f);
  const auto limit = static_cast<std::size_t>(params.max_leaf_samples);

  std::vector<TreeNode> nodes(1);
  nodes[0].partition_count = halves.partition.size();
  std::deque<std::pair<int, std::vector<std::size_t>>> queue;
  queue.emplace_back(0, halves.partition);
  while (!queue.empty()) {
    auto [id, cell] = std::move(queue.front());
    queue.pop_front();
    const int depth = nodes[static_cast<std::size_t>(id)].depth;
    if (cell.size() <= limit) continue;
    if (params.max_depth != unlimited && depth >= params.max_depth) continue;
    if (params.max_nodes != unlimited &&
        nodes.size() + 2 > static_cast<std::size_t>(params.max_nodes))
      continue;
    const auto split = best_breiman_split(data, cell, binary);
    if (!split) continue;
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : cell)
      (x(r, static_cast<std::size_t>(split->feature)) <= split->threshold ? left_rows : right_rows)
          .push_back(r);
    const int left = static_cast<int>(nodes.size());
    TreeNode l, r;
    l.depth = r.depth = depth + 1;
    l.partition_count = left_rows.size();
    r.partition_count = right_rows.size();
    nodes.push_back(l);
    nodes.push_back(r);
    auto& parent = nodes[static_cast<std::size_t>(id)];
    parent.feature = split->feature;
    parent.threshold = split->threshold;
    parent.left = left;
    parent.right = left + 1;
    queue.emplace_back(left, std::move(left_rows));
    queue.emplace_back(left + 1, std::move(right_rows));
  }
  fill_values(nodes, data, halves.estimation, mean_of(data, halves.partition));
  return TreeModel(SplitCriterion::breiman, params.honest, x.cols(), std::move(nodes), {});
}

}  // namespace

TreeModel fit_tree(const ScalarDataset& data, std::span<const std::size_t> rows,
                   const TreeParams& params, std::uint64_t seed) {
  params.validate();
  if (rows.empty()) throw ValidationError("cannot fit a tree on an empty dataset");
  for (auto r : rows)
    if (r >= data.size()) throw ValidationError("row index out of range");
  const Halves halves = split_rows(rows, params.honest, seed);
  return params.criterion == SplitCriterion::level_splits ? grow_level_splits(data, halves, params)
                                                          : grow_breiman(data, halves, params);
}

TreeModel fit_tree(const ScalarDataset& data, const TreeParams& params, std::uint64_t seed) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(data, rows, params, seed);
}

TreeModel fit_level_splits(const ScalarDataset& data, int max_levels, bool honest,
                           std::uint64_t seed) {
  TreeParams p;
  p.criterion = SplitCriterion::level_splits;
  p.max_levels = max_levels;
  p.honest = honest;
  return fit_tree(data, p, seed);
}

TreeModel fit_breiman(const ScalarDataset& data, int max_nodes, int max_depth, bool honest,
                      std::uint64_t seed) {
  TreeParams p;
  p.criterion = SplitCriterion::breiman;
  p.max_nodes = max_nodes;
  p.max_depth = max_depth;
  p.honest = honest;
  return fit_tree(data, p, seed);
}

double theorem_split_levels(double C, int r, std::size_t n, std::size_t d, double delta) {
  if (!(C > 0) || r < 1 || n < 2 || d < 1 || !(delta > 0 && delta < 1))
    throw ValidationError(
        "theorem_split_levels needs C > 0, r >= 1, n >= 2, d >= 1, delta in (0,1)");
  const double ratio = static_cast<double>(d) / delta;
  const double cr = C * r;
  const double inner = std::log(ratio);
  const double correction = inner > 0 ? std::log(inner) : 0.0;
  return cr / (cr + 2) * (std::log(static_cast<double>(n)) - correction);
}

}  // namespace lrnp
