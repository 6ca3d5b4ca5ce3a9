#include "lrnp/forest.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lrnp/common.hpp"

namespace lrnp {

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("a forest needs at least one tree");
  if (subsample && *subsample < 1) throw ValidationError("subsample size must be >= 1");
  tree.validate();
}

ForestModel::ForestModel(std::vector<TreeModel> trees, std::size_t subsample_size,
                         std::uint64_t seed)
    : trees_(std::move(trees)), subsample_size_(subsample_size), seed_(seed) {
  if (trees_.empty()) throw ValidationError("a forest needs at least one tree");
  for (const auto& t : trees_)
    if (t.dimension() != trees_.front().dimension())
      throw ValidationError("forest trees disagree on the feature dimension");
}

double ForestModel::predict(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return s / static_cast<double>(trees_.size());
}

std::vector<double> ForestModel::predict(const FeatureMatrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

void ForestModel::serialize(std::ostream& os) const {
  os << "forest " << trees_.size() << " subsample " << subsample_size_ << " seed " << seed_ << "\n";
  for (const auto& t : trees_) t.serialize(os);
}

std::string ForestModel::serialize() const {
  std::ostringstream os;
  serialize(os);
  return os.str();
}

ForestModel ForestModel::parse(std::istream& is) {
  std::string line;
  while (std::getline(is, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::istringstream ss(line);
  std::string tag, sub, seed_tag;
  std::size_t count = 0, s = 0;
  std::uint64_t seed = 0;
  if (!(ss >> tag >> count >> sub >> s >> seed_tag >> seed) || tag != "forest" ||
      sub != "subsample" || seed_tag != "seed")
    throw ValidationError("forest model: malformed header '" + line + "'");
  std::vector<TreeModel> trees;
  trees.reserve(count);
  for (std::size_t b = 0; b < count; ++b) trees.push_back(TreeModel::parse(is));
  return ForestModel(std::move(trees), s, seed);
}

std::uint64_t forest_tree_seed(std::uint64_t forest_seed, std::size_t b) {
  return derive_seed(forest_seed, stream::tree, b);
}

std::vector<std::size_t> forest_subsample(std::size_t n, std::size_t s, std::uint64_t tree_seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(derive_seed(tree_seed, stream::subsample));
  for (std::size_t i = 0; i < s; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(s);
  std::sort(rows.begin(), rows.end());
  return rows;
}

ForestModel fit_forest(const ScalarDataset& data, const ForestParams& params, std::uint64_t seed) {
  params.validate();
  const std::size_t n = data.size();
  if (n == 0) throw ValidationError("cannot fit a forest on an empty dataset");
  const std::size_t s = params.subsample.value_or((n + 1) / 2);
  if (s > n)
    throw ValidationError("subsample size " + std::to_string(s) + " exceeds the " +
                          std::to_string(n) + " training rows");
  TreeParams tree = params.tree;
  tree.honest = true;
  std::vector<TreeModel> trees(static_cast<std::size_t>(params.n_trees));
  parallel_for(trees.size(), params.threads, [&](std::size_t b) {
    const auto tree_seed = forest_tree_seed(seed, b);
    const auto rows = forest_subsample(n, s, tree_seed);
    trees[b] = fit_tree(data, rows, tree, tree_seed);
  });
  return ForestModel(std::move(trees), s, seed);
}

}  // namespace lrnp
