#include "lrnp/labelrank.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "lrnp/common.hpp"

namespace lrnp {

LearnerConfig LearnerConfig::fully_grown_tree() {
  return {};
}

LearnerConfig LearnerConfig::shallow_tree(int max_depth) {
  LearnerConfig c;
  c.tree.max_depth = max_depth;
  return c;
}

LearnerConfig LearnerConfig::level_splits(int max_levels) {
  LearnerConfig c;
  c.tree.criterion = SplitCriterion::level_splits;
  c.tree.max_levels = max_levels;
  return c;
}

LearnerConfig LearnerConfig::honest_forest(int n_trees, SplitCriterion criterion) {
  LearnerConfig c;
  c.kind = Kind::forest;
  c.forest.n_trees = n_trees;
  c.forest.tree = ForestParams::fully_grown_tree(criterion);
  return c;
}

LearnerConfig LearnerConfig::preset(std::string_view name) {
  if (name == "tree") return fully_grown_tree();
  if (name == "shallow-tree") return shallow_tree();
  if (name == "level-splits") return level_splits();
  if (name == "forest") return honest_forest();
  throw ValidationError("unknown learner '" + std::string(name) +
                        "' (expected tree, shallow-tree, level-splits or forest)");
}

namespace {

std::string describe_tree(const TreeParams& p) {
  std::ostringstream os;
  os << to_string(p.criterion);
  if (p.max_levels != unlimited) os << " max_levels=" << p.max_levels;
  if (p.max_nodes != unlimited) os << " max_nodes=" << p.max_nodes;
  if (p.max_depth != unlimited) os << " max_depth=" << p.max_depth;
  os << " max_leaf_samples=" << p.max_leaf_samples << " honest=" << (p.honest ? 1 : 0);
  return os.str();
}

}  // namespace

std::string LearnerConfig::describe() const {
  if (kind == Kind::tree) return "tree " + describe_tree(tree);
  std::ostringstream os;
  os << "forest n_trees=" << forest.n_trees;
  if (forest.subsample) os << " subsample=" << *forest.subsample;
  os << " " << describe_tree(forest.tree);
  return os.str();
}

void LearnerConfig::validate() const {
  if (kind == Kind::tree)
    tree.validate();
  else
    forest.validate();
}

double predict_scalar(const ScalarModel& model, std::span<const double> x) {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

LabelwiseRanker::LabelwiseRanker(std::vector<ScalarModel> models, std::size_t dimension,
                                 std::string learner)
    : models_(std::move(models)), dimension_(dimension), learner_(std::move(learner)) {
  if (models_.size() < 2) throw ValidationError("a label ranker needs at least two labels");
  for (const auto& m : models_)
    if (std::visit([](const auto& v) { return v.dimension(); }, m) != dimension_)
      throw ValidationError("label models disagree on the feature dimension");
}

std::vector<double> LabelwiseRanker::predict_scores(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw ValidationError("feature vector has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(dimension_));
  std::vector<double> out;
  out.reserve(models_.size());
  for (const auto& m : models_) out.push_back(predict_scalar(m, x));
  return out;
}

Ranking LabelwiseRanker::predict(std::span<const double> x) const {
  return argsort_ascending(predict_scores(x));
}

void LabelwiseRanker::serialize(std::ostream& os) const {
  os << "labelwise " << models_.size() << " dimension " << dimension_ << "\n";
  os << "learner " << learner_ << "\n";
  for (const auto& m : models_) std::visit([&](const auto& v) { v.serialize(os); }, m);
}

std::string LabelwiseRanker::serialize() const {
  std::ostringstream os;
  serialize(os);
  return os.str();
}

LabelwiseRanker LabelwiseRanker::parse(std::istream& is) {
  std::string line;
  std::getline(is, line);
  std::istringstream head(line);
  std::string tag, dim_tag;
  std::size_t k = 0, d = 0;
  if (!(head >> tag >> k >> dim_tag >> d) || tag != "labelwise" || dim_tag != "dimension")
    throw ValidationError("labelwise model: malformed header '" + line + "'");
  std::getline(is, line);
  if (line.rfind("learner ", 0) != 0)
    throw ValidationError("labelwise model: expected learner line, got '" + line + "'");
  std::string learner = line.substr(8);
  std::vector<ScalarModel> models;
  for (std::size_t i = 0; i < k; ++i) {
    const int c = (is >> std::ws).peek();
    if (c == 'f')
      models.emplace_back(ForestModel::parse(is));
    else
      models.emplace_back(TreeModel::parse(is));
  }
  return LabelwiseRanker(std::move(models), d, std::move(learner));
}

ScalarDataset label_slice(const RankingDataset& data, int label) {
  const auto& rows = data.complete();
  if (label < 0 || label >= data.num_labels()) throw ValidationError("label index out of range");
  std::vector<double> y(rows.size());
  const double k = static_cast<double>(data.num_labels());
  for (std::size_t r = 0; r < rows.size(); ++r) y[r] = rows[r].position(label) / k;
  return ScalarDataset(data.features(), std::move(y));
}

std::uint64_t label_seed(std::uint64_t seed, int label) {
  return derive_seed(seed, stream::label, static_cast<std::uint64_t>(label));
}

ScalarModel fit_label_model(const RankingDataset& data, int label, const LearnerConfig& config,
                            std::uint64_t seed) {
  config.validate();
  const auto slice = label_slice(data, label);
  const auto s = label_seed(seed, label);
  if (config.kind == LearnerConfig::Kind::tree) return fit_tree(slice, config.tree, s);
  return fit_forest(slice, config.forest, s);
}

LabelwiseRanker fit_label_ranker(const RankingDataset& data, const LearnerConfig& config,
                                 std::uint64_t seed) {
  if (data.kind() != LabelKind::complete)
    throw ValidationError("labelwise ranking needs complete rankings; this dataset has " +
                          to_string(data.kind()) + " labels (use the pairwise learner)");
  if (data.size() == 0) throw ValidationError("cannot fit on an empty dataset");
  config.validate();
  const int k = data.num_labels();
  std::vector<ScalarModel> models(static_cast<std::size_t>(k));
  LearnerConfig inner = config;
  inner.forest.threads = 1;
  parallel_for(models.size(), config.threads, [&](std::size_t i) {
    models[i] = fit_label_model(data, static_cast<int>(i), inner, seed);
  });
  return LabelwiseRanker(std::move(models), data.dimension(), config.describe());
}

}  // namespace lrnp
