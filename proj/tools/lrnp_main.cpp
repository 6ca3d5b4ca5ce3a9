#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lrnp/evaluation.hpp"
#include "lrnp/experiments.hpp"
#include "lrnp/oracles.hpp"

namespace {

using namespace lrnp;

constexpr const char* kSeedEnv = "LRNP_SEED";

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(kSeedEnv) + " must be a non-negative integer, got '" + env +
                          "'");
  }
}

// Output goes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw ValidationError("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string("invalid ") + what + " '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(std::string("empty ") + what + " list");
  return out;
}

struct TargetOptions {
  int d = 30;
  int k = 5;
  int r = 5;
  std::string support = "shared";

  void add(CLI::App* app) {
    app->add_option("--d", d, "Feature dimension")->check(CLI::PositiveNumber);
    app->add_option("--k", k, "Number of labels")->check(CLI::Range(2, 64));
    app->add_option("--r", r, "Relevant coordinates per label")->check(CLI::PositiveNumber);
    app->add_option("--support", support, "shared: one relevant set for all labels")
        ->check(CLI::IsMember({"shared", "independent"}));
  }
  SupportMode mode() const {
    return support == "shared" ? SupportMode::shared : SupportMode::independent;
  }
};

struct LearnerOptions {
  std::string method = "auto";
  std::string learner = "forest";
  std::string criterion = "breiman";
  int max_depth = unlimited;
  int max_levels = unlimited;
  int max_nodes = unlimited;
  int max_leaf_samples = 0;
  bool honest = false;
  int trees = 100;
  std::size_t subsample = 0;
  std::string hypothesis = "stump";

  void add(CLI::App* app) {
    app->add_option("--method", method, "auto picks labelwise for complete labels")
        ->check(CLI::IsMember({"auto", "labelwise", "pairwise"}));
    app->add_option("--learner", learner, "Scalar learner for the labelwise method")
        ->check(CLI::IsMember({"tree", "shallow-tree", "level-splits", "forest"}));
    app->add_option("--criterion", criterion, "Split criterion of forest trees")
        ->check(CLI::IsMember({"breiman", "level-splits"}));
    app->add_option("--max-depth", max_depth, "Breiman depth cap (-1: none)");
    app->add_option("--max-levels", max_levels, "Level-Splits level count (-1: fully grown)");
    app->add_option("--max-nodes", max_nodes, "Breiman node budget (-1: none)");
    app->add_option("--max-leaf-samples", max_leaf_samples,
                    "Do not split cells this small (0: learner default)");
    app->add_flag("--honest", honest, "Honest single trees");
    app->add_option("--trees", trees, "Forest size")->check(CLI::PositiveNumber);
    app->add_option("--subsample", subsample, "Rows per forest tree (0: half)");
    app->add_option("--hypothesis", hypothesis, "Pairwise hypothesis class")
        ->check(CLI::IsMember({"stump", "constant"}));
  }

  ModelConfig config(const RankingDataset& data) const {
    const bool pairwise =
        method == "pairwise" || (method == "auto" && data.kind() != LabelKind::complete);
    if (pairwise) {
      OvoParams p;
      p.hypothesis_class = parse_hypothesis_class(hypothesis);
      return ModelConfig::pairwise(p);
    }
    LearnerConfig c = learner == "forest"
                          ? LearnerConfig::honest_forest(trees, parse_split_criterion(criterion))
                          : LearnerConfig::preset(learner);
    TreeParams& t = c.kind == LearnerConfig::Kind::forest ? c.forest.tree : c.tree;
    if (max_depth != unlimited) t.max_depth = max_depth;
    if (max_levels != unlimited) t.max_levels = max_levels;
    if (max_nodes != unlimited) t.max_nodes = max_nodes;
    if (max_leaf_samples > 0) t.max_leaf_samples = max_leaf_samples;
    if (honest) t.honest = true;
    if (subsample > 0) c.forest.subsample = subsample;
    c.validate();
    return ModelConfig::labelwise(c);
  }
};

std::optional<LabelKind> kind_option(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  return parse_label_kind(text);
}

// --- gen-data -------------------------------------------------------------

struct GenOptions {
  TargetOptions target;
  std::size_t n = 1000;
  std::string features = "binary";
  double bias = 0.5;
  std::string noise = "none";
  double stddev = 0.1;
  double theta = 1.0;
  std::string labels = "complete";
  std::string survival = "0.7";
  int blocks = 0;
  std::string out;
};

int run_gen(const GenOptions& o, std::uint64_t seed) {
  const auto m =
      SparseScoreFunction::make(o.target.d, o.target.k, o.target.r, seed, o.target.mode());
  FeatureDistribution fd;
  if (o.features == "bernoulli")
    fd = FeatureDistribution::bernoulli(
        std::vector<double>(static_cast<std::size_t>(o.target.d), o.bias));
  NoiseSpec noise;
  if (o.noise == "gaussian") noise = NoiseSpec::gaussian(o.stddev);
  if (o.noise == "mallows") noise = NoiseSpec::mallows(o.theta);
  RankingDataset data;
  if (o.labels == "complete") {
    data = sample_complete(m, noise, o.n, seed, fd);
  } else if (o.labels == "incomplete") {
    auto q = parse_list(o.survival, "survival probability");
    if (q.size() == 1) q.assign(static_cast<std::size_t>(o.target.k), q.front());
    data = sample_incomplete(m, noise, SurvivalSpec::constant(q), o.n, seed, fd);
  } else {
    PartitionSpec p;
    if (o.blocks > 0) p = PartitionSpec::fixed(o.blocks);
    data = sample_partial(m, noise, p, o.n, seed, fd);
  }
  Output out(o.out);
  save_dataset(data, out.stream());
  return 0;
}

// --- train / predict / eval / cv -----------------------------------------

struct TrainOptions {
  std::string data;
  std::string kind;
  LearnerOptions learner;
  unsigned threads = 1;
  std::string model;
};

int run_train(const TrainOptions& o, std::uint64_t seed) {
  const auto data = load_dataset(o.data, {kind_option(o.kind), std::nullopt});
  auto config = o.learner.config(data);
  config.set_threads(o.threads);
  const auto model = fit_model(data, config, seed);
  Output out(o.model);
  save_model(model, out.stream());
  return 0;
}

RankingModel read_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open model " + path);
  return load_model(is);
}

void check_dimension(const RankingModel& model, std::size_t d) {
  if (model_dimension(model) != d)
    throw ValidationError("data has " + std::to_string(d) + " features, model expects " +
                          std::to_string(model_dimension(model)));
}

struct PredictOptions {
  std::string model;
  std::string data;
  std::string out;
};

int run_predict(const PredictOptions& o) {
  const auto model = read_model(o.model);
  const auto x = load_features(o.data);
  check_dimension(model, x.cols());
  Output out(o.out);
  auto& os = out.stream();
  const int k = model_num_labels(model);
  for (int i = 0; i < k; ++i) os << "rank_" << i + 1 << (i + 1 < k ? "," : "\n");
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto sigma = predict_model(model, x.row(r), r);
    for (int i = 0; i < k; ++i) os << sigma.position(i) << (i + 1 < k ? "," : "\n");
  }
  return 0;
}

struct EvalOptions {
  std::string model;
  std::string data;
  std::string kind;
  std::string out;
};

int run_eval(const EvalOptions& o) {
  const auto model = read_model(o.model);
  const auto data = load_dataset(o.data, {kind_option(o.kind), model_num_labels(model)});
  check_dimension(model, data.dimension());
  if (data.num_labels() != model_num_labels(model))
    throw ValidationError("data ranks " + std::to_string(data.num_labels()) +
                          " labels, model ranks " + std::to_string(model_num_labels(model)));
  const auto kt = mean_kt(model, data);
  Output out(o.out);
  auto& os = out.stream();
  os << std::setprecision(10) << "n,mean_kt\n" << data.size() << ',';
  if (kt) os << *kt;
  os << "\n";
  return 0;
}

struct CvOptions {
  std::string data;
  std::string kind;
  LearnerOptions learner;
  int repetitions = 5;
  int folds = 10;
  unsigned threads = 1;
  std::string out;
};

int run_cv(const CvOptions& o, std::uint64_t seed) {
  const auto data = load_dataset(o.data, {kind_option(o.kind), std::nullopt});
  const auto config = o.learner.config(data);
  const auto report = cross_validate(data, config, {o.repetitions, o.folds, o.threads}, seed);
  Output out(o.out);
  report.write_csv(out.stream());
  std::cerr << "mean kt " << report.mean << " +- " << report.stddev << " (" << report.learner
            << ")\n";
  return 0;
}

// --- sweeps ----------------------------------------------------------------

struct SweepOptions {
  TargetOptions target;
  std::size_t n_train = 4000;
  std::size_t n_test = 1000;
  std::string grid;
  std::string learners = "tree,shallow-tree,forest";
  int trees = 100;
  double tolerance = 0.01;
  unsigned threads = 1;
  std::string out;

  SyntheticSetup setup(std::uint64_t seed) const {
    SyntheticSetup s;
    s.d = target.d;
    s.k = target.k;
    s.r = target.r;
    s.support = target.mode();
    s.n_train = n_train;
    s.n_test = n_test;
    s.seed = seed;
    return s;
  }
  std::vector<NamedLearner> named_learners() const {
    std::vector<NamedLearner> out;
    std::stringstream ss(learners);
    for (std::string name; std::getline(ss, name, ',');)
      out.push_back({name, name == "forest" ? LearnerConfig::honest_forest(trees)
                                            : LearnerConfig::preset(name)});
    if (out.empty()) throw ValidationError("no learners given");
    return out;
  }
};

void add_sweep_options(CLI::App* app, SweepOptions& o) {
  o.target.add(app);
  app->add_option("--n-train", o.n_train, "Training rows")->check(CLI::PositiveNumber);
  app->add_option("--n-test", o.n_test, "Held-out rows")->check(CLI::PositiveNumber);
  app->add_option("--learners", o.learners, "Comma-separated learner presets");
  app->add_option("--trees", o.trees, "Forest size")->check(CLI::PositiveNumber);
  app->add_option("--threads", o.threads, "Worker threads");
  app->add_option("--out", o.out, "Output CSV (default stdout)");
}

int run_noise_sweep(const SweepOptions& o, std::uint64_t seed) {
  std::vector<NoiseSpec> grid;
  if (o.grid.empty()) {
    grid = default_gaussian_grid();
  } else {
    for (double s : parse_list(o.grid, "stddev"))
      grid.push_back(s == 0.0 ? NoiseSpec::none() : NoiseSpec::gaussian(s));
  }
  const auto rows = noise_sweep(o.setup(seed), grid, o.named_learners(), o.threads);
  Output out(o.out);
  write_sweep_csv(out.stream(), rows);
  return 0;
}

int run_mallows_sweep(const SweepOptions& o, std::uint64_t seed) {
  const auto thetas = o.grid.empty() ? default_theta_grid() : parse_list(o.grid, "theta");
  for (double t : thetas)
    if (!(t >= 0)) throw ValidationError("theta must be non-negative");
  const auto rows =
      mallows_sweep(o.setup(seed), thetas, o.named_learners(), o.tolerance, o.threads);
  Output out(o.out);
  write_mallows_csv(out.stream(), rows);
  return 0;
}

// --- selftest ----------------------------------------------------------------

int run_selftest() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    failures += ok ? 0 : 1;
  };

  {
    std::vector<int> p{1, 2, 3, 4};
    std::vector<Ranking> all;
    do all.push_back(Ranking::from_positions(p));
    while (std::next_permutation(p.begin(), p.end()));
    bool ok = true;
    for (const auto& a : all)
      for (const auto& b : all) {
        std::size_t d = 0;
        long long s = 0;
        for (int i = 0; i < 4; ++i) {
          s += (a.position(i) - b.position(i)) * (a.position(i) - b.position(i));
          for (int j = i + 1; j < 4; ++j)
            d += (a.position(i) - a.position(j)) * (b.position(i) - b.position(j)) < 0;
        }
        ok &= kendall_tau(a, b) == d && spearman(a, b) == s;
      }
    report("kendall tau and spearman over S_4", ok);
  }
  {
    Rng rng(1);
    const auto center = Ranking::identity(3);
    int hits = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) hits += apply_mallows(center, std::log(2.0), rng) == center;
    report("Mallows mode probability 8/21", std::abs(hits / double(draws) - 8.0 / 21.0) < 0.02);
  }
  {
    const auto m = SparseScoreFunction::make(8, 3, 2, 5);
    const auto train = sample_complete(m, NoiseSpec::none(), 400, 1);
    const auto test = sample_complete(m, NoiseSpec::none(), 200, 2);
    const auto model = fit_model(train, ModelConfig::labelwise(LearnerConfig::level_splits(2)), 3);
    report("level-splits recovers a 2-sparse target", mean_kt(model, test).value_or(0) == 1.0);
  }
  {
    std::vector<double> upper{0.9, 0.8, 0.7};
    const PairwiseProbabilityMatrix p(3, upper);
    report("Copeland matches the Kemeny median", bayes_ranking(p) == kemeny_median_bruteforce(p));
  }
  return failures == 0 ? 0 : 1;
}

// Expands `--config FILE` into `--key=value` arguments placed before the
// remaining command-line arguments, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  std::vector<std::string> injected;
  std::size_t insert_at = std::string::npos;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      if (insert_at == std::string::npos && !args[i].empty() && args[i][0] != '-')
        insert_at = out.size();
      continue;
    }
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open config file " + path);
    std::string line;
    for (int lineno = 1; std::getline(is, line); ++lineno) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      std::replace(key.begin(), key.end(), '_', '-');
      injected.push_back("--" + key + "=" + value);
    }
  }
  if (insert_at == std::string::npos) insert_at = out.size();
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(),
             injected.end());
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Label ranking with trees, forests and pairwise learners"};
  app.name("lrnp");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::optional<std::uint64_t> seed_flag;
  std::string config_note;
  auto add_common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--seed", seed_flag,
                    std::string("Master seed (default: $") + kSeedEnv + " or 0)");
    sub->add_option("--config", config_note, "key=value file; flags given on the command line win");
  };

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Sample a synthetic dataset");
  add_common(gen_cmd);
  gen.target.add(gen_cmd);
  gen_cmd->add_option("--n", gen.n, "Rows")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--features", gen.features, "Feature distribution")
      ->check(CLI::IsMember({"binary", "bernoulli"}));
  gen_cmd->add_option("--bias", gen.bias, "P(x_j = 1) for bernoulli features")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--noise", gen.noise, "Noise model")
      ->check(CLI::IsMember({"none", "gaussian", "mallows"}));
  gen_cmd->add_option("--stddev", gen.stddev, "Truncated Gaussian stddev");
  gen_cmd->add_option("--theta", gen.theta, "Mallows dispersion");
  gen_cmd->add_option("--labels", gen.labels, "Label kind")
      ->check(CLI::IsMember({"complete", "incomplete", "partial"}));
  gen_cmd->add_option("--survival", gen.survival,
                      "Survival probability, or k comma-separated probabilities");
  gen_cmd->add_option("--blocks", gen.blocks, "Blocks per partial ranking (0: uniform)");
  gen_cmd->add_option("--out", gen.out, "Output CSV (default stdout)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a dataset file");
  add_common(train_cmd);
  train_cmd->add_option("--data", train.data, "Dataset CSV")->required();
  train_cmd->add_option("--kind", train.kind, "Label kind (auto, complete, incomplete, partial)");
  train.learner.add(train_cmd);
  train_cmd->add_option("--threads", train.threads, "Worker threads");
  train_cmd->add_option("--model", train.model, "Model output (default stdout)");

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict rankings for a feature file");
  add_common(pred_cmd);
  pred_cmd->add_option("--model", pred.model, "Model file")->required();
  pred_cmd->add_option("--data", pred.data, "CSV with feature columns")->required();
  pred_cmd->add_option("--out", pred.out, "Output CSV (default stdout)");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Mean Kendall tau of a model on labelled data");
  add_common(eval_cmd);
  eval_cmd->add_option("--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  eval_cmd->add_option("--kind", ev.kind, "Label kind (auto, complete, incomplete, partial)");
  eval_cmd->add_option("--out", ev.out, "Output CSV (default stdout)");

  CvOptions cv;
  auto* cv_cmd = app.add_subcommand("cv", "Repeated k-fold cross-validation");
  add_common(cv_cmd);
  cv_cmd->add_option("--data", cv.data, "Dataset CSV")->required();
  cv_cmd->add_option("--kind", cv.kind, "Label kind (auto, complete, incomplete, partial)");
  cv.learner.add(cv_cmd);
  cv_cmd->add_option("--repetitions", cv.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  cv_cmd->add_option("--folds", cv.folds, "Folds per repetition")->check(CLI::Range(2, 1000));
  cv_cmd->add_option("--threads", cv.threads, "Worker threads");
  cv_cmd->add_option("--out", cv.out, "Output CSV (default stdout)");

  SweepOptions noise;
  noise.target.k = 6;
  auto* noise_cmd = app.add_subcommand("noise-sweep", "Learner accuracy across Gaussian noise");
  add_common(noise_cmd);
  add_sweep_options(noise_cmd, noise);
  noise_cmd->add_option("--stddevs", noise.grid, "Comma-separated stddevs (0: noiseless)");

  SweepOptions mallows;
  mallows.target.k = 6;
  mallows.learners = "tree";
  auto* mallows_cmd =
      app.add_subcommand("mallows-sweep", "Mallows noise against alpha-matched Gaussian noise");
  add_common(mallows_cmd);
  add_sweep_options(mallows_cmd, mallows);
  mallows_cmd->add_option("--thetas", mallows.grid, "Comma-separated thetas (default 0.6..4.4)");
  mallows_cmd->add_option("--tolerance", mallows.tolerance, "Alpha matching tolerance");

  auto* self_cmd = app.add_subcommand("selftest", "Quick internal consistency checks");

  const auto args = expand_config(argc, argv);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
  if (*gen_cmd) return run_gen(gen, seed);
  if (*train_cmd) return run_train(train, seed);
  if (*pred_cmd) return run_predict(pred);
  if (*eval_cmd) return run_eval(ev);
  if (*cv_cmd) return run_cv(cv, seed);
  if (*noise_cmd) return run_noise_sweep(noise, seed);
  if (*mallows_cmd) return run_mallows_sweep(mallows, seed);
  if (*self_cmd) return run_selftest();
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
