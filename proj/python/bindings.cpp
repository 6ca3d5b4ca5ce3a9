#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "lrnp/evaluation.hpp"
#include "lrnp/experiments.hpp"
#include "lrnp/oracles.hpp"

namespace py = pybind11;
using namespace lrnp;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw ValidationError("feature array must be two-dimensional");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return FeatureMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

std::vector<double> to_vector(const DoubleArray& a) {
  if (a.ndim() != 1) throw ValidationError("expected a one-dimensional array");
  return {a.data(), a.data() + a.shape(0)};
}

DoubleArray from_matrix(const FeatureMatrix& m) {
  DoubleArray out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

DoubleArray from_vector(const std::vector<double>& v) {
  DoubleArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Rank cells as in the CSV format: position for complete labels, rank among
// observed labels (0 if erased) for incomplete ones, block index for partial.
IntArray rank_cells(const RankingDataset& data) {
  const auto k = static_cast<std::size_t>(data.num_labels());
  IntArray out({data.size(), k});
  int* cells = out.mutable_data();
  std::visit(
      [&](const auto& rows) {
        using T = typename std::decay_t<decltype(rows)>::value_type;
        for (std::size_t r = 0; r < rows.size(); ++r)
          for (std::size_t i = 0; i < k; ++i) {
            const int label = static_cast<int>(i);
            int v;
            if constexpr (std::is_same_v<T, Ranking>)
              v = rows[r].position(label);
            else if constexpr (std::is_same_v<T, IncompleteRanking>)
              v = rows[r].rank_of(label) + 1;
            else
              v = rows[r].block_of(label) + 1;
            cells[r * k + i] = v;
          }
      },
      data.labels());
  return out;
}

RankingDataset make_dataset(const DoubleArray& features, const IntArray& ranks,
                            std::optional<std::string> kind_name) {
  auto x = to_matrix(features);
  if (ranks.ndim() != 2) throw ValidationError("rank array must be two-dimensional");
  const auto n = static_cast<std::size_t>(ranks.shape(0));
  const int k = static_cast<int>(ranks.shape(1));
  if (n != x.rows()) throw ValidationError("feature and rank arrays disagree on the row count");
  const int* cells = ranks.data();
  auto row = [&](std::size_t r) {
    return std::vector<int>(cells + r * static_cast<std::size_t>(k),
                            cells + (r + 1) * static_cast<std::size_t>(k));
  };

  LabelKind kind = LabelKind::complete;
  if (kind_name) {
    kind = parse_label_kind(*kind_name);
  } else if (std::find(cells, cells + n * static_cast<std::size_t>(k), 0) !=
             cells + n * static_cast<std::size_t>(k)) {
    kind = LabelKind::incomplete;
  }

  RankingDataset::Labels labels;
  if (kind == LabelKind::complete) {
    std::vector<Ranking> out;
    for (std::size_t r = 0; r < n; ++r) out.push_back(Ranking::from_positions(row(r)));
    labels = std::move(out);
  } else if (kind == LabelKind::incomplete) {
    std::vector<IncompleteRanking> out;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<std::pair<int, int>> kept;
      const auto v = row(r);
      for (int i = 0; i < k; ++i)
        if (v[static_cast<std::size_t>(i)] > 0)
          kept.emplace_back(v[static_cast<std::size_t>(i)], i);
      std::sort(kept.begin(), kept.end());
      std::vector<int> order;
      for (std::size_t t = 0; t < kept.size(); ++t) {
        if (t > 0 && kept[t].first == kept[t - 1].first)
          throw ValidationError("duplicate position in row " + std::to_string(r));
        order.push_back(kept[t].second);
      }
      out.push_back(IncompleteRanking::from_order(k, std::move(order)));
    }
    labels = std::move(out);
  } else {
    std::vector<PartialRanking> out;
    for (std::size_t r = 0; r < n; ++r) {
      std::map<int, std::vector<int>> by_value;
      const auto v = row(r);
      for (int i = 0; i < k; ++i) by_value[v[static_cast<std::size_t>(i)]].push_back(i);
      std::vector<std::vector<int>> blocks;
      for (auto& [value, members] : by_value) blocks.push_back(std::move(members));
      out.push_back(PartialRanking::from_blocks(k, std::move(blocks)));
    }
    labels = std::move(out);
  }
  return RankingDataset(std::move(x), std::move(labels), k);
}

NoiseSpec make_noise(const std::string& kind, double value) {
  if (kind == "none") return NoiseSpec::none();
  if (kind == "gaussian") return NoiseSpec::gaussian(value);
  if (kind == "mallows") return NoiseSpec::mallows(value);
  throw ValidationError("unknown noise kind '" + kind + "'");
}

ModelConfig make_config(const RankingDataset& data, const std::string& method,
                        const std::string& learner, std::optional<int> trees,
                        const std::string& hypothesis, unsigned threads) {
  const bool pairwise =
      method == "pairwise" || (method == "auto" && data.kind() != LabelKind::complete);
  if (!pairwise && method != "auto" && method != "labelwise")
    throw ValidationError("unknown method '" + method + "'");
  ModelConfig config;
  if (pairwise) {
    OvoParams p;
    p.hypothesis_class = parse_hypothesis_class(hypothesis);
    config = ModelConfig::pairwise(p);
  } else {
    auto c = LearnerConfig::preset(learner);
    if (trees) c.forest.n_trees = *trees;
    c.validate();
    config = ModelConfig::labelwise(c);
  }
  config.set_threads(threads);
  return config;
}

// Holding the variant in a struct keeps the std::variant caster from unpacking it.
struct Model {
  RankingModel inner;
};

IntArray predict_rows(const Model& wrapped, const DoubleArray& features) {
  const auto& model = wrapped.inner;
  const auto x = to_matrix(features);
  if (x.cols() != model_dimension(model))
    throw ValidationError("feature dimension does not match the model");
  const auto k = static_cast<std::size_t>(model_num_labels(model));
  IntArray out({x.rows(), k});
  int* cells = out.mutable_data();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto sigma = predict_model(model, x.row(r), r);
    std::copy(sigma.positions().begin(), sigma.positions().end(), cells + r * k);
  }
  return out;
}

TreeParams make_tree_params(const std::string& criterion, int max_levels, int max_nodes,
                            int max_depth, int max_leaf_samples, bool honest) {
  TreeParams p;
  p.criterion = parse_split_criterion(criterion);
  p.max_levels = max_levels;
  p.max_nodes = max_nodes;
  p.max_depth = max_depth;
  p.max_leaf_samples = max_leaf_samples;
  p.honest = honest;
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Label ranking with greedy trees, honest forests and pairwise learners";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Ranking>(m, "Ranking")
      .def_static("from_positions", &Ranking::from_positions, py::arg("positions"))
      .def_static(
          "from_order",
          [](const std::vector<int>& best_first) { return Ranking::from_order(best_first); },
          py::arg("best_first"))
      .def_static("identity", &Ranking::identity, py::arg("k"))
      .def_static("parse", &parse_ranking, py::arg("text"))
      .def_property_readonly("k", &Ranking::k)
      .def_property_readonly("positions",
                             [](const Ranking& r) {
                               return std::vector<int>(r.positions().begin(), r.positions().end());
                             })
      .def("order", &Ranking::order)
      .def("position", &Ranking::position, py::arg("label"))
      .def("__eq__", [](const Ranking& a, const Ranking& b) { return a == b; })
      .def("__str__", [](const Ranking& r) { return to_string(r); })
      .def("__repr__", [](const Ranking& r) { return "Ranking(" + to_string(r) + ")"; });

  m.def("kendall_tau", &kendall_tau, py::arg("a"), py::arg("b"));
  m.def("kt_coefficient", &kt_coefficient, py::arg("a"), py::arg("b"));
  m.def("spearman", &spearman, py::arg("a"), py::arg("b"));
  m.def("canonical_repr", &canonical_repr, py::arg("sigma"));
  m.def(
      "argsort",
      [](const std::vector<std::optional<double>>& scores) {
        const auto r = argsort(scores);
        return std::vector<int>(r.observed().begin(), r.observed().end());
      },
      py::arg("scores"), "Labels with a score, best first; None marks an erased label.");
  m.def(
      "argsort_descending",
      [](const std::vector<double>& scores) { return argsort_descending(scores); },
      py::arg("scores"));
  m.def(
      "partial_rank",
      [](const Ranking& sigma, const std::vector<std::pair<int, int>>& intervals) {
        std::vector<PositionInterval> p;
        for (auto [a, b] : intervals) p.push_back({a, b});
        return partial_rank(sigma, p).blocks();
      },
      py::arg("sigma"), py::arg("intervals"));
  m.def(
      "apply_mallows",
      [](const Ranking& center, double theta, std::uint64_t seed) {
        return apply_mallows(center, theta, seed);
      },
      py::arg("center"), py::arg("theta"), py::arg("seed"));

  py::class_<SparseScoreFunction>(m, "SparseTarget")
      .def_static(
          "make",
          [](int d, int k, int r, std::uint64_t seed, const std::string& support) {
            if (support != "shared" && support != "independent")
              throw ValidationError("support must be 'shared' or 'independent'");
            return SparseScoreFunction::make(
                d, k, r, seed,
                support == "shared" ? SupportMode::shared : SupportMode::independent);
          },
          py::arg("d"), py::arg("k"), py::arg("r"), py::arg("seed"), py::arg("support") = "shared")
      .def_property_readonly("dimension", &SparseScoreFunction::dimension)
      .def_property_readonly("num_labels", &SparseScoreFunction::num_labels)
      .def_property_readonly("sparsity", &SparseScoreFunction::sparsity)
      .def("relevant_set", &SparseScoreFunction::relevant_set, py::arg("label"))
      .def("relevant_union", &SparseScoreFunction::relevant_union)
      .def(
          "__call__",
          [](const SparseScoreFunction& f, const DoubleArray& x) {
            return from_vector(f(to_vector(x)));
          },
          py::arg("x"))
      .def(
          "ranking",
          [](const SparseScoreFunction& f, const DoubleArray& x) {
            return f.ranking(to_vector(x));
          },
          py::arg("x"));

  py::class_<RankingDataset>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("features"), py::arg("ranks"),
           py::arg("kind") = py::none())
      .def_static(
          "load",
          [](const std::string& path, std::optional<std::string> kind) {
            LoadOptions o;
            if (kind) o.kind = parse_label_kind(*kind);
            return load_dataset(std::filesystem::path(path), o);
          },
          py::arg("path"), py::arg("kind") = py::none())
      .def(
          "save",
          [](const RankingDataset& d, const std::string& path) {
            save_dataset(d, std::filesystem::path(path));
          },
          py::arg("path"))
      .def("__len__", &RankingDataset::size)
      .def_property_readonly("dimension", &RankingDataset::dimension)
      .def_property_readonly("num_labels", &RankingDataset::num_labels)
      .def_property_readonly("kind", [](const RankingDataset& d) { return to_string(d.kind()); })
      .def_property_readonly("features",
                             [](const RankingDataset& d) { return from_matrix(d.features()); })
      .def_property_readonly("ranks", &rank_cells)
      .def(
          "subset",
          [](const RankingDataset& d, const std::vector<std::size_t>& rows) {
            return d.subset(rows);
          },
          py::arg("rows"));

  m.def(
      "sample_complete",
      [](const SparseScoreFunction& target, std::size_t n, std::uint64_t seed,
         const std::string& noise,
         double level) { return sample_complete(target, make_noise(noise, level), n, seed); },
      py::arg("target"), py::arg("n"), py::arg("seed"), py::arg("noise") = "none",
      py::arg("level") = 0.0,
      "Draws n complete rankings; noise is 'none', 'gaussian' (level = stddev) or 'mallows' "
      "(level = theta).");
  m.def(
      "sample_incomplete",
      [](const SparseScoreFunction& target, std::size_t n, std::uint64_t seed,
         const std::vector<double>& survival, const std::string& noise, double level) {
        return sample_incomplete(target, make_noise(noise, level), SurvivalSpec::constant(survival),
                                 n, seed);
      },
      py::arg("target"), py::arg("n"), py::arg("seed"), py::arg("survival"),
      py::arg("noise") = "none", py::arg("level") = 0.0);
  m.def(
      "sample_partial",
      [](const SparseScoreFunction& target, std::size_t n, std::uint64_t seed,
         std::optional<int> blocks, const std::string& noise, double level) {
        return sample_partial(target, make_noise(noise, level), PartitionSpec{blocks}, n, seed);
      },
      py::arg("target"), py::arg("n"), py::arg("seed"), py::arg("blocks") = py::none(),
      py::arg("noise") = "none", py::arg("level") = 0.0);
  m.def(
      "sample_paired",
      [](const SparseScoreFunction& target, std::size_t n, std::uint64_t seed,
         const std::string& noise, double level) {
        auto s = sample_paired(target, make_noise(noise, level), n, seed);
        return py::make_tuple(std::move(s.noiseless), std::move(s.noisy));
      },
      py::arg("target"), py::arg("n"), py::arg("seed"), py::arg("noise"), py::arg("level"),
      "Returns (noiseless, noisy) datasets over the same feature draws.");
  m.def("alpha_inconsistency", &alpha_inconsistency, py::arg("noiseless"), py::arg("noisy"));
  m.def("beta_kt_gap", &beta_kt_gap, py::arg("noiseless"), py::arg("noisy"));

  py::class_<TreeModel>(m, "Tree")
      .def_property_readonly("num_leaves", &TreeModel::num_leaves)
      .def_property_readonly("depth", &TreeModel::depth)
      .def_property_readonly("split_set", &TreeModel::split_set)
      .def("predict", [](const TreeModel& t,
                         const DoubleArray& x) { return from_vector(t.predict(to_matrix(x))); })
      .def("serialize", py::overload_cast<>(&TreeModel::serialize, py::const_));

  py::class_<ForestModel>(m, "Forest")
      .def("__len__", &ForestModel::size)
      .def_property_readonly("subsample_size", &ForestModel::subsample_size)
      .def("predict", [](const ForestModel& f,
                         const DoubleArray& x) { return from_vector(f.predict(to_matrix(x))); })
      .def("serialize", py::overload_cast<>(&ForestModel::serialize, py::const_));

  m.def(
      "fit_tree",
      [](const DoubleArray& x, const DoubleArray& y, const std::string& criterion, int max_levels,
         int max_nodes, int max_depth, int max_leaf_samples, bool honest, std::uint64_t seed) {
        const ScalarDataset data(to_matrix(x), to_vector(y));
        const auto p =
            make_tree_params(criterion, max_levels, max_nodes, max_depth, max_leaf_samples, honest);
        py::gil_scoped_release release;
        return fit_tree(data, p, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("criterion") = "breiman",
      py::arg("max_levels") = unlimited, py::arg("max_nodes") = unlimited,
      py::arg("max_depth") = unlimited, py::arg("max_leaf_samples") = 1, py::arg("honest") = false,
      py::arg("seed") = 0, "Targets must lie in [0, 1]; -1 means no limit.");
  m.def(
      "fit_forest",
      [](const DoubleArray& x, const DoubleArray& y, int n_trees,
         std::optional<std::size_t> subsample, const std::string& criterion, std::uint64_t seed,
         unsigned threads) {
        const ScalarDataset data(to_matrix(x), to_vector(y));
        ForestParams p;
        p.n_trees = n_trees;
        p.subsample = subsample;
        p.tree = ForestParams::fully_grown_tree(parse_split_criterion(criterion));
        p.threads = threads;
        p.validate();
        py::gil_scoped_release release;
        return fit_forest(data, p, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("n_trees") = 100, py::arg("subsample") = py::none(),
      py::arg("criterion") = "breiman", py::arg("seed") = 0, py::arg("threads") = 1);

  py::class_<Model>(m, "Model")
      .def_property_readonly("num_labels",
                             [](const Model& mdl) { return model_num_labels(mdl.inner); })
      .def_property_readonly("dimension",
                             [](const Model& mdl) { return model_dimension(mdl.inner); })
      .def_property_readonly(
          "method",
          [](const Model& mdl) { return mdl.inner.index() == 0 ? "labelwise" : "pairwise"; })
      .def("predict", &predict_rows, py::arg("features"),
           "Predicted positions, one row per sample and one column per label.")
      .def(
          "score",
          [](const Model& mdl, const RankingDataset& data) { return mean_kt(mdl.inner, data); },
          py::arg("data"), "Mean Kendall tau coefficient, or None if no pair is observed.")
      .def("save",
           [](const Model& mdl, const std::string& path) {
             std::ofstream os(path);
             if (!os) throw std::runtime_error("cannot open " + path + " for writing");
             save_model(mdl.inner, os);
           })
      .def_static("load",
                  [](const std::string& path) {
                    std::ifstream is(path);
                    if (!is) throw ValidationError("cannot open " + path);
                    return Model{load_model(is)};
                  })
      .def("serialize", [](const Model& mdl) {
        std::ostringstream os;
        save_model(mdl.inner, os);
        return os.str();
      });

  m.def(
      "fit",
      [](const RankingDataset& data, const std::string& method, const std::string& learner,
         std::optional<int> trees, const std::string& hypothesis, std::uint64_t seed,
         unsigned threads) {
        const auto config = make_config(data, method, learner, trees, hypothesis, threads);
        py::gil_scoped_release release;
        return Model{fit_model(data, config, seed)};
      },
      py::arg("data"), py::arg("method") = "auto", py::arg("learner") = "tree",
      py::arg("trees") = py::none(), py::arg("hypothesis") = "stump", py::arg("seed") = 0,
      py::arg("threads") = 1,
      "method: 'auto', 'labelwise' or 'pairwise'. learner: 'tree', 'shallow-tree', "
      "'level-splits' or 'forest'.");

  m.def(
      "cross_validate",
      [](const RankingDataset& data, const std::string& method, const std::string& learner,
         std::optional<int> trees, int repetitions, int folds, std::uint64_t seed,
         unsigned threads) {
        const auto config = make_config(data, method, learner, trees, "stump", 1);
        CvReport report;
        {
          py::gil_scoped_release release;
          report = cross_validate(data, config, {repetitions, folds, threads}, seed);
        }
        py::list runs;
        for (const auto& r : report.runs) {
          py::dict run;
          run["repetition"] = r.repetition;
          run["fold"] = r.fold;
          run["n_train"] = r.n_train;
          run["n_test"] = r.n_test;
          run["mean_kt"] = r.mean_kt;
          runs.append(run);
        }
        py::dict out;
        out["learner"] = report.learner;
        out["mean"] = report.mean;
        out["stddev"] = report.stddev;
        out["runs"] = runs;
        return out;
      },
      py::arg("data"), py::arg("method") = "auto", py::arg("learner") = "tree",
      py::arg("trees") = py::none(), py::arg("repetitions") = 5, py::arg("folds") = 10,
      py::arg("seed") = 0, py::arg("threads") = 1);

  m.def(
      "bayes_ranking",
      [](int k, const std::vector<double>& upper) {
        return bayes_ranking(PairwiseProbabilityMatrix(k, upper));
      },
      py::arg("k"), py::arg("upper"),
      "Ranking minimizing the expected Kendall tau under strict stochastic transitivity; "
      "upper lists P(i above j) for i < j.");
  m.def(
      "kemeny_median",
      [](int k, const std::vector<double>& upper) {
        return kemeny_median_bruteforce(PairwiseProbabilityMatrix(k, upper));
      },
      py::arg("k"), py::arg("upper"));
  m.def(
      "expected_kendall_tau",
      [](int k, const std::vector<double>& upper, const Ranking& sigma) {
        return expected_kendall_tau(PairwiseProbabilityMatrix(k, upper), sigma);
      },
      py::arg("k"), py::arg("upper"), py::arg("sigma"));
}
