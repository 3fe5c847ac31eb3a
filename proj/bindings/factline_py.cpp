#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "factline/agreement.hpp"
#include "factline/classify.hpp"
#include "factline/corpus.hpp"
#include "factline/numcore.hpp"
#include "factline/stemmer.hpp"
#include "factline/storytype.hpp"
#include "factline/textrep.hpp"

namespace py = pybind11;
using namespace factline;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style |
                                                       py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)),
           static_cast<std::size_t>(a.shape(1)));
  const auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j)
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = r(i, j);
  return m;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      w(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
  return out;
}

std::vector<double> vector_from_numpy(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-d array");
  return {a.data(), a.data() + a.shape(0)};
}

}  // namespace

PYBIND11_MODULE(_factline, m) {
  m.doc() = "Fact-checked story analysis: harmonization, clustering, "
            "classification and cross-site agreement";

  py::register_exception<Error>(m, "FactlineError");

  // ---- text -----------------------------------------------------------
  m.def("porter_stem", &porter_stem, py::arg("word"),
        "Stem one lowercase word with the Porter algorithm");
  m.def(
      "preprocess",
      [](const std::string& text, bool stem,
         const std::vector<std::string>& stopwords) {
        PreprocessOptions opt;
        opt.stem = stem;
        opt.stopwords = {stopwords.begin(), stopwords.end()};
        return preprocess(text, opt);
      },
      py::arg("text"), py::arg("stem") = true,
      py::arg("stopwords") = std::vector<std::string>{},
      "Normalize, tokenize, filter and stem a text");
  m.def(
      "cosine_similarity",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& u,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
        return cosine_similarity(vector_from_numpy(u), vector_from_numpy(v));
      },
      py::arg("u"), py::arg("v"));

  // ---- validity -------------------------------------------------------
  m.def(
      "harmonize_validity",
      [](const std::string& raw, bool fallback_to_unknown) {
        return to_string(harmonize_validity(raw, ValidityLexicon::defaults(),
                                            fallback_to_unknown));
      },
      py::arg("raw"), py::arg("fallback_to_unknown") = false,
      "Map a raw verdict string onto the five-way scale");
  m.def(
      "mode_validity",
      [](const std::vector<std::string>& labels) {
        std::vector<Validity> parsed;
        for (const auto& l : labels) {
          const auto v = validity_from_string(l);
          if (!v) throw ConfigError("unknown validity label \"" + l + "\"");
          parsed.push_back(*v);
        }
        return to_string(mode_validity(parsed));
      },
      py::arg("labels"));

  // ---- PCA ------------------------------------------------------------
  py::class_<PcaModel>(m, "PcaModel")
      .def_property_readonly("mean",
                             [](const PcaModel& p) { return p.mean; })
      .def_property_readonly(
          "components",
          [](const PcaModel& p) { return matrix_to_numpy(p.components); })
      .def_property_readonly(
          "explained_ratio",
          [](const PcaModel& p) { return p.explained_ratio; })
      .def_property_readonly(
          "eigenvalues", [](const PcaModel& p) { return p.eigenvalues; })
      .def("transform",
           [](const PcaModel& p,
              const py::array_t<double, py::array::c_style |
                                            py::array::forcecast>& x) {
             return matrix_to_numpy(pca_transform(p, matrix_from_numpy(x)));
           })
      .def("inverse_transform",
           [](const PcaModel& p,
              const py::array_t<double, py::array::c_style |
                                            py::array::forcecast>& y) {
             return matrix_to_numpy(
                 pca_inverse_transform(p, matrix_from_numpy(y)));
           });

  m.def(
      "pca_fit",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         std::optional<std::size_t> components,
         std::optional<double> variance,
         std::optional<std::size_t> max_components) {
        PcaTarget target;
        if (components) {
          target = PcaTarget::by_components(*components);
        } else {
          target = PcaTarget::by_variance(variance.value_or(0.95),
                                          max_components);
        }
        return pca_fit(matrix_from_numpy(x), target);
      },
      py::arg("x"), py::arg("components") = std::nullopt,
      py::arg("variance") = std::nullopt,
      py::arg("max_components") = std::nullopt);

  // ---- k-means --------------------------------------------------------
  py::class_<KmeansModel>(m, "KmeansModel")
      .def_readonly("k", &KmeansModel::k)
      .def_readonly("assignments", &KmeansModel::assignments)
      .def_readonly("wss", &KmeansModel::wss)
      .def_readonly("iterations", &KmeansModel::iterations)
      .def_readonly("wss_history", &KmeansModel::wss_history)
      .def_property_readonly("centers", [](const KmeansModel& k) {
        return matrix_to_numpy(k.centers);
      });

  m.def(
      "kmeans_fit",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
        KmeansConfig config;
        config.max_iter = max_iter;
        config.tol = tol;
        return kmeans_fit(matrix_from_numpy(x), k, seed, config);
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 0,
      py::arg("max_iter") = 300, py::arg("tol") = 1e-8);
  m.def(
      "wss_curve",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const std::vector<std::size_t>& ks, std::uint64_t seed,
         std::size_t restarts) {
        return wss_curve(matrix_from_numpy(x), ks, seed, restarts);
      },
      py::arg("x"), py::arg("k_values"), py::arg("seed") = 0,
      py::arg("restarts") = 5);
  m.def(
      "select_k_elbow",
      [](const std::vector<std::pair<std::size_t, double>>& curve) {
        return select_k_elbow(curve);
      },
      py::arg("curve"));

  // ---- evaluation / baselines -----------------------------------------
  m.def(
      "evaluate_f1",
      [](const std::vector<std::string>& pred,
         const std::vector<std::string>& gold) {
        const EvalScores s = evaluate_f1(pred, gold);
        py::dict out;
        out["labels"] = s.labels;
        out["precision"] = s.precision;
        out["recall"] = s.recall;
        out["f1"] = s.f1;
        out["support"] = s.support;
        out["macro_f1"] = s.macro_f1;
        out["weighted_f1"] = s.weighted_f1;
        out["micro_f1"] = s.micro_f1;
        out["accuracy"] = s.accuracy;
        return out;
      },
      py::arg("pred"), py::arg("gold"));
  m.def(
      "random_baseline",
      [](const std::vector<std::string>& gold, const std::string& mode,
         std::size_t trials, std::uint64_t seed) {
        const BaselineMode parsed = mode == "uniform"
                                        ? BaselineMode::Uniform
                                        : BaselineMode::Frequency;
        if (mode != "uniform" && mode != "frequency")
          throw ConfigError("mode must be 'uniform' or 'frequency'");
        const BaselineReport r = random_baseline(gold, parsed, trials, seed);
        py::dict out;
        out["expected_accuracy"] = r.expected_accuracy;
        out["mc_accuracy"] = r.mc_accuracy;
        out["mc_f1_macro"] = r.mc_f1_macro;
        out["label_count"] = r.label_count;
        return out;
      },
      py::arg("gold"), py::arg("mode") = "uniform", py::arg("trials") = 0,
      py::arg("seed") = 0);

  // ---- nearest-neighbor story types ------------------------------------
  m.def(
      "classify_nn_type",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             query,
         const std::vector<std::tuple<std::string, std::vector<double>,
                                      std::string>>& annotated) {
        AnnotatedSet set;
        set.medium = "stories";
        for (const auto& [id, vec, label] : annotated) {
          if (set.items.empty()) set.dim = vec.size();
          set.items.push_back({id, vec, label});
        }
        return classify_nn_type(vector_from_numpy(query), set);
      },
      py::arg("query"), py::arg("annotated"),
      "annotated: list of (id, vector, label) tuples");

  m.attr("__version__") = "0.1.0";
}
