#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "statetrails/clustering.hpp"
#include "statetrails/ingest.hpp"
#include "statetrails/pipeline.hpp"
#include "statetrails/profiling.hpp"
#include "statetrails/random.hpp"
#include "statetrails/significance.hpp"
#include "statetrails/simgen.hpp"
#include "statetrails/textprep.hpp"

namespace py = pybind11;
using namespace statetrails;

namespace {

std::vector<UserMonthProfile> profiles_from_points(
    const std::vector<std::vector<double>>& points) {
  std::vector<UserMonthProfile> profiles;
  profiles.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != kFeatureCount) {
      throw std::invalid_argument("points must have 15 columns");
    }
    UserMonthProfile p;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%08zu", i);
    p.author_id = buf;
    p.month = 0;
    for (int f = 0; f < kFeatureCount; ++f) p.features[f] = points[i][f];
    p.n_docs = 1;
    profiles.push_back(std::move(p));
  }
  return profiles;
}

}  // namespace

PYBIND11_MODULE(_statetrails, m) {
  m.doc() = "state journeys over temporal interaction graphs (C++ core)";

  m.def("normalize", &normalize, py::arg("text"));
  m.def("tokenize",
        [](const std::string& text) { return tokenize(text); },
        py::arg("cleaned"));
  m.def("pseudonymize", &pseudonymize, py::arg("name"), py::arg("salt"));
  m.def("month_index", &month_index, py::arg("created_utc"),
        py::arg("corpus_start_utc"));
  m.def("zscore", &zscore, py::arg("x"), py::arg("mu"), py::arg("sigma"),
        py::arg("n"));
  m.def("feature_names", []() {
    return std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
  });

  py::class_<LexiconStore>(m, "LexiconStore");
  m.def("load_lexicons",
        [](const std::string& dir) { return load_lexicons(dir, nullptr); },
        py::arg("dir"));
  m.def(
      "score_text",
      [](const std::string& text, const LexiconStore& lex) {
        const FeatureVector v = score_text(normalize(text), lex);
        py::dict out;
        for (int f = 0; f < kFeatureCount; ++f) out[kFeatureNames[f]] = v[f];
        return out;
      },
      py::arg("text"), py::arg("lexicons"));

  m.def(
      "kmeans",
      [](const std::vector<std::vector<double>>& points, int k,
         std::uint64_t seed) {
        const auto profiles = profiles_from_points(points);
        const ClusterModel model = kmeans(profiles, k, seed);
        std::vector<int> labels(points.size());
        for (std::size_t i = 0; i < profiles.size(); ++i) {
          labels[i] = *model.assignments.label(profiles[i].author_id, 0);
        }
        std::vector<std::vector<double>> centroids;
        for (const auto& c : model.centroids) {
          centroids.emplace_back(c.begin(), c.end());
        }
        py::dict out;
        out["labels"] = labels;
        out["centroids"] = centroids;
        out["inertia"] = model.inertia;
        return out;
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  m.def(
      "elbow",
      [](const std::vector<std::vector<double>>& points,
         const std::vector<int>& ks, std::uint64_t seed) {
        const ElbowCurve curve = elbow(profiles_from_points(points), ks, seed);
        py::dict out;
        out["ks"] = curve.ks;
        out["inertias"] = curve.inertias;
        out["chosen_k"] = curve.chosen_k;
        return out;
      },
      py::arg("points"), py::arg("ks"), py::arg("seed") = 0);

  m.def(
      "simulate",
      [](const std::string& config_path, const std::string& out_dir) {
        SimConfig config = config_path.empty()
                               ? SimConfig{}
                               : SimConfig::from_json_file(config_path);
        if (config_path.empty()) config.finalize();
        write_sim_corpus(simulate(config), config, out_dir);
      },
      py::arg("config_path"), py::arg("out_dir"));

  m.def(
      "run_pipeline",
      [](const std::string& config_path, const std::string& out_dir) {
        PipelineConfig config = PipelineConfig::from_json_file(config_path);
        if (!out_dir.empty()) config.out_dir = out_dir;
        return run_pipeline(config).manifest_path;
      },
      py::arg("config_path"), py::arg("out_dir") = "");
}
