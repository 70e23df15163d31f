#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "clustertune/clustering.hpp"
#include "clustertune/errors.hpp"
#include "clustertune/grid.hpp"
#include "clustertune/metrics.hpp"
#include "clustertune/pipeline.hpp"
#include "clustertune/profiling.hpp"
#include "clustertune/reporting.hpp"
#include "clustertune/stats.hpp"

namespace py = pybind11;
using namespace clustertune;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ParameterError("data must be a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Linkage linkage_arg(const std::string& name) {
  const auto l = parse_linkage(name);
  if (!l) throw ParameterError("unknown linkage '" + name + "'");
  return *l;
}

std::vector<std::string> default_columns(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

py::dict stat_dict(const FeatureStat& s) {
  py::dict d;
  d["cluster_id"] = s.cluster_id;
  d["cluster_size"] = s.cluster_size;
  d["feature"] = s.feature;
  d["cluster_mean"] = s.cluster_mean;
  d["population_mean"] = s.population_mean;
  d["z_score"] = s.z_score;
  d["p_value"] = s.p_value;
  d["significant"] = s.significant;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic grid search over clustering hyperparameters.";

  auto base = py::register_exception<Error>(m, "ClustertuneError", PyExc_RuntimeError);
  py::register_exception<IngestionError>(m, "IngestionError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<MetricUndefinedError>(m, "MetricUndefinedError", base.ptr());
  py::register_exception<DegenerateMetricError>(m, "DegenerateMetricError", base.ptr());
  py::register_exception<TestUndefinedError>(m, "TestUndefinedError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<ClusterAssignment>(m, "ClusterAssignment")
      .def_readonly("labels", &ClusterAssignment::labels)
      .def_readonly("k", &ClusterAssignment::k)
      .def_property_readonly("algorithm",
                             [](const ClusterAssignment& a) { return std::string(to_string(a.algorithm)); })
      .def_readonly("objective", &ClusterAssignment::objective)
      .def_readonly("trace", &ClusterAssignment::trace)
      .def_readonly("restart_objectives", &ClusterAssignment::restart_objectives)
      .def_readonly("iterations", &ClusterAssignment::iterations)
      .def_property_readonly("cluster_sizes", &ClusterAssignment::cluster_sizes)
      .def("__repr__", [](const ClusterAssignment& a) {
        return "<ClusterAssignment " + std::string(to_string(a.algorithm)) +
               " k=" + std::to_string(a.k) + ">";
      });

  m.def(
      "kmeans",
      [](const Array& data, int k, std::uint64_t seed, int n_init, int max_iter, double tol) {
        return kmeans(to_matrix(data), {k, seed, n_init, max_iter, tol});
      },
      py::arg("data"), py::arg("k"), py::arg("seed") = 0, py::arg("n_init") = 10,
      py::arg("max_iter") = 300, py::arg("tol") = 1e-4,
      "k-means++ seeded Lloyd iterations; best of n_init restarts.");

  m.def(
      "agglomerative",
      [](const Array& data, int k, const std::string& linkage) {
        return agglomerative(to_matrix(data), k, linkage_arg(linkage));
      },
      py::arg("data"), py::arg("k"), py::arg("linkage") = "ward");

  m.def(
      "nmf",
      [](const Array& data, int rank, std::uint64_t seed, int max_iter, double tol) {
        NmfFactors f;
        auto a = nmf(to_matrix(data), {rank, seed, max_iter, tol}, &f);
        return py::make_tuple(std::move(a), to_array(f.w), to_array(f.h));
      },
      py::arg("data"), py::arg("rank"), py::arg("seed") = 0, py::arg("max_iter") = 500,
      py::arg("tol") = 1e-5, "Returns (assignment, W, H).");

  m.def(
      "silhouette",
      [](const Array& data, const std::vector<int>& labels) { return silhouette(to_matrix(data), labels); },
      py::arg("data"), py::arg("labels"));
  m.def(
      "calinski_harabasz",
      [](const Array& data, const std::vector<int>& labels) {
        return calinski_harabasz(to_matrix(data), labels);
      },
      py::arg("data"), py::arg("labels"));
  m.def(
      "davies_bouldin",
      [](const Array& data, const std::vector<int>& labels) {
        return davies_bouldin(to_matrix(data), labels);
      },
      py::arg("data"), py::arg("labels"));

  m.def("regularized_incomplete_beta", &regularized_incomplete_beta, py::arg("a"), py::arg("b"),
        py::arg("x"));
  m.def("welch_t_test", &welch_t_test, py::arg("mean_a"), py::arg("var_a"), py::arg("n_a"),
        py::arg("mean_b"), py::arg("var_b"), py::arg("n_b"), "Two-sided Welch p-value.");

  m.def(
      "profile_clusters",
      [](const Array& data, const std::vector<int>& labels, int k,
         std::optional<std::vector<std::string>> columns, double alpha, bool bonferroni) {
        const Matrix raw = to_matrix(data);
        const Dataset ds(columns ? *columns : default_columns(raw.cols()), raw);
        ClusterAssignment a;
        a.labels = labels;
        a.k = k;
        if (labels.size() != raw.rows()) throw ParameterError("labels must have one entry per row");
        for (const int l : labels) {
          if (l < 0 || l >= k) throw ParameterError("labels must lie in [0, k)");
        }
        py::list out;
        for (const auto& s : profile_clusters(ds, a, {alpha, bonferroni}).stats) {
          out.append(stat_dict(s));
        }
        return out;
      },
      py::arg("data"), py::arg("labels"), py::arg("k"), py::arg("columns") = py::none(),
      py::arg("alpha") = 0.05, py::arg("bonferroni") = false,
      "Per-cluster, per-feature z-scores and Welch p-values on raw data.");

  m.def(
      "expand_grid",
      [](const std::string& config_json) {
        py::list out;
        for (const auto& spec : expand_grid(parse_config(config_json))) {
          py::dict d;
          d["candidate_id"] = spec.candidate_id;
          d["algorithm"] = std::string(to_string(spec.algorithm));
          d["params"] = format_params(spec.params);
          d["seed"] = spec.seed;
          out.append(d);
        }
        return out;
      },
      py::arg("config_json"), "Candidates a config expands to, in run order.");

  m.def(
      "run",
      [](const std::filesystem::path& config, const std::filesystem::path& out, unsigned jobs,
         std::optional<std::uint64_t> seed) {
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run_inputs(load_run_inputs(config, seed), jobs);
          write_run_outputs(result, out);
        }
        return out / kManifestFile;
      },
      py::arg("config"), py::arg("out"), py::arg("jobs") = 0, py::arg("seed") = py::none(),
      "Runs a grid and writes the output tree; returns the manifest path.");
}
