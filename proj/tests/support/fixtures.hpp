#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "clustertune/dataset.hpp"
#include "clustertune/grid.hpp"
#include "oracles.hpp"

namespace fixtures {

// Three well separated Gaussian blobs, 100 rows each, 5 dims, std 1.
// Centroids are >= 30 apart (>= 30x the within-blob std).
inline oracle::Blobs three_blobs(std::uint64_t seed = 7) {
  return oracle::make_blobs({{30, 0, 0, 10, 0}, {0, 30, 0, 0, 10}, {0, 0, 30, 10, 10}}, 100, 1.0,
                            seed);
}

inline clustertune::Dataset as_dataset(const clustertune::Matrix& m) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < m.cols(); ++c) names.push_back("f" + std::to_string(c));
  return clustertune::Dataset(names, m);
}

inline clustertune::Dataset constant_dataset(std::size_t rows = 40, std::size_t cols = 3) {
  clustertune::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = static_cast<double>(c + 1);
  }
  return as_dataset(m);
}

inline std::string twelve_candidate_config(const std::string& data_path = "data.csv") {
  return R"({"seed": 42, "dataset": {"path": ")" + data_path + R"("},
    "algorithms": {
      "kmeans": {"k": [2, 3, 4, 5]},
      "ahc": {"k": [2, 3, 4], "linkage": ["ward", "complete"]},
      "nmf": {"rank": [2, 3]}}})";
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("clustertune_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline bool same_outcome(const clustertune::CandidateReport& a,
                         const clustertune::CandidateReport& b) {
  if (a.spec.candidate_id != b.spec.candidate_id || a.spec.seed != b.spec.seed) return false;
  if (a.error != b.error || a.ok() != b.ok()) return false;
  if (!a.ok()) return true;
  const auto& x = *a.results;
  const auto& y = *b.results;
  if (x.assignment.labels != y.assignment.labels || x.assignment.objective != y.assignment.objective)
    return false;
  if (x.metrics.silhouette != y.metrics.silhouette ||
      x.metrics.calinski_harabasz != y.metrics.calinski_harabasz ||
      x.metrics.davies_bouldin != y.metrics.davies_bouldin)
    return false;
  if (x.profile.stats.size() != y.profile.stats.size()) return false;
  for (std::size_t i = 0; i < x.profile.stats.size(); ++i) {
    const auto& s = x.profile.stats[i];
    const auto& t = y.profile.stats[i];
    if (s.cluster_mean != t.cluster_mean || s.z_score != t.z_score || s.p_value != t.p_value ||
        s.significant != t.significant)
      return false;
  }
  return x.gate.status == y.gate.status && x.gate.reasons == y.gate.reasons;
}

}  // namespace fixtures
