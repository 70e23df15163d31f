#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clustertune/clustering.hpp"
#include "clustertune/matrix.hpp"

namespace clustertune {

// Internal validation indices. Every function counts only clusters that have
// at least one member, so a declared-but-empty cluster does not enter k.

// Mean silhouette over all points; singletons contribute 0.
// Throws MetricUndefinedError with fewer than 2 clusters.
double silhouette(const Matrix& data, std::span<const int> labels);

// (B / (k-1)) / (W / (n-k)); +infinity when W = 0.
// Throws MetricUndefinedError unless 2 <= k <= n-1.
double calinski_harabasz(const Matrix& data, std::span<const int> labels);

// Mean over clusters of max_{j != i} (S_i + S_j) / M_ij.
// Throws MetricUndefinedError with fewer than 2 clusters and
// DegenerateMetricError when two centroids coincide.
double davies_bouldin(const Matrix& data, std::span<const int> labels);

inline double silhouette(const Matrix& data, const ClusterAssignment& a) {
  return silhouette(data, a.labels);
}
inline double calinski_harabasz(const Matrix& data, const ClusterAssignment& a) {
  return calinski_harabasz(data, a.labels);
}
inline double davies_bouldin(const Matrix& data, const ClusterAssignment& a) {
  return davies_bouldin(data, a.labels);
}

struct MetricsRecord {
  std::optional<double> silhouette;
  std::optional<double> calinski_harabasz;  // may hold +infinity
  std::optional<double> davies_bouldin;
  std::vector<std::size_t> cluster_sizes;
  // One entry per metric that could not be computed, e.g. "davies_bouldin: ...".
  std::vector<std::string> notes;

  bool degenerate() const noexcept { return !notes.empty(); }
};

// Computes all three indices, converting metric errors into notes.
MetricsRecord compute_metrics(const Matrix& data, const ClusterAssignment& assignment);

}  // namespace clustertune
