#include "clustertune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clustertune/errors.hpp"

namespace clustertune {

namespace {

struct Partition {
  std::vector<std::size_t> sizes;  // indexed by label
  std::size_t nonempty = 0;
};

Partition partition_of(const Matrix& data, std::span<const int> labels) {
  if (labels.size() != data.rows()) {
    throw ParameterError("label count " + std::to_string(labels.size()) + " != row count " +
                         std::to_string(data.rows()));
  }
  Partition p;
  for (const int l : labels) {
    if (l < 0) throw ParameterError("negative cluster label");
    const auto idx = static_cast<std::size_t>(l);
    if (idx >= p.sizes.size()) p.sizes.resize(idx + 1, 0);
    ++p.sizes[idx];
  }
  p.nonempty = static_cast<std::size_t>(
      std::count_if(p.sizes.begin(), p.sizes.end(), [](std::size_t s) { return s > 0; }));
  return p;
}

Matrix centroids(const Matrix& data, std::span<const int> labels, const Partition& p) {
  Matrix c(p.sizes.size(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto dst = c.row(static_cast<std::size_t>(labels[i]));
    const auto src = data.row(i);
    for (std::size_t d = 0; d < data.cols(); ++d) dst[d] += src[d];
  }
  for (std::size_t k = 0; k < p.sizes.size(); ++k) {
    if (p.sizes[k] == 0) continue;
    for (auto& v : c.row(k)) v /= static_cast<double>(p.sizes[k]);
  }
  return c;
}

void require_two_clusters(const Partition& p, const char* metric) {
  if (p.nonempty < 2) {
    throw MetricUndefinedError(std::string(metric) + " needs at least 2 clusters, got " +
                               std::to_string(p.nonempty));
  }
}

}  // namespace

double silhouette(const Matrix& data, std::span<const int> labels) {
  const Partition p = partition_of(data, labels);
  require_two_clusters(p, "silhouette");

  const std::size_t n = data.rows();
  const std::size_t kk = p.sizes.size();
  // sums(i, c) = total distance from point i to the members of cluster c.
  Matrix sums(n, kk);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(data.row(i), data.row(j)));
      sums(i, static_cast<std::size_t>(labels[j])) += d;
      sums(j, static_cast<std::size_t>(labels[i])) += d;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (p.sizes[own] < 2) continue;
    const double a = sums(i, own) / static_cast<double>(p.sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kk; ++c) {
      if (c == own || p.sizes[c] == 0) continue;
      b = std::min(b, sums(i, c) / static_cast<double>(p.sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double calinski_harabasz(const Matrix& data, std::span<const int> labels) {
  const Partition p = partition_of(data, labels);
  const std::size_t n = data.rows();
  if (p.nonempty < 2 || p.nonempty > n - 1) {
    throw MetricUndefinedError("calinski_harabasz needs 2 <= k <= n-1, got k=" +
                               std::to_string(p.nonempty) + ", n=" + std::to_string(n));
  }
  const Matrix c = centroids(data, labels, p);

  std::vector<double> grand(data.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < data.cols(); ++d) grand[d] += data(i, d);
  }
  for (auto& g : grand) g /= static_cast<double>(n);

  double between = 0.0;
  for (std::size_t k = 0; k < p.sizes.size(); ++k) {
    if (p.sizes[k] == 0) continue;
    between += static_cast<double>(p.sizes[k]) * squared_distance(c.row(k), grand);
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    within += squared_distance(data.row(i), c.row(static_cast<std::size_t>(labels[i])));
  }
  if (within == 0.0) return std::numeric_limits<double>::infinity();

  const auto k = static_cast<double>(p.nonempty);
  return (between / (k - 1.0)) / (within / (static_cast<double>(n) - k));
}

double davies_bouldin(const Matrix& data, std::span<const int> labels) {
  const Partition p = partition_of(data, labels);
  require_two_clusters(p, "davies_bouldin");
  const Matrix c = centroids(data, labels, p);

  std::vector<double> scatter(p.sizes.size(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    scatter[k] += std::sqrt(squared_distance(data.row(i), c.row(k)));
  }
  for (std::size_t k = 0; k < p.sizes.size(); ++k) {
    if (p.sizes[k] > 0) scatter[k] /= static_cast<double>(p.sizes[k]);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < p.sizes.size(); ++i) {
    if (p.sizes[i] == 0) continue;
    double worst = 0.0;
    for (std::size_t j = 0; j < p.sizes.size(); ++j) {
      if (j == i || p.sizes[j] == 0) continue;
      const double sep = std::sqrt(squared_distance(c.row(i), c.row(j)));
      if (!(sep > 0.0)) {
        throw DegenerateMetricError("davies_bouldin: centroids of clusters " + std::to_string(i) +
                                    " and " + std::to_string(j) + " coincide");
      }
      worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
    }
    total += worst;
  }
  return total / static_cast<double>(p.nonempty);
}

MetricsRecord compute_metrics(const Matrix& data, const ClusterAssignment& assignment) {
  MetricsRecord rec;
  rec.cluster_sizes = assignment.cluster_sizes();
  const auto attempt = [&](std::optional<double>& slot, const char* name, auto&& fn) {
    try {
      slot = fn(data, std::span<const int>(assignment.labels));
    } catch (const MetricUndefinedError& e) {
      rec.notes.push_back(std::string(name) + ": " + e.what());
    } catch (const DegenerateMetricError& e) {
      rec.notes.push_back(std::string(name) + ": " + e.what());
    }
  };
  attempt(rec.silhouette, "silhouette",
          [](const Matrix& m, std::span<const int> l) { return silhouette(m, l); });
  attempt(rec.calinski_harabasz, "calinski_harabasz",
          [](const Matrix& m, std::span<const int> l) { return calinski_harabasz(m, l); });
  attempt(rec.davies_bouldin, "davies_bouldin",
          [](const Matrix& m, std::span<const int> l) { return davies_bouldin(m, l); });
  return rec;
}

}  // namespace clustertune
