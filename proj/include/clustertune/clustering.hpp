#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clustertune/matrix.hpp"

namespace clustertune {

enum class Algorithm { kmeans, ahc, nmf };
enum class Linkage { ward, complete, average, single };

std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(Linkage l) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view s) noexcept;
std::optional<Linkage> parse_linkage(std::string_view s) noexcept;

struct ClusterAssignment {
  std::vector<int> labels;  // one entry per row, each in [0, k)
  int k = 0;
  Algorithm algorithm = Algorithm::kmeans;
  // k-means: inertia; AHC: height of the final merge; NMF: ||V - WH||^2.
  double objective = 0.0;

  // Diagnostics. k-means: inertia after every assignment step of the winning
  // restart. AHC: every merge height in order. NMF: objective per iteration,
  // starting with the initial factors.
  std::vector<double> trace;
  // k-means only: final inertia of every restart.
  std::vector<double> restart_objectives;
  int iterations = 0;

  std::vector<std::size_t> cluster_sizes() const;
  bool has_empty_cluster() const;
};

struct KMeansParams {
  int k = 2;
  std::uint64_t seed = 0;
  int n_init = 10;
  int max_iter = 300;
  double tol = 1e-4;
};

// Lloyd iterations from k-means++ seeds, best of n_init restarts by inertia.
ClusterAssignment kmeans(const Matrix& data, const KMeansParams& params);

// Bottom-up merging with Lance-Williams updates over a full distance matrix.
// Labels are numbered by first appearance in row order.
ClusterAssignment agglomerative(const Matrix& data, int k, Linkage linkage);

struct NmfParams {
  int rank = 2;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double tol = 1e-5;
};

struct NmfFactors {
  Matrix w;  // rows x rank
  Matrix h;  // rank x cols
};

// Multiplicative updates for ||V - WH||^2; each row is labelled with the
// index of its largest W entry (lowest index on ties).
ClusterAssignment nmf(const Matrix& data, const NmfParams& params, NmfFactors* factors = nullptr);

}  // namespace clustertune
