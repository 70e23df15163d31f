#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clustertune/clustering.hpp"
#include "clustertune/dataset.hpp"

namespace clustertune {

struct FeatureStat {
  int cluster_id = 0;
  std::size_t cluster_size = 0;
  std::string feature;
  double cluster_mean = 0.0;     // raw units
  double population_mean = 0.0;  // raw units
  double z_score = 0.0;          // population standard deviations
  double p_value = 1.0;
  bool significant = false;
};

struct ProfileSettings {
  double alpha = 0.05;
  // Divide alpha by the number of (cluster, feature) tests.
  bool bonferroni = false;
};

struct ClusterProfile {
  std::vector<FeatureStat> stats;  // ordered by (cluster_id, column order)
  double effective_alpha = 0.05;
  // Clusters whose significance test was undefined (size or complement < 2).
  std::vector<std::string> notes;

  std::size_t significant_count() const;
};

// Per-cluster, per-feature profile against the whole population. Each
// cluster is compared with all non-members by a two-sided Welch test.
// `raw` should be the unscaled dataset so means stay in original units.
ClusterProfile profile_clusters(const Dataset& raw, const ClusterAssignment& assignment,
                                const ProfileSettings& settings = {});

enum class GateStatus { pass, ruled_out };
enum class GateReason { no_significant_features, empty_cluster, cluster_below_min_fraction,
                        metric_degenerate };

std::string_view to_string(GateStatus s) noexcept;
std::string_view to_string(GateReason r) noexcept;

struct GateOutcome {
  GateStatus status = GateStatus::pass;
  std::vector<GateReason> reasons;  // nonempty iff ruled_out, in enum order
  std::vector<std::string> notes;

  bool has(GateReason r) const;
};

// Rules a candidate out when no feature is significant, a cluster is empty or
// smaller than min_fraction * rows, or a metric degenerated.
// min_fraction is expected in [0, 0.5).
GateOutcome meta_gate(const std::vector<FeatureStat>& stats, const std::vector<std::size_t>& sizes,
                      std::size_t rows, double min_fraction, bool metric_degenerate,
                      std::vector<std::string> notes = {});

}  // namespace clustertune
