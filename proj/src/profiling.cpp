#include "clustertune/profiling.hpp"

#include <algorithm>
#include <cmath>

#include "clustertune/errors.hpp"
#include "clustertune/stats.hpp"

namespace clustertune {

std::size_t ClusterProfile::significant_count() const {
  return static_cast<std::size_t>(
      std::count_if(stats.begin(), stats.end(), [](const FeatureStat& s) { return s.significant; }));
}

std::string_view to_string(GateStatus s) noexcept {
  return s == GateStatus::pass ? "pass" : "ruled_out";
}

std::string_view to_string(GateReason r) noexcept {
  switch (r) {
    case GateReason::no_significant_features:
      return "no_significant_features";
    case GateReason::empty_cluster:
      return "empty_cluster";
    case GateReason::cluster_below_min_fraction:
      return "cluster_below_min_fraction";
    case GateReason::metric_degenerate:
      return "metric_degenerate";
  }
  return "metric_degenerate";
}

bool GateOutcome::has(GateReason r) const {
  return std::find(reasons.begin(), reasons.end(), r) != reasons.end();
}

namespace {

struct SampleStats {
  double mean = 0.0;
  double var = 0.0;  // sample variance, n-1
  std::size_t n = 0;
};

}  // namespace

ClusterProfile profile_clusters(const Dataset& raw, const ClusterAssignment& assignment,
                                const ProfileSettings& settings) {
  if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) {
    throw ParameterError("alpha must be in (0, 1)");
  }
  const Matrix& x = raw.values();
  const std::size_t n = x.rows();
  if (assignment.labels.size() != n) throw ParameterError("label count does not match rows");

  const auto sizes = assignment.cluster_sizes();
  const std::size_t k = sizes.size();
  ClusterProfile out;
  out.effective_alpha =
      settings.bonferroni ? settings.alpha / static_cast<double>(k * x.cols()) : settings.alpha;

  std::vector<bool> testable(k, true);
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] < 2 || n - sizes[c] < 2) {
      testable[c] = false;
      out.notes.push_back("test undefined for cluster " + std::to_string(c) + " (size " +
                          std::to_string(sizes[c]) + ", complement " +
                          std::to_string(n - sizes[c]) + ")");
    }
  }

  // stats laid out [cluster][feature]
  out.stats.resize(k * x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    double sum = 0.0;
    double max_abs = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += x(r, f);
      max_abs = std::max(max_abs, std::abs(x(r, f)));
    }
    const double pop_mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (x(r, f) - pop_mean) * (x(r, f) - pop_mean);
    const double pop_std = std::sqrt(ss / static_cast<double>(n));
    const bool constant = !(pop_std > 1e-13 * max_abs);

    std::vector<double> member_sum(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      member_sum[static_cast<std::size_t>(assignment.labels[r])] += x(r, f);
    }

    for (std::size_t c = 0; c < k; ++c) {
      FeatureStat& s = out.stats[c * x.cols() + f];
      s.cluster_id = static_cast<int>(c);
      s.cluster_size = sizes[c];
      s.feature = raw.columns()[f];
      s.population_mean = pop_mean;
      if (sizes[c] == 0) {
        s.cluster_mean = pop_mean;
        continue;
      }

      SampleStats in{member_sum[c] / static_cast<double>(sizes[c]), 0.0, sizes[c]};
      SampleStats rest{0.0, 0.0, n - sizes[c]};
      if (rest.n > 0) rest.mean = (sum - member_sum[c]) / static_cast<double>(rest.n);
      s.cluster_mean = in.mean;
      if (constant) continue;

      s.z_score = (in.mean - pop_mean) / pop_std;
      if (!testable[c]) continue;

      for (std::size_t r = 0; r < n; ++r) {
        const bool member = static_cast<std::size_t>(assignment.labels[r]) == c;
        const double d = x(r, f) - (member ? in.mean : rest.mean);
        (member ? in.var : rest.var) += d * d;
      }
      in.var /= static_cast<double>(in.n - 1);
      rest.var /= static_cast<double>(rest.n - 1);
      s.p_value = welch_t_test(in.mean, in.var, in.n, rest.mean, rest.var, rest.n);
      s.significant = s.p_value < out.effective_alpha;
    }
  }
  return out;
}

GateOutcome meta_gate(const std::vector<FeatureStat>& stats, const std::vector<std::size_t>& sizes,
                      std::size_t rows, double min_fraction, bool metric_degenerate,
                      std::vector<std::string> notes) {
  GateOutcome g;
  g.notes = std::move(notes);
  const bool any_significant =
      std::any_of(stats.begin(), stats.end(), [](const FeatureStat& s) { return s.significant; });
  if (!any_significant) g.reasons.push_back(GateReason::no_significant_features);
  if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
    g.reasons.push_back(GateReason::empty_cluster);
  }
  const double floor = min_fraction * static_cast<double>(rows);
  if (std::any_of(sizes.begin(), sizes.end(),
                  [floor](std::size_t s) { return static_cast<double>(s) < floor; })) {
    g.reasons.push_back(GateReason::cluster_below_min_fraction);
  }
  if (metric_degenerate) g.reasons.push_back(GateReason::metric_degenerate);
  g.status = g.reasons.empty() ? GateStatus::pass : GateStatus::ruled_out;
  return g;
}

}  // namespace clustertune
