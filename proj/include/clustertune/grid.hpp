#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "clustertune/clustering.hpp"
#include "clustertune/dataset.hpp"
#include "clustertune/metrics.hpp"
#include "clustertune/profiling.hpp"
#include "json.hpp"

namespace clustertune {

using ParamValue = std::variant<std::int64_t, double, std::string>;
using ParamList = std::vector<std::pair<std::string, ParamValue>>;

std::string format_param(const ParamValue& v);
// "k=3;linkage=ward"
std::string format_params(const ParamList& params);

// One config key: an algorithm plus the value list of every parameter, with
// parameters sorted by name.
struct GridEntry {
  std::string key;
  Algorithm algorithm = Algorithm::kmeans;
  std::vector<std::pair<std::string, std::vector<ParamValue>>> params;
};

struct DatasetConfig {
  std::filesystem::path path;
  bool drop_na = false;
  std::vector<std::string> key_features;
};

struct RunConfig {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double min_cluster_fraction = 0.05;
  bool bonferroni = false;
  DatasetConfig dataset;
  std::vector<GridEntry> entries;  // config file order
  nlohmann::ordered_json source;   // parsed document, echoed into the manifest
};

// Parses the JSON run configuration. Relative dataset paths resolve against
// `base_dir`. Throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

struct CandidateSpec {
  std::string candidate_id;  // "<config key>_v<index>"
  std::string config_key;
  Algorithm algorithm = Algorithm::kmeans;
  ParamList params;  // sorted by name, defaults filled in
  std::uint64_t seed = 0;

  const ParamValue* find(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  double get_double(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;
};

// Cartesian product per config key: names in lexicographic order, the last
// name varying fastest, values in listed order.
std::vector<CandidateSpec> expand_grid(const RunConfig& config);

std::uint64_t candidate_seed(std::uint64_t global_seed, std::string_view candidate_id) noexcept;

// Matrix an algorithm is fitted on.
Scaling scaling_for(Algorithm a) noexcept;

// The raw dataset plus the two scaled views, computed once per run.
struct PreparedData {
  explicit PreparedData(Dataset raw);

  Dataset raw;
  Dataset standardized;
  Dataset minmax;

  const Dataset& for_algorithm(Algorithm a) const noexcept;
};

struct EvalSettings {
  double alpha = 0.05;
  double min_cluster_fraction = 0.05;
  bool bonferroni = false;
};

struct CandidateResults {
  ClusterAssignment assignment;
  MetricsRecord metrics;
  ClusterProfile profile;
  GateOutcome gate;
};

struct CandidateReport {
  CandidateSpec spec;
  Scaling scaling = Scaling::raw;
  std::optional<CandidateResults> results;  // exactly one of results / error
  std::optional<std::string> error;
  double timing_ms = 0.0;

  bool ok() const noexcept { return results.has_value(); }
};

// Fits one candidate, computes metrics on the fitted matrix, profiles on
// the raw data and applies the gate. Per-candidate failures land in
// report.error instead of propagating.
CandidateReport run_candidate(const PreparedData& data, const CandidateSpec& spec,
                              const EvalSettings& settings);
CandidateReport run_candidate(const Dataset& raw, const CandidateSpec& spec,
                              const EvalSettings& settings);

struct DatasetSummary {
  std::size_t rows = 0;
  std::vector<std::string> columns;
  std::vector<std::string> key_features;
  std::size_t dropped_rows = 0;
  std::string source_path;
};

struct RunResult {
  std::string run_id;
  std::string created_at;  // ISO-8601 UTC
  RunConfig config;
  DatasetSummary dataset;
  std::vector<CandidateReport> candidates;  // expansion order
  double total_ms = 0.0;
};

// Evaluates every expanded candidate with up to `jobs` worker threads
// (0 = hardware concurrency). Output order does not depend on `jobs`.
RunResult run_all(const Dataset& raw, const RunConfig& config, unsigned jobs = 0,
                  std::size_t dropped_rows = 0);

}  // namespace clustertune
