#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clustertune/grid.hpp"
#include "json.hpp"

namespace clustertune {

// Fixed six-significant-digit rendering used by every CSV ("%#.6g");
// infinities render as "inf" / "-inf".
std::string format_real(double v);

// Relative locations inside a run directory.
std::filesystem::path profile_csv_path(const std::string& candidate_id);
std::filesystem::path chart_svg_path(const std::string& candidate_id);
inline const std::filesystem::path kManifestFile = "manifest.json";
inline const std::filesystem::path kDecisionsFile = "decisions.json";

// Distinct features significant in at least one cluster.
std::size_t significant_feature_count(const ClusterProfile& profile);

// candidates/<id>/profile.csv. Throws ParameterError when the report has no
// results and IoError when the file cannot be written.
std::filesystem::path write_candidate_csv(const CandidateReport& report,
                                          const std::filesystem::path& out_dir);

// summary/metrics.csv, summary/significant_features.csv, summary/sizes.csv.
std::vector<std::filesystem::path> write_summary_csvs(const RunResult& result,
                                                      const std::filesystem::path& out_dir);

// Grouped bar chart of cluster z-scores over the key features, as SVG text.
// Throws ConfigError when a key feature is missing from the profile.
std::string zscore_chart_svg(const CandidateReport& report,
                             const std::vector<std::string>& key_features);

// plots/<id>.svg
std::filesystem::path render_zscore_chart(const CandidateReport& report,
                                          const std::vector<std::string>& key_features,
                                          const std::filesystem::path& out_dir);

nlohmann::ordered_json manifest_json(const RunResult& result);

// manifest.json (schema_version 1); paths inside are relative to out_dir.
std::filesystem::path write_manifest(const RunResult& result, const std::filesystem::path& out_dir);

struct RunOutputs {
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> profiles;
  std::vector<std::filesystem::path> charts;
  std::vector<std::filesystem::path> summaries;
};

// Writes the whole output tree: per-candidate artifacts, summaries, manifest.
RunOutputs write_run_outputs(const RunResult& result, const std::filesystem::path& out_dir);

}  // namespace clustertune
