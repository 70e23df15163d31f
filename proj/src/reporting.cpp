#include "clustertune/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "clustertune/errors.hpp"

namespace clustertune {

namespace fs = std::filesystem;

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", v);
  return buf;
}

fs::path profile_csv_path(const std::string& candidate_id) {
  return fs::path("candidates") / candidate_id / "profile.csv";
}

fs::path chart_svg_path(const std::string& candidate_id) {
  return fs::path("plots") / (candidate_id + ".svg");
}

std::size_t significant_feature_count(const ClusterProfile& profile) {
  std::set<std::string> names;
  for (const auto& s : profile.stats) {
    if (s.significant) names.insert(s.feature);
  }
  return names.size();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

const CandidateResults& require_results(const CandidateReport& report) {
  if (!report.results) {
    throw ParameterError("candidate " + report.spec.candidate_id + " has no results");
  }
  return *report.results;
}

std::string join_reasons(const GateOutcome& g) {
  std::string out;
  for (const auto r : g.reasons) {
    if (!out.empty()) out += ';';
    out += to_string(r);
  }
  return out;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

nlohmann::ordered_json metric_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fixed2(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

}  // namespace

fs::path write_candidate_csv(const CandidateReport& report, const fs::path& out_dir) {
  const auto& r = require_results(report);
  std::string csv =
      "cluster_id,cluster_size,feature,cluster_mean,population_mean,z_score,p_value,significant\n";
  for (const auto& s : r.profile.stats) {
    csv += std::to_string(s.cluster_id) + ',' + std::to_string(s.cluster_size) + ',' + s.feature +
           ',' + format_real(s.cluster_mean) + ',' + format_real(s.population_mean) + ',' +
           format_real(s.z_score) + ',' + format_real(s.p_value) + ',' +
           (s.significant ? "true" : "false") + '\n';
  }
  const fs::path rel = profile_csv_path(report.spec.candidate_id);
  write_file(out_dir / rel, csv);
  return out_dir / rel;
}

std::vector<fs::path> write_summary_csvs(const RunResult& result, const fs::path& out_dir) {
  std::string metrics =
      "candidate_id,algorithm,params,status,silhouette,calinski_harabasz,davies_bouldin,"
      "n_clusters,min_size,max_size,n_significant_features,gate_status,gate_reasons\n";
  std::string significant = "candidate_id,cluster_id,feature,z_score,p_value\n";
  std::string sizes = "candidate_id,cluster_id,size\n";

  for (const auto& c : result.candidates) {
    const std::string& id = c.spec.candidate_id;
    metrics += id + ',' + std::string(to_string(c.spec.algorithm)) + ',' +
               format_params(c.spec.params) + ',';
    if (!c.results) {
      metrics += "error,,,,,,,,,\n";
      continue;
    }
    const auto& r = *c.results;
    const auto& sz = r.metrics.cluster_sizes;
    const auto [lo, hi] = std::minmax_element(sz.begin(), sz.end());
    metrics += "ok," + optional_real(r.metrics.silhouette) + ',' +
               optional_real(r.metrics.calinski_harabasz) + ',' +
               optional_real(r.metrics.davies_bouldin) + ',' + std::to_string(r.assignment.k) +
               ',' + std::to_string(*lo) + ',' + std::to_string(*hi) + ',' +
               std::to_string(significant_feature_count(r.profile)) + ',' +
               std::string(to_string(r.gate.status)) + ',' + join_reasons(r.gate) + '\n';
    for (const auto& s : r.profile.stats) {
      if (!s.significant) continue;
      significant += id + ',' + std::to_string(s.cluster_id) + ',' + s.feature + ',' +
                     format_real(s.z_score) + ',' + format_real(s.p_value) + '\n';
    }
    for (std::size_t k = 0; k < sz.size(); ++k) {
      sizes += id + ',' + std::to_string(k) + ',' + std::to_string(sz[k]) + '\n';
    }
  }

  const std::vector<std::pair<const char*, const std::string*>> files = {
      {"metrics.csv", &metrics}, {"significant_features.csv", &significant}, {"sizes.csv", &sizes}};
  std::vector<fs::path> paths;
  for (const auto& [name, content] : files) {
    const fs::path p = out_dir / "summary" / name;
    write_file(p, *content);
    paths.push_back(p);
  }
  return paths;
}

std::string zscore_chart_svg(const CandidateReport& report,
                             const std::vector<std::string>& key_features) {
  const auto& r = require_results(report);
  if (key_features.empty()) throw ConfigError("chart needs at least one key feature");

  // Key features in dataset column order (the order the profile lists them).
  std::vector<std::string> features;
  for (const auto& s : r.profile.stats) {
    if (s.cluster_id != 0) break;
    if (std::find(key_features.begin(), key_features.end(), s.feature) != key_features.end()) {
      features.push_back(s.feature);
    }
  }
  for (const auto& k : key_features) {
    if (std::find(features.begin(), features.end(), k) == features.end()) {
      throw ConfigError("key feature '" + k + "' is not in the profile of " +
                        report.spec.candidate_id);
    }
  }

  const int k = r.assignment.k;
  const std::size_t n_features = r.profile.stats.size() / static_cast<std::size_t>(k);
  const auto stat_for = [&](int cluster, const std::string& feature) -> const FeatureStat& {
    const auto begin = r.profile.stats.begin() + static_cast<std::ptrdiff_t>(cluster * n_features);
    return *std::find_if(begin, begin + static_cast<std::ptrdiff_t>(n_features),
                         [&](const FeatureStat& s) { return s.feature == feature; });
  };

  double max_abs = 0.0;
  for (int c = 0; c < k; ++c) {
    for (const auto& f : features) max_abs = std::max(max_abs, std::abs(stat_for(c, f).z_score));
  }
  const double y_max = std::max(1.0, std::ceil(max_abs));
  const double step = y_max <= 5.0 ? 1.0 : std::ceil(y_max / 5.0);

  constexpr double width = 960, height = 480;
  constexpr double left = 70, right = 810, top = 50, bottom = 380;
  const double zero_y = (top + bottom) / 2.0;
  const double half = (bottom - top) / 2.0;
  const auto y_of = [&](double z) { return zero_y - z / y_max * half; };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width="960" height="480" viewBox="0 0 )"
      << width << ' ' << height << "\">\n";
  svg << R"(<rect x="0" y="0" width="960" height="480" fill="#ffffff"/>)" << '\n';
  svg << R"(<text x="480" y="28" text-anchor="middle" font-family="sans-serif" font-size="18">)"
      << xml_escape(report.spec.candidate_id) << ": cluster mean z-scores</text>\n";

  // y grid and ticks
  for (double t = -y_max; t <= y_max + 1e-9; t += step) {
    const std::string y = fixed2(y_of(t));
    svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right << "\" y2=\"" << y
        << R"(" stroke="#e0e0e0" stroke-width="1"/>)" << '\n';
    svg << "<text x=\"" << left - 8 << "\" y=\"" << fixed2(y_of(t) + 4)
        << R"(" text-anchor="end" font-family="sans-serif" font-size="11">)" << fixed2(t)
        << "</text>\n";
  }
  svg << R"(<text x="18" y=")" << fixed2(zero_y)
      << R"(" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 )"
      << fixed2(zero_y) << ")\">z-score (population std)</text>\n";

  const double group_w = (right - left) / static_cast<double>(features.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(k);
  for (std::size_t g = 0; g < features.size(); ++g) {
    const double gx = left + group_w * static_cast<double>(g) + group_w * 0.1;
    for (int c = 0; c < k; ++c) {
      const auto& s = stat_for(c, features[g]);
      const double x = gx + bar_w * c;
      const double y_val = y_of(s.z_score);
      const double y = std::min(y_val, zero_y);
      const double h = std::abs(y_val - zero_y);
      svg << "<rect class=\"bar\" data-cluster=\"" << c << "\" data-feature=\""
          << xml_escape(s.feature) << "\" x=\"" << fixed2(x) << "\" y=\"" << fixed2(y)
          << "\" width=\"" << fixed2(bar_w) << "\" height=\"" << fixed2(h) << "\" fill=\""
          << kPalette[static_cast<std::size_t>(c) % std::size(kPalette)] << "\"/>\n";
      if (s.significant) {
        const double ty = s.z_score >= 0 ? y - 4 : y + h + 14;
        svg << "<text class=\"sig\" x=\"" << fixed2(x + bar_w / 2) << "\" y=\"" << fixed2(ty)
            << R"(" text-anchor="middle" font-family="sans-serif" font-size="14">*</text>)"
            << '\n';
      }
    }
    const double lx = left + group_w * (static_cast<double>(g) + 0.5);
    svg << "<text x=\"" << fixed2(lx) << "\" y=\"" << bottom + 16
        << R"(" text-anchor="end" font-family="sans-serif" font-size="12" transform="rotate(-30 )"
        << fixed2(lx) << ' ' << bottom + 16 << ")\">" << xml_escape(features[g]) << "</text>\n";
  }

  svg << "<line class=\"zero\" x1=\"" << left << "\" y1=\"" << fixed2(zero_y) << "\" x2=\""
      << right << "\" y2=\"" << fixed2(zero_y) << R"(" stroke="#000000" stroke-width="1.5"/>)"
      << '\n';

  for (int c = 0; c < k; ++c) {
    const double ly = top + 20.0 * c;
    svg << "<rect class=\"legend\" x=\"830\" y=\"" << fixed2(ly)
        << R"(" width="14" height="14" fill=")"
        << kPalette[static_cast<std::size_t>(c) % std::size(kPalette)] << "\"/>\n";
    svg << "<text x=\"850\" y=\"" << fixed2(ly + 11)
        << R"(" font-family="sans-serif" font-size="12">cluster )" << c << "</text>\n";
  }
  svg << R"(<text x="830" y=")" << fixed2(top + 20.0 * k + 16)
      << R"(" font-family="sans-serif" font-size="11">* p &lt; )"
      << format_real(r.profile.effective_alpha) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

fs::path render_zscore_chart(const CandidateReport& report,
                             const std::vector<std::string>& key_features, const fs::path& out_dir) {
  const std::string svg = zscore_chart_svg(report, key_features);
  const fs::path p = out_dir / chart_svg_path(report.spec.candidate_id);
  write_file(p, svg);
  return p;
}

nlohmann::ordered_json manifest_json(const RunResult& result) {
  using nlohmann::ordered_json;
  ordered_json m;
  m["schema_version"] = 1;
  m["run_id"] = result.run_id;
  m["created_at"] = result.created_at;

  ordered_json scaling;
  for (const auto a : {Algorithm::kmeans, Algorithm::ahc, Algorithm::nmf}) {
    scaling[std::string(to_string(a))] = std::string(to_string(scaling_for(a)));
  }
  m["dataset"] = {{"path", result.dataset.source_path},
                  {"rows", result.dataset.rows},
                  {"columns", result.dataset.columns},
                  {"key_features", result.dataset.key_features},
                  {"dropped_rows", result.dataset.dropped_rows},
                  {"scaling", scaling}};
  m["settings"] = {{"seed", std::to_string(result.config.seed)},
                   {"alpha", result.config.alpha},
                   {"min_cluster_fraction", result.config.min_cluster_fraction},
                   {"bonferroni", result.config.bonferroni}};
  m["config"] = result.config.source;
  m["summary"] = {{"metrics", "summary/metrics.csv"},
                  {"significant_features", "summary/significant_features.csv"},
                  {"sizes", "summary/sizes.csv"}};
  m["total_ms"] = result.total_ms;

  ordered_json candidates = ordered_json::array();
  for (const auto& c : result.candidates) {
    ordered_json e;
    e["candidate_id"] = c.spec.candidate_id;
    e["config_key"] = c.spec.config_key;
    e["algorithm"] = std::string(to_string(c.spec.algorithm));
    ordered_json params = ordered_json::object();
    for (const auto& [name, value] : c.spec.params) {
      std::visit([&](const auto& v) { params[name] = v; }, value);
    }
    e["params"] = params;
    e["seed"] = std::to_string(c.spec.seed);
    e["scaling"] = std::string(to_string(c.scaling));
    e["status"] = c.ok() ? "ok" : "error";
    e["error"] = c.error ? ordered_json(*c.error) : ordered_json(nullptr);
    if (c.results) {
      const auto& r = *c.results;
      ordered_json reasons = ordered_json::array();
      for (const auto reason : r.gate.reasons) reasons.push_back(std::string(to_string(reason)));
      e["gate"] = {{"status", std::string(to_string(r.gate.status))},
                   {"reasons", reasons},
                   {"notes", r.gate.notes}};
      e["metrics"] = {{"silhouette", metric_json(r.metrics.silhouette)},
                      {"calinski_harabasz", metric_json(r.metrics.calinski_harabasz)},
                      {"davies_bouldin", metric_json(r.metrics.davies_bouldin)}};
      e["k"] = r.assignment.k;
      e["sizes"] = r.metrics.cluster_sizes;
      e["objective"] = r.assignment.objective;
      e["iterations"] = r.assignment.iterations;
      e["n_significant_features"] = significant_feature_count(r.profile);
      e["effective_alpha"] = r.profile.effective_alpha;
      e["profile_csv"] = profile_csv_path(c.spec.candidate_id).generic_string();
      e["chart_svg"] = chart_svg_path(c.spec.candidate_id).generic_string();
    } else {
      e["gate"] = nullptr;
      e["metrics"] = nullptr;
      e["k"] = nullptr;
      e["sizes"] = nullptr;
      e["objective"] = nullptr;
      e["iterations"] = nullptr;
      e["n_significant_features"] = nullptr;
      e["effective_alpha"] = nullptr;
      e["profile_csv"] = nullptr;
      e["chart_svg"] = nullptr;
    }
    e["timing_ms"] = c.timing_ms;
    candidates.push_back(std::move(e));
  }
  m["candidates"] = std::move(candidates);
  return m;
}

fs::path write_manifest(const RunResult& result, const fs::path& out_dir) {
  const fs::path p = out_dir / kManifestFile;
  write_file(p, manifest_json(result).dump(2) + "\n");
  return p;
}

RunOutputs write_run_outputs(const RunResult& result, const fs::path& out_dir) {
  RunOutputs out;
  for (const auto& c : result.candidates) {
    if (!c.ok()) continue;
    out.profiles.push_back(write_candidate_csv(c, out_dir));
    out.charts.push_back(render_zscore_chart(c, result.dataset.key_features, out_dir));
  }
  out.summaries = write_summary_csvs(result, out_dir);
  out.manifest = write_manifest(result, out_dir);
  return out;
}

}  // namespace clustertune
