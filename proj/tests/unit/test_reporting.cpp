#include <fstream>
#include <regex>
#include <sstream>

#include "../support/fixtures.hpp"
#include "clustertune/errors.hpp"
#include "clustertune/reporting.hpp"
#include "doctest.h"

using namespace clustertune;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

RunConfig small_config(const std::string& algorithms) {
  return parse_config(R"({"seed": 5, "dataset": {"path": "d.csv"}, "algorithms": )" + algorithms +
                      "}");
}

// Hand-built report: 2 clusters x 3 features.
CandidateReport handmade_report() {
  CandidateReport rep;
  rep.spec.candidate_id = "kmeans_v0";
  rep.spec.config_key = "kmeans";
  rep.spec.params = {{"k", std::int64_t{2}}};
  CandidateResults res;
  res.assignment.labels = {0, 0, 1, 1};
  res.assignment.k = 2;
  res.metrics.cluster_sizes = {2, 2};
  const char* names[] = {"a", "b", "c"};
  for (int c = 0; c < 2; ++c) {
    for (int f = 0; f < 3; ++f) {
      FeatureStat s;
      s.cluster_id = c;
      s.cluster_size = 2;
      s.feature = names[f];
      s.cluster_mean = 2.5;
      s.population_mean = 2.0;
      s.z_score = 1.0;
      s.p_value = 0.008;
      s.significant = true;
      res.profile.stats.push_back(s);
    }
  }
  rep.results = res;
  return rep;
}

}  // namespace

TEST_CASE("format_real uses six significant digits") {
  CHECK(format_real(1.0) == "1.00000");
  CHECK(format_real(0.008) == "0.00800000");
  CHECK(format_real(-0.0) == "0.00000");
  CHECK(format_real(123456789.0) == "1.23457e+08");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("profile csv layout and determinism") {
  const auto dir = fixtures::temp_dir("profile_csv");
  const auto rep = handmade_report();
  const auto path = write_candidate_csv(rep, dir);
  CHECK(path == dir / "candidates" / "kmeans_v0" / "profile.csv");
  const auto text = slurp(path);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] ==
        "cluster_id,cluster_size,feature,cluster_mean,population_mean,z_score,p_value,significant");
  CHECK(lines[1] == "0,2,a,2.50000,2.00000,1.00000,0.00800000,true");
  CHECK(lines[6].rfind("1,2,c,", 0) == 0);
  write_candidate_csv(rep, dir);
  CHECK(slurp(path) == text);

  CandidateReport failed;
  failed.spec.candidate_id = "x";
  failed.error = "boom";
  CHECK_THROWS_AS(write_candidate_csv(failed, dir), ParameterError);
}

TEST_CASE("unwritable output is an I/O error") {
  const auto dir = fixtures::temp_dir("unwritable");
  std::ofstream(dir / "candidates") << "a file, not a directory";
  CHECK_THROWS_AS(write_candidate_csv(handmade_report(), dir), IoError);
}

TEST_CASE("summary csvs cover every candidate") {
  const auto blobs = fixtures::three_blobs();
  const auto data = fixtures::as_dataset(blobs.data);
  const auto result = run_all(data, parse_config(fixtures::twelve_candidate_config()), 2);
  const auto dir = fixtures::temp_dir("summary");
  const auto paths = write_summary_csvs(result, dir);
  REQUIRE(paths.size() == 3);
  const auto metrics = lines_of(slurp(dir / "summary" / "metrics.csv"));
  REQUIRE(metrics.size() == 13);
  CHECK(metrics[0] ==
        "candidate_id,algorithm,params,status,silhouette,calinski_harabasz,davies_bouldin,"
        "n_clusters,min_size,max_size,n_significant_features,gate_status,gate_reasons");
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(metrics[i + 1].rfind(result.candidates[i].spec.candidate_id + ",", 0) == 0);
  }
  const auto sizes = lines_of(slurp(dir / "summary" / "sizes.csv"));
  std::size_t expected = 1;
  for (const auto& c : result.candidates) expected += c.results->metrics.cluster_sizes.size();
  CHECK(sizes.size() == expected);
  const auto before = slurp(dir / "summary" / "metrics.csv");
  write_summary_csvs(result, dir);
  CHECK(slurp(dir / "summary" / "metrics.csv") == before);
}

TEST_CASE("summary handles ruled out, failed and degenerate candidates") {
  // two exact duplicates per cluster: within-cluster dispersion is zero
  Matrix m(6, 2);
  for (std::size_t r = 0; r < 6; ++r) {
    m(r, 0) = r < 3 ? 0.0 : 10.0;
    m(r, 1) = r < 3 ? 1.0 : -4.0;
  }
  const auto ch_inf = run_all(fixtures::as_dataset(m), small_config(R"({"kmeans": {"k": [2]}})"), 1);
  const auto constant =
      run_all(fixtures::constant_dataset(), small_config(R"({"ahc": {"k": [2]}})"), 1);
  const auto failing =
      run_all(fixtures::constant_dataset(), small_config(R"({"kmeans": {"k": [99]}})"), 1);

  const auto dir = fixtures::temp_dir("summary_edge");
  write_summary_csvs(ch_inf, dir);
  auto rows = lines_of(slurp(dir / "summary" / "metrics.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].find(",inf,") != std::string::npos);

  write_summary_csvs(constant, dir);
  rows = lines_of(slurp(dir / "summary" / "metrics.csv"));
  CHECK(rows[1].find("ruled_out,no_significant_features") != std::string::npos);
  CHECK(lines_of(slurp(dir / "summary" / "significant_features.csv")).size() == 1);

  write_summary_csvs(failing, dir);
  rows = lines_of(slurp(dir / "summary" / "metrics.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].find(",error,,,,,,,,,") != std::string::npos);
}

TEST_CASE("z-score chart structure") {
  const auto data = fixtures::as_dataset(fixtures::three_blobs().data);
  const auto specs = expand_grid(small_config(R"({"kmeans": {"k": [3]}})"));
  const auto rep = run_candidate(data, specs[0], {});
  const auto svg = zscore_chart_svg(rep, data.key_features());
  CHECK(svg.find(R"(width="960" height="480")") != std::string::npos);
  CHECK(count_of(svg, R"(class="bar")") == 15);
  CHECK(count_of(svg, R"(class="zero")") == 1);
  for (int c = 0; c < 3; ++c) CHECK(svg.find(">cluster " + std::to_string(c) + "<") != std::string::npos);
  CHECK(count_of(svg, R"(class="sig")") > 0);
  CHECK(zscore_chart_svg(rep, data.key_features()) == svg);

  // key features are drawn in dataset order whatever order they were given in
  const auto subset = zscore_chart_svg(rep, {"f3", "f1"});
  CHECK(count_of(subset, R"(class="bar")") == 6);
  CHECK(subset.find(R"(data-feature="f1")") < subset.find(R"(data-feature="f3")"));

  CHECK_THROWS_AS(zscore_chart_svg(rep, {"missing"}), ConfigError);
  CHECK_THROWS_AS(zscore_chart_svg(rep, {}), ConfigError);
}

TEST_CASE("z-score chart of constant data is flat") {
  const auto data = fixtures::constant_dataset(30, 5);
  const auto specs = expand_grid(small_config(R"({"kmeans": {"k": [3]}})"));
  const auto rep = run_candidate(data, specs[0], {});
  REQUIRE(rep.ok());
  const auto svg = zscore_chart_svg(rep, data.key_features());
  CHECK(count_of(svg, R"(class="bar")") == 15);
  CHECK(count_of(svg, R"(class="sig")") == 0);
  const std::regex height(R"re(class="bar"[^>]*height="([0-9.]+)")re");
  std::size_t bars = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), height), end; it != end; ++it, ++bars) {
    CHECK(std::stod((*it)[1]) == 0.0);
  }
  CHECK(bars == 15);
}

TEST_CASE("manifest references existing files and round-trips gate reasons") {
  const auto data = fixtures::as_dataset(fixtures::three_blobs().data);
  const auto result = run_all(data, parse_config(fixtures::twelve_candidate_config()), 2);
  const auto dir = fixtures::temp_dir("manifest");
  const auto outputs = write_run_outputs(result, dir);
  CHECK(outputs.profiles.size() == 12);
  CHECK(outputs.charts.size() == 12);
  const auto doc = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(doc["schema_version"] == 1);
  REQUIRE(doc["candidates"].size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& c = doc["candidates"][i];
    CHECK(c["candidate_id"] == result.candidates[i].spec.candidate_id);
    CHECK(fs::exists(dir / c["profile_csv"].get<std::string>()));
    CHECK(fs::exists(dir / c["chart_svg"].get<std::string>()));
  }
  for (const auto& [name, path] : doc["summary"].items()) {
    CHECK(fs::exists(dir / path.get<std::string>()));
  }

  const auto constant =
      run_all(fixtures::constant_dataset(), small_config(R"({"ahc": {"k": [2]}})"), 1);
  const auto dir2 = fixtures::temp_dir("manifest_gate");
  write_run_outputs(constant, dir2);
  const auto gate = nlohmann::json::parse(slurp(dir2 / "manifest.json"))["candidates"][0]["gate"];
  CHECK(gate["status"] == "ruled_out");
  REQUIRE(gate["reasons"].size() == constant.candidates[0].results->gate.reasons.size());
  CHECK(gate["reasons"][0] == "no_significant_features");
  for (std::size_t i = 0; i < gate["reasons"].size(); ++i) {
    CHECK(gate["reasons"][i] == to_string(constant.candidates[0].results->gate.reasons[i]));
  }
}

TEST_CASE("rerun manifests differ only in run metadata") {
  const auto data = fixtures::as_dataset(fixtures::three_blobs().data);
  const auto cfg = parse_config(fixtures::twelve_candidate_config());
  auto strip = [](nlohmann::json doc) {
    doc.erase("run_id");
    doc.erase("created_at");
    doc.erase("total_ms");
    for (auto& c : doc["candidates"]) c.erase("timing_ms");
    return doc;
  };
  const auto a = manifest_json(run_all(data, cfg, 1));
  const auto b = manifest_json(run_all(data, cfg, 4));
  CHECK(strip(nlohmann::json::parse(a.dump())) == strip(nlohmann::json::parse(b.dump())));
}
