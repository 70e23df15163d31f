#include <fstream>
#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "clustertune/errors.hpp"
#include "clustertune/reporting.hpp"
#include "clustertune/triage.hpp"
#include "doctest.h"
#include "httplib.h"

using namespace clustertune;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path make_run_dir(const std::string& name) {
  const auto dir = fixtures::temp_dir(name);
  const auto data = fixtures::as_dataset(fixtures::three_blobs().data);
  const auto cfg = parse_config(
      R"({"seed": 1, "dataset": {"path": "d.csv"}, "algorithms": {"kmeans": {"k": [2, 3]}}})");
  write_run_outputs(run_all(data, cfg, 1), dir);
  return dir;
}

// Runs a TriageServer on a free port for the lifetime of the object.
struct LiveServer {
  explicit LiveServer(const fs::path& run_dir) : server(run_dir) {
    REQUIRE(server.bind("127.0.0.1", 0));
    thread = std::thread([this] { server.listen(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", server.port()); }

  TriageServer server;
  std::thread thread;
};

}  // namespace

TEST_CASE("load_manifest rejects missing and corrupt manifests") {
  const auto dir = fixtures::temp_dir("corrupt_manifest");
  CHECK_THROWS_AS(load_manifest(dir), ConfigError);
  std::ofstream(dir / "manifest.json") << "{\"schema_version\": 1, \"candidates\": [";
  CHECK_THROWS_AS(load_manifest(dir), ConfigError);
  std::ofstream(dir / "manifest.json") << R"({"schema_version": 2, "candidates": []})";
  CHECK_THROWS_AS(load_manifest(dir), ConfigError);
  CHECK_THROWS_AS(TriageServer{dir}, ConfigError);
}

TEST_CASE("normalize_decisions validation") {
  const std::set<std::string> ids = {"a", "b"};
  const auto ok = normalize_decisions(
      ordered_json::parse(R"({"schema_version": 1, "decisions": {"a": {"status": "shortlisted"}}})"),
      ids);
  CHECK(ok["decisions"]["a"]["note"] == "");
  CHECK(ok["decisions"]["a"]["updated_at"].is_string());

  const auto status_of = [&](const std::string& text) {
    try {
      normalize_decisions(ordered_json::parse(text), ids);
      return 200;
    } catch (const DecisionError& e) {
      return e.http_status();
    }
  };
  CHECK(status_of(R"([])") == 400);
  CHECK(status_of(R"({"schema_version": 2, "decisions": {}})") == 400);
  CHECK(status_of(R"({"schema_version": 1, "decisions": {"zzz": {"status": "selected"}}})") == 400);
  CHECK(status_of(R"({"schema_version": 1, "decisions": {"a": {"status": "maybe"}}})") == 400);
  CHECK(status_of(R"({"schema_version": 1, "decisions": {"a": {"status": "selected", "note": 3}}})") ==
        400);
  CHECK(status_of(
            R"({"schema_version": 1, "decisions": {"a": {"status": "selected"}, "b": {"status": "selected"}}})") ==
        409);
  CHECK(status_of(R"({"schema_version": 1, "decisions": {}})") == 200);
}

TEST_CASE("serve exposes the run tree and persists decisions") {
  const auto dir = make_run_dir("serve");
  LiveServer live(dir);
  auto cli = live.client();

  auto res = cli.Get("/manifest.json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == slurp(dir / "manifest.json"));

  res = cli.Get("/plots/kmeans_v0.svg");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "image/svg+xml");
  res = cli.Get("/candidates/kmeans_v1/profile.csv");
  REQUIRE(res);
  CHECK(res->body == slurp(dir / "candidates" / "kmeans_v1" / "profile.csv"));
  res = cli.Get("/ui/");
  REQUIRE(res);
  CHECK(res->status == 200);

  res = cli.Get("/api/decisions");
  REQUIRE(res);
  CHECK(ordered_json::parse(res->body) == empty_decisions());

  const std::string body =
      R"({"schema_version": 1, "decisions": {"kmeans_v0": {"status": "ruled_out", "note": "noisy", "updated_at": "2026-01-01T00:00:00Z"}}})";
  res = cli.Put("/api/decisions", body, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  res = cli.Get("/api/decisions");
  REQUIRE(res);
  CHECK(ordered_json::parse(res->body) == ordered_json::parse(body));
  const auto stored = slurp(dir / "decisions.json");
  CHECK(ordered_json::parse(stored) == ordered_json::parse(body));

  res = cli.Put("/api/decisions", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(slurp(dir / "decisions.json") == stored);

  res = cli.Put("/api/decisions",
                R"({"schema_version": 1, "decisions": {"kmeans_v0": {"status": "selected"}, "kmeans_v1": {"status": "selected"}}})",
                "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);
  CHECK(slurp(dir / "decisions.json") == stored);

  // last writer wins
  res = cli.Put("/api/decisions",
                R"({"schema_version": 1, "decisions": {"kmeans_v1": {"status": "selected"}}})",
                "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto latest = ordered_json::parse(slurp(dir / "decisions.json"));
  CHECK_FALSE(latest["decisions"].contains("kmeans_v0"));
  CHECK(latest["decisions"]["kmeans_v1"]["status"] == "selected");
  CHECK_FALSE(fs::exists(dir / "decisions.json.tmp"));
}

TEST_CASE("a busy port cannot be bound twice") {
  const auto dir = make_run_dir("busy_port");
  LiveServer live(dir);
  TriageServer second(dir);
  CHECK_FALSE(second.bind("127.0.0.1", live.server.port()));
}
