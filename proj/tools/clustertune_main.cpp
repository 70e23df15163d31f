// clustertune: grid-search clustering candidates, gate them, and serve the
// results for human triage.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "clustertune/errors.hpp"
#include "clustertune/pipeline.hpp"
#include "clustertune/reporting.hpp"
#include "clustertune/triage.hpp"

namespace fs = std::filesystem;
using namespace clustertune;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInput = 2;

std::string metric_cell(const nlohmann::ordered_json& metrics, const char* name) {
  if (!metrics.is_object() || !metrics.contains(name) || metrics[name].is_null()) return "-";
  const auto& v = metrics[name];
  if (v.is_string()) return v.get<std::string>();
  return format_real(v.get<double>());
}

int cmd_run(const fs::path& config, const fs::path& out, unsigned jobs,
            std::optional<std::uint64_t> seed) {
  std::optional<RunInputs> inputs;
  try {
    inputs.emplace(load_run_inputs(config, seed));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  if (inputs->data.dropped_rows > 0) {
    std::cerr << "dropped " << inputs->data.dropped_rows << " rows with missing values\n";
  }

  RunResult result;
  try {
    result = run_inputs(*inputs, jobs);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    write_run_outputs(result, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }

  std::size_t ruled_out = 0;
  std::size_t failed = 0;
  for (const auto& c : result.candidates) {
    if (!c.ok()) {
      ++failed;
      std::printf("%-24s error      %s\n", c.spec.candidate_id.c_str(), c.error->c_str());
      continue;
    }
    const auto& r = *c.results;
    if (r.gate.status == GateStatus::ruled_out) ++ruled_out;
    const std::string sil = r.metrics.silhouette ? format_real(*r.metrics.silhouette) : "-";
    std::printf("%-24s %-10s silhouette=%s\n", c.spec.candidate_id.c_str(),
                std::string(to_string(r.gate.status)).c_str(), sil.c_str());
  }
  std::printf("%zu candidates, %zu ruled out by meta-criteria\n", result.candidates.size(),
              ruled_out);
  if (failed > 0) std::printf("%zu candidates failed\n", failed);
  return kExitOk;
}

int cmd_gate(const fs::path& run_dir) {
  nlohmann::ordered_json manifest;
  try {
    manifest = load_manifest(run_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::printf("%-24s %-8s %-10s %s\n", "candidate", "algo", "gate", "reasons");
  std::size_t ruled_out = 0;
  for (const auto& c : manifest["candidates"]) {
    const std::string id = c["candidate_id"].get<std::string>();
    const std::string algo = c.value("algorithm", std::string("?"));
    std::string status = "error";
    std::string reasons;
    if (c.contains("gate") && c["gate"].is_object()) {
      status = c["gate"].value("status", std::string("?"));
      for (const auto& r : c["gate"].value("reasons", nlohmann::ordered_json::array())) {
        if (!reasons.empty()) reasons += ", ";
        reasons += r.get<std::string>();
      }
    } else if (c.contains("error") && c["error"].is_string()) {
      reasons = c["error"].get<std::string>();
    }
    if (status == "ruled_out") ++ruled_out;
    std::printf("%-24s %-8s %-10s %s\n", id.c_str(), algo.c_str(), status.c_str(), reasons.c_str());
  }
  std::printf("%zu candidates, %zu ruled_out\n", manifest["candidates"].size(), ruled_out);
  return kExitOk;
}

int cmd_summary(const fs::path& run_dir) {
  nlohmann::ordered_json manifest;
  try {
    manifest = load_manifest(run_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  std::printf("%-24s %-28s %-10s %-12s %-12s %-12s %-6s %s\n", "candidate", "params", "gate",
              "silhouette", "calinski", "davies", "n_sig", "sizes");
  for (const auto& c : manifest["candidates"]) {
    std::string params;
    if (c.contains("params") && c["params"].is_object()) {
      for (const auto& [name, v] : c["params"].items()) {
        if (name == "max_iter" || name == "n_init" || name == "tol") continue;
        if (!params.empty()) params += ' ';
        params += name + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    const auto metrics = c.value("metrics", nlohmann::ordered_json());
    std::string gate = "error";
    if (c.contains("gate") && c["gate"].is_object()) gate = c["gate"].value("status", "?");
    std::string sizes = "-";
    if (c.contains("sizes") && c["sizes"].is_array()) sizes = c["sizes"].dump();
    std::string nsig = "-";
    if (c.contains("n_significant_features") && c["n_significant_features"].is_number()) {
      nsig = c["n_significant_features"].dump();
    }
    std::printf("%-24s %-28s %-10s %-12s %-12s %-12s %-6s %s\n",
                c["candidate_id"].get<std::string>().c_str(), params.c_str(), gate.c_str(),
                metric_cell(metrics, "silhouette").c_str(),
                metric_cell(metrics, "calinski_harabasz").c_str(),
                metric_cell(metrics, "davies_bouldin").c_str(), nsig.c_str(), sizes.c_str());
  }
  return kExitOk;
}

TriageServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int cmd_serve(const fs::path& run_dir, const std::string& host, int port,
              const std::optional<fs::path>& ui_dir) {
  std::optional<TriageServer> server;
  try {
    server.emplace(run_dir, ui_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  if (!server->bind(host, port)) {
    std::cerr << "error: cannot bind " << host << ':' << port << " (port busy?)\n";
    return kExitInput;
  }
  g_server = &*server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("serving %s on http://%s:%d/ (Ctrl-C to stop)\n", run_dir.string().c_str(),
              host.c_str(), server->port());
  std::fflush(stdout);
  server->listen();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exhaustive clustering grid search with meta-criteria gating and triage"};
  app.require_subcommand(1);

  fs::path config, out;
  unsigned jobs = 0;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Evaluate every candidate of a config and write the output tree");
  run->add_option("--config", config, "Run configuration (JSON)")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Worker threads (default: available cores)");
  run->add_option("--seed", seed, "Override the config's seed");

  fs::path run_dir;
  auto* gate = app.add_subcommand("gate", "List candidates with gate status and reasons");
  gate->add_option("--run", run_dir, "Run output directory")->required();

  auto* summary = app.add_subcommand("summary", "Print the metrics table of a run");
  summary->add_option("--run", run_dir, "Run output directory")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<fs::path> ui_dir;
  auto* serve = app.add_subcommand("serve", "Serve a run directory and the decisions endpoint");
  serve->add_option("--run", run_dir, "Run output directory")->required();
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--ui", ui_dir, "Static triage UI bundle directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*run) return cmd_run(config, out, jobs, seed);
  if (*gate) return cmd_gate(run_dir);
  if (*summary) return cmd_summary(run_dir);
  if (*serve) return cmd_serve(run_dir, host, port, ui_dir);
  return kExitInput;
}
