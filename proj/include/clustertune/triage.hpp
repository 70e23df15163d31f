#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

namespace httplib {
class Server;
}

namespace clustertune {

// Reads <run_dir>/manifest.json and checks schema_version 1 and the
// candidates array. Throws ConfigError when missing or corrupt.
nlohmann::ordered_json load_manifest(const std::filesystem::path& run_dir);

enum class DecisionStatus { ruled_out, shortlisted, selected };

// Rejected decisions document: http_status is 400 (malformed) or 409
// (more than one candidate selected).
class DecisionError : public std::runtime_error {
 public:
  DecisionError(int http_status, const std::string& message)
      : std::runtime_error(message), http_status_(http_status) {}
  int http_status() const noexcept { return http_status_; }

 private:
  int http_status_;
};

nlohmann::ordered_json empty_decisions();

// Validates a decisions document against the known candidate ids and
// returns its normalized form (missing note -> "", missing updated_at -> now).
nlohmann::ordered_json normalize_decisions(const nlohmann::ordered_json& doc,
                                           const std::set<std::string>& candidate_ids);

// Writes <run_dir>/decisions.json through a temporary file and a rename.
void write_decisions_atomically(const std::filesystem::path& run_dir,
                                const nlohmann::ordered_json& doc);

// HTTP front for one run directory: the run tree read-only, an optional
// static UI bundle under /ui/, and GET/PUT /api/decisions.
class TriageServer {
 public:
  TriageServer(std::filesystem::path run_dir, std::optional<std::filesystem::path> ui_dir = {});
  ~TriageServer();
  TriageServer(const TriageServer&) = delete;
  TriageServer& operator=(const TriageServer&) = delete;

  // False when the port cannot be bound. Port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }

  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  std::filesystem::path run_dir_;
  std::optional<std::filesystem::path> ui_dir_;
  std::set<std::string> candidate_ids_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex write_mutex_;
  int port_ = -1;
};

}  // namespace clustertune
