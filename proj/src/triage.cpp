#include "clustertune/triage.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "clustertune/errors.hpp"
#include "clustertune/reporting.hpp"
#include "httplib.h"

namespace clustertune {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string iso_utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<std::string> read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<DecisionStatus> parse_status(const std::string& s) {
  if (s == "ruled_out") return DecisionStatus::ruled_out;
  if (s == "shortlisted") return DecisionStatus::shortlisted;
  if (s == "selected") return DecisionStatus::selected;
  return std::nullopt;
}

constexpr const char* kPlaceholderUi = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>clustertune triage</title></head>
<body>
<h1>Triage UI bundle not installed</h1>
<p>Start the server with <code>--ui &lt;dir&gt;</code> to serve the triage workspace.
The run itself is available at <a href="/manifest.json">/manifest.json</a>,
<a href="/summary/metrics.csv">/summary/metrics.csv</a> and
<a href="/api/decisions">/api/decisions</a>.</p>
</body></html>
)";

}  // namespace

ordered_json load_manifest(const fs::path& run_dir) {
  const auto text = read_text(run_dir / kManifestFile);
  if (!text) throw ConfigError("no manifest at '" + (run_dir / kManifestFile).string() + "'");
  ordered_json m;
  try {
    m = ordered_json::parse(*text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("corrupt manifest: " + std::string(e.what()));
  }
  if (!m.is_object() || !m.contains("schema_version") || m["schema_version"] != 1) {
    throw ConfigError("manifest schema_version must be 1");
  }
  if (!m.contains("candidates") || !m["candidates"].is_array()) {
    throw ConfigError("manifest has no candidates array");
  }
  for (const auto& c : m["candidates"]) {
    if (!c.is_object() || !c.contains("candidate_id") || !c["candidate_id"].is_string()) {
      throw ConfigError("manifest candidate entry without candidate_id");
    }
  }
  return m;
}

ordered_json empty_decisions() {
  return ordered_json{{"schema_version", 1}, {"decisions", ordered_json::object()}};
}

ordered_json normalize_decisions(const ordered_json& doc, const std::set<std::string>& candidate_ids) {
  if (!doc.is_object()) throw DecisionError(400, "decisions document must be an object");
  if (!doc.contains("schema_version") || doc["schema_version"] != 1) {
    throw DecisionError(400, "schema_version must be 1");
  }
  if (!doc.contains("decisions") || !doc["decisions"].is_object()) {
    throw DecisionError(400, "decisions must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "schema_version" && key != "decisions") {
      throw DecisionError(400, "unexpected field '" + key + "'");
    }
  }

  ordered_json out = empty_decisions();
  int selected = 0;
  for (const auto& [id, entry] : doc["decisions"].items()) {
    if (!candidate_ids.contains(id)) throw DecisionError(400, "unknown candidate '" + id + "'");
    if (!entry.is_object() || !entry.contains("status") || !entry["status"].is_string()) {
      throw DecisionError(400, id + ": status missing");
    }
    const auto status = parse_status(entry["status"].get<std::string>());
    if (!status) throw DecisionError(400, id + ": invalid status");
    if (*status == DecisionStatus::selected) ++selected;

    ordered_json norm;
    norm["status"] = entry["status"];
    if (entry.contains("note")) {
      if (!entry["note"].is_string()) throw DecisionError(400, id + ": note must be a string");
      norm["note"] = entry["note"];
    } else {
      norm["note"] = "";
    }
    if (entry.contains("updated_at")) {
      if (!entry["updated_at"].is_string()) {
        throw DecisionError(400, id + ": updated_at must be a string");
      }
      norm["updated_at"] = entry["updated_at"];
    } else {
      norm["updated_at"] = iso_utc_now();
    }
    for (const auto& [field, _] : entry.items()) {
      if (field != "status" && field != "note" && field != "updated_at") {
        throw DecisionError(400, id + ": unexpected field '" + field + "'");
      }
    }
    out["decisions"][id] = std::move(norm);
  }
  if (selected > 1) throw DecisionError(409, "at most one candidate may be selected");
  return out;
}

void write_decisions_atomically(const fs::path& run_dir, const ordered_json& doc) {
  const fs::path target = run_dir / kDecisionsFile;
  const fs::path tmp = run_dir / (kDecisionsFile.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << doc.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot replace '" + target.string() + "': " + ec.message());
  }
}

TriageServer::TriageServer(fs::path run_dir, std::optional<fs::path> ui_dir)
    : run_dir_(std::move(run_dir)),
      ui_dir_(std::move(ui_dir)),
      server_(std::make_unique<httplib::Server>()) {
  const auto manifest = load_manifest(run_dir_);
  for (const auto& c : manifest["candidates"]) {
    candidate_ids_.insert(c["candidate_id"].get<std::string>());
  }
  install_routes();
}

TriageServer::~TriageServer() { stop(); }

void TriageServer::install_routes() {
  auto& s = *server_;
  // httplib's defaults add SO_REUSEPORT, which would let a second server
  // share a busy port.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  if (ui_dir_) {
    if (!s.set_mount_point("/ui", ui_dir_->string())) {
      throw ConfigError("UI bundle directory '" + ui_dir_->string() + "' does not exist");
    }
  } else {
    s.Get("/ui/?", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderUi, "text/html");
    });
  }
  s.set_mount_point("/", run_dir_.string());
  s.set_file_extension_and_mimetype_mapping("csv", "text/csv");
  s.set_file_extension_and_mimetype_mapping("svg", "image/svg+xml");

  s.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/ui/"); });

  s.Get("/api/decisions", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(write_mutex_);
    const auto text = read_text(run_dir_ / kDecisionsFile);
    res.set_content(text ? *text : empty_decisions().dump(2) + "\n", "application/json");
  });

  s.Put("/api/decisions", [this](const httplib::Request& req, httplib::Response& res) {
    const auto fail = [&](int status, const std::string& msg) {
      res.status = status;
      res.set_content(ordered_json{{"error", msg}}.dump() + "\n", "application/json");
    };
    ordered_json doc;
    try {
      doc = ordered_json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      return fail(400, std::string("malformed JSON: ") + e.what());
    }
    try {
      const ordered_json normalized = normalize_decisions(doc, candidate_ids_);
      std::lock_guard lock(write_mutex_);
      write_decisions_atomically(run_dir_, normalized);
      res.set_content(normalized.dump(2) + "\n", "application/json");
    } catch (const DecisionError& e) {
      fail(e.http_status(), e.what());
    } catch (const IoError& e) {
      fail(500, e.what());
    }
  });
}

bool TriageServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

bool TriageServer::listen() { return server_->listen_after_bind(); }

void TriageServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void TriageServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace clustertune
