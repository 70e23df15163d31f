#include "clustertune/grid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "clustertune/errors.hpp"
#include "clustertune/random.hpp"

namespace clustertune {

namespace {

enum class ParamKind { integer, real, linkage };

struct ParamSchema {
  std::string_view name;
  ParamKind kind;
  bool required;
  ParamValue fallback;
};

const std::vector<ParamSchema>& schema_for(Algorithm a) {
  static const std::vector<ParamSchema> kmeans_schema = {
      {"k", ParamKind::integer, true, std::int64_t{0}},
      {"max_iter", ParamKind::integer, false, std::int64_t{300}},
      {"n_init", ParamKind::integer, false, std::int64_t{10}},
      {"tol", ParamKind::real, false, 1e-4},
  };
  static const std::vector<ParamSchema> ahc_schema = {
      {"k", ParamKind::integer, true, std::int64_t{0}},
      {"linkage", ParamKind::linkage, false, std::string("ward")},
  };
  static const std::vector<ParamSchema> nmf_schema = {
      {"max_iter", ParamKind::integer, false, std::int64_t{500}},
      {"rank", ParamKind::integer, true, std::int64_t{0}},
      {"tol", ParamKind::real, false, 1e-5},
  };
  switch (a) {
    case Algorithm::kmeans:
      return kmeans_schema;
    case Algorithm::ahc:
      return ahc_schema;
    case Algorithm::nmf:
      return nmf_schema;
  }
  return kmeans_schema;
}

const ParamSchema* find_schema(Algorithm a, std::string_view name) {
  for (const auto& s : schema_for(a)) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ParamValue convert_value(const std::string& key, const ParamSchema& schema,
                         const nlohmann::ordered_json& v) {
  const auto fail = [&](const char* expected) -> ConfigError {
    return ConfigError("algorithms." + key + "." + std::string(schema.name) + ": expected " +
                       expected + ", got " + v.dump());
  };
  switch (schema.kind) {
    case ParamKind::integer:
      if (!v.is_number_integer()) throw fail("an integer");
      return v.get<std::int64_t>();
    case ParamKind::real:
      if (!v.is_number()) throw fail("a number");
      return v.get<double>();
    case ParamKind::linkage:
      if (!v.is_string() || !parse_linkage(v.get<std::string>())) {
        throw fail("one of ward, complete, average, single");
      }
      return v.get<std::string>();
  }
  throw fail("a value");
}

Algorithm infer_algorithm(const std::string& key, const nlohmann::ordered_json& entry) {
  if (entry.contains("algorithm")) {
    const auto& tag = entry.at("algorithm");
    if (!tag.is_string()) throw ConfigError("algorithms." + key + ".algorithm must be a string");
    if (const auto a = parse_algorithm(tag.get<std::string>())) return *a;
    throw ConfigError("algorithms." + key + ": unknown algorithm '" + tag.get<std::string>() + "'");
  }
  for (const auto a : {Algorithm::kmeans, Algorithm::ahc, Algorithm::nmf}) {
    const std::string tag(to_string(a));
    if (key == tag || key.rfind(tag + "_", 0) == 0) return a;
  }
  throw ConfigError("algorithms." + key +
                    ": unknown algorithm (name the key after kmeans/ahc/nmf or set \"algorithm\")");
}

GridEntry parse_entry(const std::string& key, const nlohmann::ordered_json& entry) {
  if (!entry.is_object()) throw ConfigError("algorithms." + key + " must be an object");
  GridEntry g;
  g.key = key;
  g.algorithm = infer_algorithm(key, entry);

  std::map<std::string, std::vector<ParamValue>> by_name;  // sorted by name
  for (const auto& [name, values] : entry.items()) {
    if (name == "algorithm") continue;
    const ParamSchema* schema = find_schema(g.algorithm, name);
    if (schema == nullptr) {
      throw ConfigError("algorithms." + key + ": parameter '" + name + "' does not apply to " +
                        std::string(to_string(g.algorithm)));
    }
    if (!values.is_array()) {
      throw ConfigError("algorithms." + key + "." + name + " must be a list of values");
    }
    if (values.empty()) throw ConfigError("algorithms." + key + "." + name + " is an empty list");
    auto& out = by_name[name];
    for (const auto& v : values) out.push_back(convert_value(key, *schema, v));
  }
  for (const auto& s : schema_for(g.algorithm)) {
    if (s.required && !by_name.contains(std::string(s.name))) {
      throw ConfigError("algorithms." + key + ": missing required parameter '" +
                        std::string(s.name) + "'");
    }
  }
  g.params.assign(by_name.begin(), by_name.end());
  return g;
}

double number_or(const nlohmann::ordered_json& doc, const char* name, double fallback) {
  if (!doc.contains(name)) return fallback;
  if (!doc.at(name).is_number()) throw ConfigError(std::string(name) + " must be a number");
  return doc.at(name).get<double>();
}

bool bool_or(const nlohmann::ordered_json& doc, const char* name, bool fallback) {
  if (!doc.contains(name)) return fallback;
  if (!doc.at(name).is_boolean()) throw ConfigError(std::string(name) + " must be true or false");
  return doc.at(name).get<bool>();
}

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string format_param(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return nlohmann::json(x).dump();
        }
      },
      v);
}

std::string format_params(const ParamList& params) {
  std::string out;
  for (const auto& [name, value] : params) {
    if (!out.empty()) out += ';';
    out += name + "=" + format_param(value);
  }
  return out;
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  static constexpr std::string_view known[] = {"seed",       "alpha",   "min_cluster_fraction",
                                               "bonferroni", "dataset", "algorithms"};
  for (const auto& [name, _] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), name) == std::end(known)) {
      throw ConfigError("unknown config key '" + name + "'");
    }
  }

  RunConfig cfg;
  cfg.source = doc;
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0)) {
      throw ConfigError("seed must be a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.alpha = number_or(doc, "alpha", 0.05);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  cfg.min_cluster_fraction = number_or(doc, "min_cluster_fraction", 0.05);
  if (!(cfg.min_cluster_fraction >= 0.0 && cfg.min_cluster_fraction < 0.5)) {
    throw ConfigError("min_cluster_fraction must be in [0, 0.5)");
  }
  cfg.bonferroni = bool_or(doc, "bonferroni", false);

  if (!doc.contains("dataset") || !doc.at("dataset").is_object()) {
    throw ConfigError("dataset section missing");
  }
  const auto& ds = doc.at("dataset");
  if (!ds.contains("path") || !ds.at("path").is_string()) {
    throw ConfigError("dataset.path must be a string");
  }
  cfg.dataset.path = ds.at("path").get<std::string>();
  if (cfg.dataset.path.is_relative() && !base_dir.empty()) {
    cfg.dataset.path = base_dir / cfg.dataset.path;
  }
  cfg.dataset.drop_na = bool_or(ds, "drop_na", false);
  if (ds.contains("key_features")) {
    const auto& kf = ds.at("key_features");
    if (!kf.is_array()) throw ConfigError("dataset.key_features must be a list of names");
    for (const auto& name : kf) {
      if (!name.is_string()) throw ConfigError("dataset.key_features must be a list of names");
      cfg.dataset.key_features.push_back(name.get<std::string>());
    }
  }

  if (!doc.contains("algorithms") || !doc.at("algorithms").is_object() ||
      doc.at("algorithms").empty()) {
    throw ConfigError("algorithms must name at least one entry");
  }
  for (const auto& [key, entry] : doc.at("algorithms").items()) {
    cfg.entries.push_back(parse_entry(key, entry));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

const ParamValue* CandidateSpec::find(std::string_view name) const {
  for (const auto& [n, v] : params) {
    if (n == name) return &v;
  }
  return nullptr;
}

std::int64_t CandidateSpec::get_int(std::string_view name) const {
  const ParamValue* v = find(name);
  if (v == nullptr || !std::holds_alternative<std::int64_t>(*v)) {
    throw ParameterError(candidate_id + ": integer parameter '" + std::string(name) + "' missing");
  }
  return std::get<std::int64_t>(*v);
}

double CandidateSpec::get_double(std::string_view name) const {
  const ParamValue* v = find(name);
  if (v != nullptr && std::holds_alternative<double>(*v)) return std::get<double>(*v);
  if (v != nullptr && std::holds_alternative<std::int64_t>(*v)) {
    return static_cast<double>(std::get<std::int64_t>(*v));
  }
  throw ParameterError(candidate_id + ": numeric parameter '" + std::string(name) + "' missing");
}

const std::string& CandidateSpec::get_string(std::string_view name) const {
  const ParamValue* v = find(name);
  if (v == nullptr || !std::holds_alternative<std::string>(*v)) {
    throw ParameterError(candidate_id + ": string parameter '" + std::string(name) + "' missing");
  }
  return std::get<std::string>(*v);
}

std::uint64_t candidate_seed(std::uint64_t global_seed, std::string_view candidate_id) noexcept {
  return derive_seed(global_seed, stable_hash64(candidate_id));
}

std::vector<CandidateSpec> expand_grid(const RunConfig& config) {
  if (config.entries.empty()) throw ConfigError("no algorithm entries to expand");
  std::vector<CandidateSpec> out;
  for (const auto& entry : config.entries) {
    std::size_t total = 1;
    for (const auto& [name, values] : entry.params) {
      if (values.empty()) throw ConfigError("algorithms." + entry.key + "." + name + " is empty");
      total *= values.size();
    }
    for (std::size_t index = 0; index < total; ++index) {
      CandidateSpec spec;
      spec.config_key = entry.key;
      spec.algorithm = entry.algorithm;
      spec.candidate_id = entry.key + "_v" + std::to_string(index);
      spec.seed = candidate_seed(config.seed, spec.candidate_id);

      // Mixed-radix decode, last parameter fastest.
      std::size_t rem = index;
      std::vector<std::pair<std::string, ParamValue>> chosen(entry.params.size());
      for (std::size_t p = entry.params.size(); p-- > 0;) {
        const auto& [name, values] = entry.params[p];
        chosen[p] = {name, values[rem % values.size()]};
        rem /= values.size();
      }
      std::map<std::string, ParamValue> merged(chosen.begin(), chosen.end());
      for (const auto& s : schema_for(entry.algorithm)) {
        merged.try_emplace(std::string(s.name), s.fallback);
      }
      spec.params.assign(merged.begin(), merged.end());
      out.push_back(std::move(spec));
    }
  }
  return out;
}

Scaling scaling_for(Algorithm a) noexcept {
  return a == Algorithm::nmf ? Scaling::minmax : Scaling::standardized;
}

PreparedData::PreparedData(Dataset raw_data)
    : raw(std::move(raw_data)), standardized(standardize(raw)), minmax(minmax_scale(raw)) {}

const Dataset& PreparedData::for_algorithm(Algorithm a) const noexcept {
  return scaling_for(a) == Scaling::minmax ? minmax : standardized;
}

namespace {

int checked_int(const CandidateSpec& spec, std::string_view name) {
  const auto v = spec.get_int(name);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParameterError(std::string(name) + " out of range");
  }
  return static_cast<int>(v);
}

ClusterAssignment fit(const Matrix& m, const CandidateSpec& spec) {
  switch (spec.algorithm) {
    case Algorithm::kmeans: {
      KMeansParams p;
      p.k = checked_int(spec, "k");
      p.seed = spec.seed;
      p.n_init = checked_int(spec, "n_init");
      p.max_iter = checked_int(spec, "max_iter");
      p.tol = spec.get_double("tol");
      return kmeans(m, p);
    }
    case Algorithm::ahc: {
      const auto linkage = parse_linkage(spec.get_string("linkage"));
      if (!linkage) throw ParameterError("unknown linkage '" + spec.get_string("linkage") + "'");
      return agglomerative(m, checked_int(spec, "k"), *linkage);
    }
    case Algorithm::nmf: {
      NmfParams p;
      p.rank = checked_int(spec, "rank");
      p.seed = spec.seed;
      p.max_iter = checked_int(spec, "max_iter");
      p.tol = spec.get_double("tol");
      return nmf(m, p);
    }
  }
  throw ParameterError("unknown algorithm");
}

}  // namespace

CandidateReport run_candidate(const PreparedData& data, const CandidateSpec& spec,
                              const EvalSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  CandidateReport report;
  report.spec = spec;
  report.scaling = scaling_for(spec.algorithm);
  try {
    const Matrix& fitted_on = data.for_algorithm(spec.algorithm).values();
    CandidateResults r;
    r.assignment = fit(fitted_on, spec);
    r.metrics = compute_metrics(fitted_on, r.assignment);
    r.profile = profile_clusters(data.raw, r.assignment,
                                 ProfileSettings{settings.alpha, settings.bonferroni});
    std::vector<std::string> notes = r.metrics.notes;
    notes.insert(notes.end(), r.profile.notes.begin(), r.profile.notes.end());
    r.gate = meta_gate(r.profile.stats, r.metrics.cluster_sizes, data.raw.rows(),
                       settings.min_cluster_fraction, r.metrics.degenerate(), std::move(notes));
    report.results = std::move(r);
  } catch (const Error& e) {
    report.error = e.what();
  }
  report.timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CandidateReport run_candidate(const Dataset& raw, const CandidateSpec& spec,
                              const EvalSettings& settings) {
  return run_candidate(PreparedData(raw), spec, settings);
}

RunResult run_all(const Dataset& raw, const RunConfig& config, unsigned jobs,
                  std::size_t dropped_rows) {
  const auto start = std::chrono::steady_clock::now();
  const auto specs = expand_grid(config);

  RunResult result;
  result.created_at = iso_utc_now();
  char id_suffix[17];
  std::snprintf(id_suffix, sizeof id_suffix, "%016llx",
                static_cast<unsigned long long>(
                    mix64(stable_hash64(config.source.dump()) ^ config.seed)));
  std::string stamp = result.created_at;
  std::erase_if(stamp, [](char c) { return c == '-' || c == ':'; });
  result.run_id = stamp + "-" + std::string(id_suffix, 8);
  result.config = config;

  const Dataset keyed =
      config.dataset.key_features.empty() ? raw : raw.with_key_features(config.dataset.key_features);
  result.dataset = DatasetSummary{keyed.rows(), keyed.columns(), keyed.key_features(), dropped_rows,
                                  config.dataset.path.generic_string()};

  const PreparedData data(keyed);
  const EvalSettings settings{config.alpha, config.min_cluster_fraction, config.bonferroni};
  result.candidates.resize(specs.size());

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, specs.size()));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      result.candidates[i] = run_candidate(data, specs[i], settings);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  result.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace clustertune
