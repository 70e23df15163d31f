#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "clustertune/dataset.hpp"
#include "clustertune/grid.hpp"

namespace clustertune {

struct RunInputs {
  RunConfig config;
  LoadResult data;
};

// Reads the config and its dataset. Everything raised here is a
// configuration or ingestion problem (ConfigError, IoError, SchemaError, ...).
RunInputs load_run_inputs(const std::filesystem::path& config_path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

RunResult run_inputs(const RunInputs& inputs, unsigned jobs = 0);

}  // namespace clustertune
