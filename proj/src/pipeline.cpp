#include "clustertune/pipeline.hpp"

namespace clustertune {

RunInputs load_run_inputs(const std::filesystem::path& config_path,
                          std::optional<std::uint64_t> seed_override) {
  RunConfig config = load_config(config_path);
  if (seed_override) {
    config.seed = *seed_override;
    config.source["seed"] = *seed_override;
  }
  expand_grid(config);  // surface grid errors before touching the data
  LoadResult data = load_csv(config.dataset.path, config.dataset.drop_na);
  if (!config.dataset.key_features.empty()) {
    data.dataset = data.dataset.with_key_features(config.dataset.key_features);
  }
  return RunInputs{std::move(config), std::move(data)};
}

RunResult run_inputs(const RunInputs& inputs, unsigned jobs) {
  return run_all(inputs.data.dataset, inputs.config, jobs, inputs.data.dropped_rows);
}

}  // namespace clustertune
