#pragma once

// JSON run configuration shared by the simulate, sweep and check-proper
// commands. Unknown keys are rejected; absent keys take the documented defaults.

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "feemarket/engine.hpp"
#include "feemarket/sweep.hpp"

namespace feemarket::config {

struct RunConfig {
  engine::SimConfig sim{};
  std::size_t long_n = engine::kDefaultLongHorizon;
  std::optional<sweep::SweepSpec> sweep;  // present when the file has a "sweep" block
};

/// Throws Error(ConfigError) naming the offending field.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Sweep spec for `run`: the file's "sweep" block or a default d sweep.
sweep::SweepSpec sweep_spec(const RunConfig& run);

/// Re-validates after command-line overrides have been applied.
void validate(const RunConfig& run);

}  // namespace feemarket::config
