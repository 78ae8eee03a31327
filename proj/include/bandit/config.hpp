#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "bandit/simulation.hpp"

namespace bandit {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  std::string dir = ".";
};

struct FullConfig {
  ExperimentConfig experiment;
  OutputOptions output;
};

// Strict parsing: unknown keys are rejected, diagnostics carry the field
// path. Missing keys take the documented defaults.
FullConfig parse_config_text(const std::string& text, const std::string& origin);
FullConfig parse_config_file(const std::filesystem::path& path);

// Every field materialized, including defaults; re-reading this text
// reproduces the identical run.
std::string effective_config_text(const FullConfig& cfg);

// Grid file: {"x_random": {"delta": [80, 90]}, ...}
TuneGrid parse_grid_text(const std::string& text, const std::string& origin);
TuneGrid parse_grid_file(const std::filesystem::path& path);

// Writes tune choices into per-noise hyperparameter overrides.
void apply_tune_choices(FullConfig& cfg, const TuneResult& result);

}  // namespace bandit
