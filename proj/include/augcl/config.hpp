#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "augcl/trainer.hpp"

namespace augcl {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "AUGCL_OUTPUT_ROOT";

struct ProbeConfig {
  int folds = 10;
  int runs = 1;           // graph protocol repetitions
  int node_runs = 20;     // node protocol random splits
  double train_frac = 0.8;
  std::uint64_t seed = 0;
};

/// Everything one command needs. Text form:
///   [section]
///   key = value   # comment
/// Fields are addressed as "section.key" in overrides and error messages.
struct RunConfig {
  TrainConfig train;
  ProbeConfig probe;
  std::string dataset;  // TUDataset directory
  std::string out_dir;
  std::string inspect_head = "identity";
  int inspect_count = 4;

  /// Field-level checks; with `check_paths` the dataset directory must exist.
  void validate(bool check_paths = true) const;
};

/// All "section.key" names in file order.
std::vector<std::string> config_keys();

/// Sets one field from text; throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Parses config text over `base`; unknown keys are rejected.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Resolved config in the text form; parse_config(to_text(c)) == c.
std::string config_to_text(const RunConfig& config);

/// Training sections only, as stored inside checkpoints.
std::string train_config_to_text(const TrainConfig& config);
TrainConfig train_config_from_text(const std::string& text);

/// Output directory when none is configured: $AUGCL_OUTPUT_ROOT (or "runs")
/// joined with "<dataset name>-seed<seed>".
std::filesystem::path default_output_dir(const RunConfig& config);

}  // namespace augcl
