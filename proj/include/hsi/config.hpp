#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "hsi/bandcorr.hpp"
#include "hsi/baselines.hpp"
#include "hsi/split.hpp"
#include "hsi/svm.hpp"

namespace hsi {

/// Every knob of a run. Config files are flat `key = value` text using the
/// CLI flag names (`threshold = 0.65`, `pca-k = 5`, ...); underscores and
/// hyphens are interchangeable. Relative paths resolve against the config
/// file's directory.
struct RunConfig {
  std::filesystem::path cube;
  std::filesystem::path ground_truth;
  std::string method = "abc";  // abc | pca | sb
  double threshold = kDefaultAbcThreshold;
  std::size_t pca_k = kDefaultPcaComponents;
  std::optional<std::size_t> sb_k;  // defaults to the ABC band count
  double train_fraction = kDefaultTrainFraction;
  std::uint64_t seed = 42;
  SvmConfig svm;
  std::size_t svm_subsample = 0;  // 0 = train on the full split
  std::filesystem::path out_dir = "out";
  std::filesystem::path selection;  // reuse a saved selection instead of recomputing
  std::filesystem::path palette;
  bool emit_correlation_csv = false;
  bool full_map = false;
  int workers = 0;  // 0 = OpenMP default
};

/// Applies one key/value pair. Throws ConfigError on unknown keys or bad values.
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value,
                        const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);
void load_config_into(RunConfig& config, const std::filesystem::path& path);

/// Range checks; `require_inputs` also checks that the dataset files exist.
void validate_config(const RunConfig& config, bool require_inputs = true);

}  // namespace hsi
