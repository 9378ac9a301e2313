#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsi/bandcorr.hpp"
#include "hsi/baselines.hpp"
#include "hsi/config.hpp"
#include "hsi/evaluate.hpp"
#include "hsi/preprocess.hpp"

namespace hsi {

inline constexpr const char* kToolVersion = "hsibs 1.0.0";

/// Labeled pixels after mask -> standardize.
struct PreparedData {
  PixelMatrix pixels;  // standardized
  BandStats stats;
  GroundTruthMap ground_truth;
  std::vector<double> wavelengths;
};

PreparedData prepare(const RunConfig& config);

/// Output of `select`. Files written to out_dir: selection.txt (+ .json),
/// abc.csv, correlation.csv (optional), select_manifest.json.
struct SelectResult {
  BandSelection selection;
  CorrelationMatrix correlation;
  AbcVector abc;
  std::string manifest_json;
};

SelectResult run_select(const RunConfig& config);

/// Output of `classify`. Files written to out_dir: report.json, report.txt,
/// predictions.hdr/.raw (u16), map.png, ground_truth.png, svm_model.json/.raw,
/// manifest.json and either selection.txt or pca_model.json.
struct ClassifyResult {
  EvaluationReport report;
  LabelRaster predictions;
  std::size_t n_features = 0;
  std::optional<BandSelection> selection;
  std::optional<PcaModel> pca;
  double gamma = 0.0;
  std::string report_json;
  std::string manifest_json;
};

ClassifyResult run_classify(const RunConfig& config);

/// Runs abc, pca and sb on one dataset with one split. SB uses k = the ABC
/// band count unless its config sets sb-k. Each method writes its own
/// out_dir; compare.txt and compare.json go to `out_dir`.
struct CompareResult {
  std::vector<EvaluationReport> reports;  // pca, sb, abc
  std::size_t abc_band_count = 0;
  std::size_t sb_k = 0;
  double pca_cumulative_variance = 0.0;
  std::string table;
  std::string json;
};

/// `configs` holds one config per method (abc, pca, sb in any order).
/// Refuses configs that disagree on dataset, seed or split fraction.
CompareResult run_compare(std::span<const RunConfig> configs, const std::filesystem::path& out_dir);

/// Re-runs the comparison for each seed and summarizes OA per method
/// (mean and population standard deviation).
std::string run_seed_sweep(std::span<const RunConfig> configs, std::span<const std::uint64_t> seeds,
                           const std::filesystem::path& out_dir);

/// Configs for the three methods derived from one base config, each with
/// out_dir = base.out_dir / method.
std::vector<RunConfig> method_configs(const RunConfig& base);

}  // namespace hsi
