#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsi/cube.hpp"
#include "hsi/png.hpp"

namespace hsi {

/// counts(t - 1, p - 1): pixels of true class t predicted as p.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  std::size_t n_classes() const { return static_cast<std::size_t>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
};

ConfusionMatrix confusion(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> predicted,
                          std::size_t n_classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;  // true pixels of the class
  bool degenerate = false;   // some ratio was 0/0 and reported as 0
};

struct EvaluationReport {
  std::string method;
  std::vector<ClassMetrics> per_class;
  double overall_accuracy = 0.0;  // percent
  double kappa = 0.0;
  bool kappa_degenerate = false;  // chance agreement was 1 (single class)
  ConfusionMatrix confusion;
};

/// Precision/recall/F1 per class, OA = 100 * trace / total and Cohen's
/// kappa = (p_o - p_e) / (1 - p_e). Kappa is evaluated from integer sums
/// as (N * trace - S) / (N^2 - S), S = sum_c rowsum_c * colsum_c.
EvaluationReport report(const ConfusionMatrix& cm, std::string method = {});

std::string report_json(const EvaluationReport& r);

/// Aligned text table: one row per class with PRECISION RECALL F1, then OA
/// and KAPPA rows (2 decimals).
std::string report_table(const EvaluationReport& r);

/// Several methods side by side, columns grouped per method.
std::string comparison_table(std::span<const EvaluationReport> reports, const std::string& title);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Entry k is the color of label k + 1; label 0 is always black.
using Palette = std::vector<Rgb>;

/// Sixteen fixed, visually distinct colors.
Palette default_palette();

/// Reads `label r g b` lines (0-255), labels 1..n without gaps.
Palette load_palette(const std::filesystem::path& path);

RgbImage colorize(const LabelRaster& raster, const Palette& palette);
void render_map(const LabelRaster& raster, const Palette& palette, const std::filesystem::path& png_path);

}  // namespace hsi
