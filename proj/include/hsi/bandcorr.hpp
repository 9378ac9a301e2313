#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hsi/cube.hpp"
#include "hsi/error.hpp"
#include "hsi/preprocess.hpp"

namespace hsi {

inline constexpr double kDefaultAbcThreshold = 0.65;

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // one of the inputs was constant; r is 0
};

/// Pearson correlation of two equal-length sample vectors.
///
/// Means are taken first, then the centered cross and square sums are
/// accumulated in double precision in index order 0..n-1. The result is
/// clamped to [-1, 1]. Correlation against a constant vector is undefined,
/// it is reported as r = 0 with `degenerate` set.
template <typename DerivedX, typename DerivedY>
PearsonResult pearson(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  const Eigen::Index n = x.size();
  if (y.size() != n) {
    throw ValidationError("pearson: length mismatch (" + std::to_string(n) + " vs " + std::to_string(y.size()) + ")");
  }
  if (n < 2) throw ValidationError("pearson: need at least 2 samples, got " + std::to_string(n));
  if (is_constant(x) || is_constant(y)) return {0.0, true};

  double sum_x = 0.0;
  double sum_y = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum_x += static_cast<double>(x(i));
  for (Eigen::Index i = 0; i < n; ++i) sum_y += static_cast<double>(y(i));
  const double mean_x = sum_x / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);

  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dx = static_cast<double>(x(i)) - mean_x;
    const double dy = static_cast<double>(y(i)) - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return {std::clamp(r, -1.0, 1.0), false};
}

/// Symmetric band-by-band correlation matrix.
struct CorrelationMatrix {
  Eigen::MatrixXd values;
  std::vector<bool> zero_variance;

  std::size_t n_bands() const { return static_cast<std::size_t>(values.rows()); }
};

/// Correlation of every pair of columns of an n x N sample matrix. Each
/// entry is bit-identical to `pearson` on the two columns. Pairs are
/// distributed over workers; the result does not depend on the worker count.
/// Constant bands get zero correlation with every other band and 1 on the
/// diagonal.
CorrelationMatrix correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& samples);
CorrelationMatrix correlation_matrix(const PixelMatrix& pm);

/// ABC_i = 1/(N-1) * sum_{j != i} |r_ij|
struct AbcVector {
  Eigen::VectorXd abc;
  std::size_t n_bands() const { return static_cast<std::size_t>(abc.size()); }
};

AbcVector average_band_correlation(const Eigen::Ref<const Eigen::MatrixXd>& correlation);
AbcVector average_band_correlation(const CorrelationMatrix& cm);

/// Ordered band subset and how it was obtained.
struct BandSelection {
  std::string method;  // "abc-threshold", "pca" or "sb-greedy"
  std::optional<double> threshold;
  std::vector<std::size_t> selected;  // strictly increasing
  Eigen::VectorXd abc;
  std::size_t n_bands_total = 0;
  std::map<std::string, std::string> parameters;
};

/// Keeps bands whose ABC is strictly below `threshold`, in (0, 1].
BandSelection select_bands_by_abc(const AbcVector& abc, double threshold = kDefaultAbcThreshold);

HyperspectralCube extract_bands(const HyperspectralCube& cube, std::span<const std::size_t> bands);
HyperspectralCube extract_bands(const HyperspectralCube& cube, const BandSelection& sel);
PixelMatrix extract_bands(const PixelMatrix& pm, std::span<const std::size_t> bands);
PixelMatrix extract_bands(const PixelMatrix& pm, const BandSelection& sel);

/// Row-major CSV with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& m);
void write_abc_csv(const std::filesystem::path& path, const AbcVector& abc);

/// `path` gets one band index per line; the provenance goes next to it as
/// JSON (same basename, `.json`).
void save_selection(const BandSelection& sel, const std::filesystem::path& path);
BandSelection load_selection(const std::filesystem::path& path);

}  // namespace hsi
