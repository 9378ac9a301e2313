#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hsi/cube.hpp"

namespace hsi {

struct PixelCoord {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Labeled pixels as an n x N sample matrix (one column per band, contiguous),
/// with enough bookkeeping to scatter results back into the image.
struct PixelMatrix {
  Eigen::MatrixXd values;
  std::vector<PixelCoord> coords;
  std::vector<std::uint16_t> labels;
  std::size_t image_width = 0;
  std::size_t image_height = 0;

  std::size_t n_pixels() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_bands() const { return static_cast<std::size_t>(values.cols()); }
};

struct BandStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;            // population (1/n)
  std::vector<bool> zero_variance;   // constant band, left as zeros

  std::size_t zero_variance_count() const;
};

/// Keeps pixels with a nonzero label, in row-major scan order. Spectra are
/// copied without arithmetic (f32 -> f64 is exact).
PixelMatrix mask_background(const HyperspectralCube& cube, const GroundTruthMap& gt);

/// Per-band z-score over the rows of `pm`.
std::pair<PixelMatrix, BandStats> standardize(const PixelMatrix& pm);

/// True when every entry of the vector is identical.
template <typename Derived>
bool is_constant(const Eigen::DenseBase<Derived>& v) {
  if (v.size() == 0) return true;
  return v.minCoeff() == v.maxCoeff();
}

}  // namespace hsi
