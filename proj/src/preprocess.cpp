#include "hsi/preprocess.hpp"

#include <cmath>

#include "hsi/error.hpp"

namespace hsi {

std::size_t BandStats::zero_variance_count() const {
  std::size_t n = 0;
  for (bool z : zero_variance) n += z ? 1 : 0;
  return n;
}

PixelMatrix mask_background(const HyperspectralCube& cube, const GroundTruthMap& gt) {
  if (cube.width != gt.width || cube.height != gt.height) {
    throw ValidationError("cube is " + std::to_string(cube.width) + "x" + std::to_string(cube.height) +
                          " but ground truth is " + std::to_string(gt.width) + "x" + std::to_string(gt.height));
  }
  if (gt.labels.size() != cube.n_pixels()) throw ValidationError("ground truth label count does not match cube");

  PixelMatrix pm;
  pm.image_width = cube.width;
  pm.image_height = cube.height;
  for (std::size_t pix = 0; pix < gt.labels.size(); ++pix) {
    if (gt.labels[pix] == 0) continue;
    pm.coords.push_back({static_cast<std::uint32_t>(pix / cube.width), static_cast<std::uint32_t>(pix % cube.width)});
    pm.labels.push_back(gt.labels[pix]);
  }
  if (pm.coords.empty()) throw ValidationError("every pixel is background; nothing to analyse");

  const auto n = static_cast<Eigen::Index>(pm.coords.size());
  pm.values.resize(n, cube.data.cols());
  for (Eigen::Index b = 0; b < cube.data.cols(); ++b) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& c = pm.coords[static_cast<std::size_t>(i)];
      pm.values(i, b) = static_cast<double>(cube.data(static_cast<Eigen::Index>(c.row * cube.width + c.col), b));
    }
  }
  return pm;
}

std::pair<PixelMatrix, BandStats> standardize(const PixelMatrix& pm) {
  const Eigen::Index n = pm.values.rows();
  const Eigen::Index bands = pm.values.cols();
  if (n < 2) throw ValidationError("standardization needs at least 2 pixels, got " + std::to_string(n));

  PixelMatrix out = pm;
  BandStats stats;
  stats.mean.resize(bands);
  stats.stddev.resize(bands);
  std::vector<char> degenerate(static_cast<std::size_t>(bands), 0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < bands; ++b) {
    const auto col = pm.values.col(b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += col(i);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = col(i) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    stats.mean(b) = mean;
    stats.stddev(b) = sd;

    auto dst = out.values.col(b);
    if (is_constant(col)) {
      degenerate[static_cast<std::size_t>(b)] = 1;
      dst.setZero();
    } else {
      for (Eigen::Index i = 0; i < n; ++i) dst(i) = (col(i) - mean) / sd;
    }
  }
  stats.zero_variance.assign(degenerate.begin(), degenerate.end());
  return {std::move(out), std::move(stats)};
}

}  // namespace hsi
