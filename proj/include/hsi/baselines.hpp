#pragma once

#include <cstddef>
#include <filesystem>

#include <Eigen/Core>

#include "hsi/bandcorr.hpp"
#include "hsi/preprocess.hpp"

namespace hsi {

inline constexpr std::size_t kDefaultPcaComponents = 5;

/// Principal components of the (population) band covariance.
struct PcaModel {
  Eigen::VectorXd mean;            // N
  Eigen::MatrixXd components;      // k x N, orthonormal rows, descending eigenvalue
  Eigen::VectorXd eigenvalues;     // k retained, non-increasing
  Eigen::VectorXd all_eigenvalues; // N, non-increasing, negatives clamped to 0
  double cumulative_variance_ratio = 0.0;

  std::size_t n_bands() const { return static_cast<std::size_t>(components.cols()); }
  std::size_t n_components() const { return static_cast<std::size_t>(components.rows()); }
};

/// Each component is sign-normalized so its largest-magnitude entry is
/// positive (first such entry on ties).
PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, std::size_t k = kDefaultPcaComponents);
PcaModel pca_fit(const PixelMatrix& pm, std::size_t k = kDefaultPcaComponents);

/// (samples - mean) * components^T
Eigen::MatrixXd pca_transform(const Eigen::Ref<const Eigen::MatrixXd>& samples, const PcaModel& model);
PixelMatrix pca_transform(const PixelMatrix& pm, const PcaModel& model);

/// scores * components + mean
Eigen::MatrixXd pca_reconstruct(const Eigen::Ref<const Eigen::MatrixXd>& scores, const PcaModel& model);

/// JSON metadata at `path`, components as row-major little-endian f64 in a
/// sibling `.raw` file.
void save_pca_model(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca_model(const std::filesystem::path& path);

/// Similarity-based band selection stand-in: greedy max-min dissimilarity
/// with d(i, j) = 1 - |r_ij|. Seeds with the band of lowest ABC, then adds
/// the band farthest (in the max-min sense) from the chosen set until k
/// bands are chosen. Ties go to the lowest band index.
BandSelection sb_select(const CorrelationMatrix& cm, std::size_t k);

}  // namespace hsi
