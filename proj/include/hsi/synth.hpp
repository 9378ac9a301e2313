#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hsi/cube.hpp"

namespace hsi {

/// Bands generated as shared latent + independent noise:
///   x_b = mean[class][b] + noise_sd * (sqrt(rho) * z + sqrt(1 - rho) * e_b)
/// so any two bands of the group have population correlation rho within a class.
struct BandGroup {
  std::size_t size = 1;
  double rho = 0.0;
  double noise_sd = 1.0;
  Eigen::MatrixXd class_means;  // n_classes x size; empty means all zero
};

struct SyntheticSpec {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t n_classes = 1;
  std::size_t background_rows = 0;  // leading rows labeled 0
  std::vector<BandGroup> groups;

  std::size_t n_bands() const;
};

/// Classes occupy vertical stripes of equal width, class 1 on the left.
std::pair<HyperspectralCube, GroundTruthMap> synthesize_cube(const SyntheticSpec& spec, std::uint64_t seed);

/// JSON form used by `hsibs synth --spec`.
SyntheticSpec synthetic_spec_from_json(const std::string& text);

/// Small labeled scene: four well separated classes, one strongly
/// correlated band group and a few independent bands.
SyntheticSpec demo_spec();

}  // namespace hsi
