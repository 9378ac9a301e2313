#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hsi {

inline constexpr double kDefaultTrainFraction = 0.7;

/// Row indices into a PixelMatrix, both lists ascending.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  double train_fraction = kDefaultTrainFraction;
};

/// Per-class shuffle (SplitMix64 stream per class label) then the first
/// round(fraction * |c|) members go to training, clamped so each class keeps
/// at least one train and one test sample.
SplitIndices stratified_split(std::span<const std::uint16_t> labels, double fraction, std::uint64_t seed);

/// Seeded, class-proportional subsample of `indices` down to about `cap`
/// entries (every class keeps at least one). Returns `indices` unchanged
/// when cap is 0 or not smaller than the input.
std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> indices,
                                              std::span<const std::uint16_t> labels, std::size_t cap,
                                              std::uint64_t seed);

}  // namespace hsi
