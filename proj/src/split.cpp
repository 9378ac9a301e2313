#include "hsi/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hsi/error.hpp"
#include "hsi/rng.hpp"

namespace hsi {

namespace {

std::map<std::uint16_t, std::vector<std::size_t>> group_by_label(std::span<const std::size_t> indices,
                                                                  std::span<const std::uint16_t> labels) {
  std::map<std::uint16_t, std::vector<std::size_t>> groups;
  for (auto idx : indices) groups[labels[idx]].push_back(idx);
  return groups;
}

}  // namespace

SplitIndices stratified_split(std::span<const std::uint16_t> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  SplitIndices split;
  split.seed = seed;
  split.train_fraction = fraction;
  for (auto& [label, members] : group_by_label(all, labels)) {
    if (members.size() < 2) {
      throw ValidationError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                            " sample(s); stratified splitting needs at least 2");
    }
    SplitMix64 rng(derive_seed(seed, label));
    rng.shuffle(members);
    auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    split.train.insert(split.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> indices,
                                              std::span<const std::uint16_t> labels, std::size_t cap,
                                              std::uint64_t seed) {
  std::vector<std::size_t> out(indices.begin(), indices.end());
  if (cap == 0 || cap >= indices.size()) return out;

  out.clear();
  const double scale = static_cast<double>(cap) / static_cast<double>(indices.size());
  for (auto& [label, members] : group_by_label(indices, labels)) {
    SplitMix64 rng(derive_seed(seed ^ 0x5B5B5B5Bull, label));
    rng.shuffle(members);
    auto quota = static_cast<std::size_t>(std::llround(scale * static_cast<double>(members.size())));
    quota = std::clamp<std::size_t>(quota, 1, members.size());
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hsi
