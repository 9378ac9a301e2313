#include "hsi/synth.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "hsi/error.hpp"
#include "hsi/rng.hpp"

namespace hsi {

std::size_t SyntheticSpec::n_bands() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size;
  return n;
}

namespace {

void check_spec(const SyntheticSpec& spec) {
  if (spec.width == 0 || spec.height == 0) throw ConfigError("synthetic spec: empty image");
  if (spec.n_classes == 0) throw ConfigError("synthetic spec: need at least one class");
  if (spec.width < spec.n_classes) throw ConfigError("synthetic spec: width smaller than class count");
  if (spec.background_rows >= spec.height) throw ConfigError("synthetic spec: background covers the whole image");
  if (spec.groups.empty()) throw ConfigError("synthetic spec: no band groups");
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const auto& grp = spec.groups[g];
    const std::string where = "synthetic spec group " + std::to_string(g) + ": ";
    if (grp.size == 0) throw ConfigError(where + "group size must be positive");
    if (!(grp.rho >= 0.0 && grp.rho < 1.0)) throw ConfigError(where + "rho must lie in [0, 1)");
    if (!(grp.noise_sd >= 0.0)) throw ConfigError(where + "noise_sd must be non-negative");
    if (grp.class_means.size() != 0 &&
        (static_cast<std::size_t>(grp.class_means.rows()) != spec.n_classes ||
         static_cast<std::size_t>(grp.class_means.cols()) != grp.size)) {
      throw ConfigError(where + "class_means must be n_classes x size");
    }
  }
  if (spec.n_bands() < 2) throw ConfigError("synthetic spec: need at least 2 bands");
}

}  // namespace

std::pair<HyperspectralCube, GroundTruthMap> synthesize_cube(const SyntheticSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  const std::size_t n_pix = spec.width * spec.height;

  HyperspectralCube cube;
  cube.width = spec.width;
  cube.height = spec.height;
  cube.data.resize(static_cast<Eigen::Index>(n_pix), static_cast<Eigen::Index>(spec.n_bands()));

  std::vector<std::uint16_t> labels(n_pix, 0);
  SplitMix64 rng(seed);

  for (std::size_t row = 0; row < spec.height; ++row) {
    for (std::size_t col = 0; col < spec.width; ++col) {
      const std::size_t pix = row * spec.width + col;
      const std::size_t cls = col * spec.n_classes / spec.width;  // 0-based
      labels[pix] = row < spec.background_rows ? 0 : static_cast<std::uint16_t>(cls + 1);

      Eigen::Index band = 0;
      for (const auto& grp : spec.groups) {
        const double shared = std::sqrt(grp.rho);
        const double own = std::sqrt(1.0 - grp.rho);
        const double z = rng.normal();
        for (std::size_t k = 0; k < grp.size; ++k, ++band) {
          const double mean = grp.class_means.size() ? grp.class_means(static_cast<Eigen::Index>(cls),
                                                                       static_cast<Eigen::Index>(k))
                                                      : 0.0;
          const double v = mean + grp.noise_sd * (shared * z + own * rng.normal());
          cube.data(static_cast<Eigen::Index>(pix), band) = static_cast<float>(v);
        }
      }
    }
  }

  std::vector<std::string> names;
  for (std::size_t c = 1; c <= spec.n_classes; ++c) names.push_back("class" + std::to_string(c));
  GroundTruthMap gt = make_ground_truth(spec.width, spec.height, std::move(labels), std::move(names));
  return {std::move(cube), std::move(gt)};
}

SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  try {
    SyntheticSpec spec;
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.n_classes = j.value("n_classes", spec.n_classes);
    spec.background_rows = j.value("background_rows", spec.background_rows);
    for (const auto& jg : j.at("groups")) {
      BandGroup g;
      g.size = jg.value("size", g.size);
      g.rho = jg.value("rho", g.rho);
      g.noise_sd = jg.value("noise_sd", g.noise_sd);
      if (jg.contains("class_means")) {
        const auto& rows = jg.at("class_means");
        g.class_means.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g.size));
        for (std::size_t c = 0; c < rows.size(); ++c) {
          const auto& row = rows[c];
          if (row.is_number()) {
            g.class_means.row(static_cast<Eigen::Index>(c)).setConstant(row.get<double>());
          } else {
            if (row.size() != g.size) throw ConfigError("synthetic spec: class_means row width must equal group size");
            for (std::size_t k = 0; k < g.size; ++k) {
              g.class_means(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = row[k].get<double>();
            }
          }
        }
      }
      spec.groups.push_back(std::move(g));
    }
    check_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
}

SyntheticSpec demo_spec() {
  SyntheticSpec spec;
  spec.width = 48;
  spec.height = 40;
  spec.n_classes = 4;
  spec.background_rows = 4;

  BandGroup correlated;
  correlated.size = 6;
  correlated.rho = 0.95;
  correlated.noise_sd = 1.0;
  correlated.class_means.resize(4, 6);
  for (Eigen::Index c = 0; c < 4; ++c) correlated.class_means.row(c).setConstant(1.5 * static_cast<double>(c));
  spec.groups.push_back(correlated);

  for (int b = 0; b < 4; ++b) {
    BandGroup single;
    single.size = 1;
    single.noise_sd = 1.0;
    single.class_means.resize(4, 1);
    for (Eigen::Index c = 0; c < 4; ++c) single.class_means(c, 0) = ((c + b) % 4 == 0) ? 3.0 : 0.0;
    spec.groups.push_back(single);
  }
  return spec;
}

}  // namespace hsi
