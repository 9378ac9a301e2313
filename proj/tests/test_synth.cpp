#include <doctest.h>

#include "hsi/error.hpp"
#include "hsi/synth.hpp"
#include "oracles.hpp"

using namespace hsi;

namespace {

SyntheticSpec one_group(double rho, std::size_t size = 4) {
  SyntheticSpec spec;
  spec.width = 64;
  spec.height = 64;
  BandGroup g;
  g.size = size;
  g.rho = rho;
  spec.groups.push_back(g);
  return spec;
}

std::vector<double> band(const HyperspectralCube& c, Eigen::Index b) {
  std::vector<double> v(static_cast<std::size_t>(c.data.rows()));
  for (Eigen::Index i = 0; i < c.data.rows(); ++i) v[static_cast<std::size_t>(i)] = c.data(i, b);
  return v;
}

}  // namespace

TEST_CASE("uncorrelated group has small sample correlation") {
  const auto [cube, gt] = synthesize_cube(one_group(0.0), 11);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = i + 1; j < 4; ++j) CHECK(std::fabs(oracle::pearson(band(cube, i), band(cube, j))) < 0.2);
}

TEST_CASE("rho = 0.95 group is strongly correlated") {
  const auto [cube, gt] = synthesize_cube(one_group(0.95), 11);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = i + 1; j < 4; ++j) CHECK(oracle::pearson(band(cube, i), band(cube, j)) > 0.85);
}

TEST_CASE("synthesis is a pure function of spec and seed") {
  const auto a = synthesize_cube(demo_spec(), 5);
  const auto b = synthesize_cube(demo_spec(), 5);
  const auto c = synthesize_cube(demo_spec(), 6);
  CHECK(a.first == b.first);
  CHECK(a.second.labels == b.second.labels);
  CHECK_FALSE(a.first == c.first);
}

TEST_CASE("ground truth stripes and background rows") {
  SyntheticSpec spec = one_group(0.5, 2);
  spec.width = 8;
  spec.height = 3;
  spec.n_classes = 4;
  spec.background_rows = 1;
  const auto [cube, gt] = synthesize_cube(spec, 1);
  CHECK(gt.n_classes == 4);
  for (std::size_t c = 0; c < 8; ++c) {
    CHECK(gt.at(0, c) == 0);
    CHECK(gt.at(2, c) == 1 + c / 2);
  }
}

TEST_CASE("invalid synthetic specs") {
  CHECK_THROWS_AS(synthesize_cube(one_group(1.0), 1), ConfigError);
  CHECK_THROWS_AS(synthesize_cube(one_group(0.5, 0), 1), ConfigError);
  CHECK_THROWS_AS(synthesize_cube(one_group(0.5, 1), 1), ConfigError);  // one band total
}

TEST_CASE("JSON spec parsing") {
  const auto spec = synthetic_spec_from_json(R"({
    "width": 10, "height": 6, "n_classes": 2,
    "groups": [{"size": 3, "rho": 0.9, "class_means": [0.0, 2.0]},
               {"size": 2, "rho": 0.0, "class_means": [[1, 2], [3, 4]]}]})");
  CHECK(spec.n_bands() == 5);
  CHECK(spec.groups[0].class_means(1, 2) == 2.0);
  CHECK(spec.groups[1].class_means(1, 0) == 3.0);
  CHECK_THROWS_AS(synthetic_spec_from_json(R"({"groups": [{"size": 2, "rho": 1.5}]})"), ConfigError);
  CHECK_THROWS_AS(synthetic_spec_from_json("not json"), ConfigError);
}
