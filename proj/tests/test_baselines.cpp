#include <doctest.h>

#include <Eigen/QR>

#include "hsi/baselines.hpp"
#include "hsi/error.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hsi;

namespace {

/// Random data with a prescribed spread per band followed by a random rotation.
Eigen::MatrixXd anisotropic(Eigen::Index n, Eigen::Index bands, std::uint64_t seed) {
  Eigen::MatrixXd x = testutil::random_matrix(n, bands, seed);
  for (Eigen::Index b = 0; b < bands; ++b) x.col(b) *= static_cast<double>(bands - b);
  const Eigen::MatrixXd q = testutil::random_matrix(bands, bands, seed + 1000).householderQr().householderQ();
  return x * q;
}

}  // namespace

TEST_CASE("PCA on a line recovers its direction") {
  Eigen::MatrixXd x(5, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  const auto m = pca_fit(x, 1);
  CHECK(m.components(0, 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(m.components(0, 1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(m.eigenvalues(0) == doctest::Approx(10.0).epsilon(1e-12));  // population variance of t*(1,2)
  CHECK(m.cumulative_variance_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.mean(0) == doctest::Approx(3.0));
}

TEST_CASE("PCA of axis-aligned data") {
  Eigen::MatrixXd x(4, 3);
  x << -3, 1, 0, 3, -1, 0, -3, -1, 0, 3, 1, 0;
  const auto m = pca_fit(x, 3);
  CHECK(m.all_eigenvalues(0) == doctest::Approx(9.0));
  CHECK(m.all_eigenvalues(1) == doctest::Approx(1.0));
  CHECK(m.all_eigenvalues(2) == doctest::Approx(0.0));
  CHECK(m.components(0, 0) == doctest::Approx(1.0));
  CHECK(m.components(1, 1) == doctest::Approx(1.0));
  CHECK(pca_fit(x, 1).cumulative_variance_ratio == doctest::Approx(0.9));
}

TEST_CASE("PCA matches the Jacobi oracle") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Eigen::Index bands = 3 + static_cast<Eigen::Index>(s);
    const Eigen::MatrixXd x = anisotropic(200, bands, s);
    const auto m = pca_fit(x, static_cast<std::size_t>(bands));
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const auto [values, vectors] = oracle::jacobi_eigen(c.transpose() * c / 200.0);
    for (Eigen::Index i = 0; i < bands; ++i) {
      CHECK(std::fabs(m.all_eigenvalues(i) - values(i)) <= 1e-9 * values(0));
      CHECK(std::fabs(std::fabs(m.components.row(i).dot(vectors.col(i))) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("PCA components are orthonormal and sign-normalized") {
  const Eigen::MatrixXd x = anisotropic(300, 10, 3);
  const auto m = pca_fit(x, 6);
  const Eigen::MatrixXd g = m.components * m.components.transpose();
  CHECK((g - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index c = 0; c < 6; ++c) {
    Eigen::Index pivot;
    m.components.row(c).cwiseAbs().maxCoeff(&pivot);
    CHECK(m.components(c, pivot) > 0.0);
  }
  for (Eigen::Index i = 1; i < m.all_eigenvalues.size(); ++i) CHECK(m.all_eigenvalues(i) <= m.all_eigenvalues(i - 1));
  CHECK(m.cumulative_variance_ratio > 0.0);
  CHECK(m.cumulative_variance_ratio <= 1.0);
}

TEST_CASE("PCA transform and reconstruction") {
  const Eigen::MatrixXd x = anisotropic(120, 7, 9);
  SUBCASE("full rank reconstructs exactly") {
    const auto m = pca_fit(x, 7);
    const Eigen::MatrixXd back = pca_reconstruct(pca_transform(x, m), m);
    CHECK((back - x).norm() <= 1e-9 * x.norm());
  }
  SUBCASE("scores preserve centered distances at full rank") {
    const auto m = pca_fit(x, 7);
    const Eigen::MatrixXd s = pca_transform(x, m);
    const Eigen::MatrixXd c = x.rowwise() - m.mean.transpose();
    CHECK(std::fabs(s.norm() - c.norm()) <= 1e-9 * c.norm());
  }
  SUBCASE("rank-k data is fully explained by k components") {
    Eigen::MatrixXd low = testutil::random_matrix(120, 3, 4) * testutil::random_matrix(3, 7, 5);
    const auto m = pca_fit(low, 3);
    CHECK(m.cumulative_variance_ratio >= 0.999);
    CHECK((pca_reconstruct(pca_transform(low, m), m) - low).norm() <= 1e-6 * low.norm());
  }
  SUBCASE("dimension errors") {
    const auto m = pca_fit(x, 2);
    CHECK_THROWS_AS(pca_transform(Eigen::MatrixXd::Ones(3, 6), m), ValidationError);
    CHECK_THROWS_AS(pca_reconstruct(Eigen::MatrixXd::Ones(3, 3), m), ValidationError);
  }
}

TEST_CASE("PCA is invariant to pixel order") {
  const Eigen::MatrixXd x = anisotropic(80, 5, 12);
  Eigen::MatrixXd rev = x.colwise().reverse();
  const auto a = pca_fit(x, 3);
  const auto b = pca_fit(rev, 3);
  CHECK((a.components - b.components).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-9 * a.eigenvalues(0));
}

TEST_CASE("PCA degenerate inputs") {
  const auto z = pca_fit(Eigen::MatrixXd::Constant(10, 4, 2.0), 2);
  CHECK(z.cumulative_variance_ratio == 1.0);
  CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(10, 4), 0), ConfigError);
  CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Ones(10, 4), 5), ConfigError);
}

TEST_CASE("PCA model save/load round trip") {
  testutil::TempDir dir;
  const auto m = pca_fit(anisotropic(60, 6, 2), 4);
  save_pca_model(m, dir / "pca.json");
  const auto back = load_pca_model(dir / "pca.json");
  CHECK(back.components == m.components);
  CHECK(back.mean == m.mean);
  CHECK(back.eigenvalues == m.eigenvalues);
  CHECK(back.all_eigenvalues == m.all_eigenvalues);
  CHECK(back.cumulative_variance_ratio == m.cumulative_variance_ratio);
  CHECK_THROWS_AS(load_pca_model(dir / "missing.json"), IoError);
}

TEST_CASE("SB greedy selection") {
  CorrelationMatrix cm;
  cm.values.resize(3, 3);
  cm.values << 1, 0.9, 0.1, 0.9, 1, 0.8, 0.1, 0.8, 1;
  cm.zero_variance.assign(3, false);

  SUBCASE("hand trace") {
    // ABC = (0.5, 0.85, 0.45): seed 2, then 0 is farthest (0.9 vs 0.2).
    const auto sel = sb_select(cm, 2);
    CHECK(sel.selected == std::vector<std::size_t>{0, 2});
    CHECK(sel.parameters.at("pick_order") == "2,0");
    CHECK(sel.method == "sb-greedy");
  }
  SUBCASE("k = 1 picks the lowest ABC") { CHECK(sb_select(cm, 1).selected == std::vector<std::size_t>{2}); }
  SUBCASE("k = N picks everything") { CHECK(sb_select(cm, 3).selected == std::vector<std::size_t>{0, 1, 2}); }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(sb_select(cm, 0), ConfigError);
    CHECK_THROWS_AS(sb_select(cm, 4), ConfigError);
  }
  SUBCASE("ties go to the lowest index") {
    CorrelationMatrix id{Eigen::MatrixXd::Identity(4, 4), std::vector<bool>(4, false)};
    CHECK(sb_select(id, 2).parameters.at("pick_order") == "0,1");
  }
}
