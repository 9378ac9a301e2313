#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "hsi/bandcorr.hpp"
#include "hsi/parallel.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hsi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

AbcVector abc_of(std::initializer_list<double> v) { return AbcVector{vec(v)}; }

}  // namespace

TEST_CASE("pearson worked examples") {
  CHECK(pearson(vec({1, 2, 3}), vec({2, 4, 6})).r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson(vec({1, 2, 3}), vec({3, 2, 1})).r == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(pearson(vec({1, 2, 3, 4}), vec({1, -1, -1, 1})).r) < 1e-15);

  const auto r = pearson(vec({1, 2, 3, 4}), vec({1, 2, 3, 5})).r;
  CHECK(std::fabs(r - 6.5 / std::sqrt(43.75)) < 1e-12);
  CHECK(std::fabs(r - oracle::pearson({1, 2, 3, 4}, {1, 2, 3, 5})) < 1e-12);
}

TEST_CASE("pearson degenerate and error cases") {
  const auto d = pearson(vec({2, 2, 2}), vec({1, 2, 3}));
  CHECK(d.degenerate);
  CHECK(d.r == 0.0);
  CHECK_THROWS_AS(pearson(vec({1, 2}), vec({1, 2, 3})), ValidationError);
  CHECK_THROWS_AS(pearson(vec({1}), vec({1})), ValidationError);
}

TEST_CASE("pearson properties on random data") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::MatrixXd m = testutil::random_matrix(30 + static_cast<Eigen::Index>(s), 2, s);
    const Eigen::VectorXd x = m.col(0), y = m.col(1);
    const double r = pearson(x, y).r;
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(pearson(y, x).r == r);
    const Eigen::VectorXd ax = (3.5 * x.array() - 2.0).matrix();
    CHECK(std::fabs(pearson(ax, y).r - r) < 1e-12);
    CHECK(std::fabs(pearson(-x, y).r + r) < 1e-12);
    CHECK(pearson(x, x).r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(r - oracle::pearson(oracle::column(m, 0), oracle::column(m, 1))) < 1e-12);
  }
}

TEST_CASE("pearson accepts float vectors") {
  Eigen::VectorXf x(4), y(4);
  x << 1, 2, 3, 4;
  y << 1, 2, 3, 5;
  CHECK(std::fabs(pearson(x, y).r - 6.5 / std::sqrt(43.75)) < 1e-12);
}

TEST_CASE("correlation matrix matches the naive oracle") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::MatrixXd m = testutil::random_matrix(40 + 13 * static_cast<Eigen::Index>(s), 2 + static_cast<Eigen::Index>(s), s);
    const auto cm = correlation_matrix(m);
    const Eigen::MatrixXd ref = oracle::correlation(m);
    CHECK((cm.values - ref).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(cm.values == cm.values.transpose());
    CHECK(cm.values.diagonal().isOnes(0.0));
    for (Eigen::Index i = 0; i < m.cols(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j) CHECK(cm.values(i, j) == pearson(m.col(i), m.col(j)).r);
  }
}

TEST_CASE("correlation matrix is independent of the worker count") {
  const Eigen::MatrixXd m = testutil::random_matrix(300, 24, 77);
  set_worker_count(1);
  const auto a = correlation_matrix(m);
  set_worker_count(4);
  const auto b = correlation_matrix(m);
  set_worker_count(0);
  CHECK(a.values == b.values);
}

TEST_CASE("correlation matrix handles constant bands") {
  Eigen::MatrixXd m = testutil::random_matrix(20, 3, 1);
  m.col(1).setConstant(4.0);
  const auto cm = correlation_matrix(m);
  CHECK(cm.zero_variance == std::vector<bool>{false, true, false});
  CHECK(cm.values(1, 1) == 1.0);
  CHECK(cm.values(0, 1) == 0.0);
  CHECK(cm.values(2, 1) == 0.0);
}

TEST_CASE("ABC worked examples") {
  Eigen::MatrixXd r2(2, 2);
  r2 << 1, 0.4, 0.4, 1;
  const auto a2 = average_band_correlation(r2);
  CHECK(a2.abc(0) == doctest::Approx(0.4));
  CHECK(a2.abc(1) == doctest::Approx(0.4));

  Eigen::MatrixXd r3(3, 3);
  r3 << 1, 0.5, -0.3, 0.5, 1, 0.9, -0.3, 0.9, 1;
  const auto a3 = average_band_correlation(r3);
  CHECK(a3.abc(0) == doctest::Approx(0.4));
  CHECK(a3.abc(1) == doctest::Approx(0.7));
  CHECK(a3.abc(2) == doctest::Approx(0.6));

  const auto ones = average_band_correlation(Eigen::MatrixXd::Ones(5, 5));
  CHECK(ones.abc.isOnes(1e-15));
  const auto ident = average_band_correlation(Eigen::MatrixXd::Identity(4, 4));
  CHECK(ident.abc.isZero(0.0));
}

TEST_CASE("ABC is permutation equivariant and matches the oracle") {
  const Eigen::MatrixXd m = testutil::random_matrix(100, 8, 5);
  const auto cm = correlation_matrix(m);
  const auto a = average_band_correlation(cm);
  const auto ref = oracle::abc(cm.values);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(std::fabs(a.abc(i) - ref[static_cast<std::size_t>(i)]) < 1e-12);
    CHECK(a.abc(i) >= 0.0);
    CHECK(a.abc(i) <= 1.0);
  }

  Eigen::PermutationMatrix<Eigen::Dynamic> p(8);
  std::vector<int> idx{3, 7, 0, 5, 1, 6, 2, 4};
  std::copy(idx.begin(), idx.end(), p.indices().data());
  const Eigen::MatrixXd permuted = m * p;
  const auto ap = average_band_correlation(correlation_matrix(permuted));
  for (Eigen::Index j = 0; j < 8; ++j) {
    Eigen::Index src = -1;
    for (Eigen::Index k = 0; k < 8; ++k)
      if (permuted.col(j) == m.col(k)) src = k;
    REQUIRE(src >= 0);
    CHECK(ap.abc(j) == a.abc(src));
  }
}

TEST_CASE("ABC input validation") {
  CHECK_THROWS_AS(average_band_correlation(Eigen::MatrixXd::Ones(1, 1)), ValidationError);
  CHECK_THROWS_AS(average_band_correlation(Eigen::MatrixXd::Ones(2, 3)), ValidationError);
}

TEST_CASE("threshold selection") {
  const auto abc = abc_of({0.2, 0.65, 0.64999, 0.9, 0.1});
  const auto sel = select_bands_by_abc(abc);
  CHECK(sel.selected == std::vector<std::size_t>{0, 2, 4});
  CHECK(sel.method == "abc-threshold");
  CHECK(sel.threshold == 0.65);
  CHECK(sel.n_bands_total == 5);

  CHECK(select_bands_by_abc(abc, 1.0).selected.size() == 5);
  CHECK_THROWS_AS(select_bands_by_abc(abc, 0.05), ValidationError);
  CHECK_THROWS_AS(select_bands_by_abc(abc, 0.0), ConfigError);
  CHECK_THROWS_AS(select_bands_by_abc(abc, 1.5), ConfigError);
}

TEST_CASE("threshold selection is monotone") {
  const Eigen::MatrixXd m = testutil::random_matrix(60, 12, 8);
  const auto abc = average_band_correlation(correlation_matrix(m));
  std::vector<std::size_t> prev;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    std::vector<std::size_t> cur;
    try {
      cur = select_bands_by_abc(abc, t).selected;
    } catch (const ValidationError&) {
    }
    CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    CHECK(std::is_sorted(cur.begin(), cur.end()));
    prev = cur;
  }
}

TEST_CASE("extract bands") {
  HyperspectralCube cube;
  cube.width = 2;
  cube.height = 1;
  cube.data.resize(2, 4);
  cube.data << 0, 1, 2, 3, 10, 11, 12, 13;
  cube.wavelengths = {0.4, 0.5, 0.6, 0.7};
  const std::vector<std::size_t> keep{1, 3};
  const auto sub = extract_bands(cube, keep);
  CHECK(sub.n_bands() == 2);
  CHECK(sub.at(1, 0, 1) == 13.0f);
  CHECK(sub.wavelengths == std::vector<double>{0.5, 0.7});
  const std::vector<std::size_t> bad{4};
  CHECK_THROWS_AS(extract_bands(cube, bad), ValidationError);

  PixelMatrix pm;
  pm.values = cube.data.cast<double>();
  pm.labels = {1, 2};
  const auto psub = extract_bands(pm, keep);
  CHECK(psub.values(0, 0) == 1.0);
  CHECK(psub.labels == pm.labels);
}

TEST_CASE("selection and CSV output") {
  testutil::TempDir dir;
  const auto abc = abc_of({0.2, 0.7, 0.3});
  auto sel = select_bands_by_abc(abc);
  save_selection(sel, dir / "sel.txt");
  CHECK(testutil::read_bytes(dir / "sel.txt") == "0\n2\n");
  const auto back = load_selection(dir / "sel.txt");
  CHECK(back.selected == sel.selected);
  CHECK(back.method == sel.method);
  CHECK(back.threshold == sel.threshold);
  CHECK(back.n_bands_total == 3);

  write_abc_csv(dir / "abc.csv", abc);
  CHECK(testutil::read_bytes(dir / "abc.csv").rfind("band,abc\n0,", 0) == 0);

  Eigen::MatrixXd m(2, 2);
  m << 1, 0.1, 0.1, 1;
  write_matrix_csv(dir / "m.csv", m);
  std::ifstream in(dir / "m.csv");
  double a, b;
  char comma;
  in >> a >> comma >> b;
  CHECK(b == 0.1);  // 17 significant digits round-trip exactly

  testutil::write_bytes(dir / "junk.txt", "1\nabc\n");
  CHECK_THROWS(load_selection(dir / "junk.txt"));
}
