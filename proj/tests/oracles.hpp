#pragma once

// Independent reference implementations used only by the tests. They share
// no code with the library and favor obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Textbook two-pass Pearson correlation on std::vector.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i];
  for (std::size_t i = 0; i < n; ++i) my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) num += (x[i] - mx) * (y[i] - my);
  for (std::size_t i = 0; i < n; ++i) vx += (x[i] - mx) * (x[i] - mx);
  for (std::size_t i = 0; i < n; ++i) vy += (y[i] - my) * (y[i] - my);
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return num / std::sqrt(vx * vy);
}

inline std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, c);
  return out;
}

/// O(N^2 n) double loop, every pair computed from scratch (both triangles).
inline Eigen::MatrixXd correlation(const Eigen::MatrixXd& samples) {
  const Eigen::Index bands = samples.cols();
  Eigen::MatrixXd r(bands, bands);
  for (Eigen::Index i = 0; i < bands; ++i) {
    for (Eigen::Index j = 0; j < bands; ++j) {
      r(i, j) = i == j ? 1.0 : pearson(column(samples, i), column(samples, j));
    }
  }
  return r;
}

/// Mean absolute off-diagonal entry per row.
inline std::vector<double> abc(const Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) s += std::fabs(r(i, j));
    }
    out.push_back(s / static_cast<double>(n - 1));
  }
  return out;
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Returns eigenvalues in
/// descending order with matching eigenvector columns.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {values, vectors};
}

struct Metrics {
  std::vector<double> precision, recall, f1;
  double oa = 0.0;
  double kappa = 0.0;
};

/// Expands a confusion matrix into explicit (truth, prediction) pairs and
/// recomputes every metric by counting over the pairs.
inline Metrics metrics(const std::vector<std::vector<int>>& counts) {
  const std::size_t k = counts.size();
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t p = 0; p < k; ++p)
      for (int c = 0; c < counts[t][p]; ++c) pairs.emplace_back(static_cast<int>(t), static_cast<int>(p));

  Metrics m;
  const double total = static_cast<double>(pairs.size());
  double correct = 0.0;
  for (auto [t, p] : pairs) correct += t == p ? 1.0 : 0.0;
  m.oa = 100.0 * correct / total;

  double pe = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double tp = 0, predicted = 0, actual = 0;
    for (auto [t, p] : pairs) {
      if (t == static_cast<int>(c) && p == static_cast<int>(c)) ++tp;
      if (p == static_cast<int>(c)) ++predicted;
      if (t == static_cast<int>(c)) ++actual;
    }
    const double prec = predicted > 0 ? tp / predicted : 0.0;
    const double rec = actual > 0 ? tp / actual : 0.0;
    m.precision.push_back(prec);
    m.recall.push_back(rec);
    m.f1.push_back(prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0);
    pe += (actual / total) * (predicted / total);
  }
  const double po = correct / total;
  m.kappa = pe < 1.0 ? (po - pe) / (1.0 - pe) : 1.0;
  return m;
}

}  // namespace oracle
