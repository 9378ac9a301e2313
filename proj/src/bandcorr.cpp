#include "hsi/bandcorr.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hsi {

namespace fs = std::filesystem;

CorrelationMatrix correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index bands = samples.cols();
  if (bands < 2) throw ValidationError("correlation matrix needs at least 2 bands");
  if (n < 2) throw ValidationError("correlation matrix needs at least 2 samples, got " + std::to_string(n));

  // Center once; the pair loop then repeats exactly the arithmetic of pearson().
  Eigen::MatrixXd centered(n, bands);
  Eigen::VectorXd sum_sq(bands);
  std::vector<char> degenerate(static_cast<std::size_t>(bands), 0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < bands; ++b) {
    const auto col = samples.col(b);
    degenerate[static_cast<std::size_t>(b)] = is_constant(col) ? 1 : 0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += col(i);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = col(i) - mean;
      centered(i, b) = d;
      ss += d * d;
    }
    sum_sq(b) = ss;
  }

  CorrelationMatrix cm;
  cm.values.setZero(bands, bands);
  cm.zero_variance.assign(degenerate.begin(), degenerate.end());

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index i = 0; i < bands; ++i) {
    cm.values(i, i) = 1.0;
    if (degenerate[static_cast<std::size_t>(i)]) continue;
    const double* xi = centered.col(i).data();
    for (Eigen::Index j = i + 1; j < bands; ++j) {
      if (degenerate[static_cast<std::size_t>(j)]) continue;
      const double* xj = centered.col(j).data();
      double sxy = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) sxy += xi[k] * xj[k];
      const double r = std::clamp(sxy / std::sqrt(sum_sq(i) * sum_sq(j)), -1.0, 1.0);
      cm.values(i, j) = r;
      cm.values(j, i) = r;
    }
  }
  return cm;
}

CorrelationMatrix correlation_matrix(const PixelMatrix& pm) { return correlation_matrix(pm.values); }

AbcVector average_band_correlation(const Eigen::Ref<const Eigen::MatrixXd>& correlation) {
  const Eigen::Index bands = correlation.rows();
  if (bands < 2 || correlation.cols() != bands) {
    throw ValidationError("average band correlation needs a square matrix with at least 2 bands");
  }
  AbcVector out;
  out.abc.resize(bands);
  const double denom = static_cast<double>(bands - 1);
  // Summing the sorted magnitudes makes each entry independent of band order,
  // so permuting bands permutes ABC bit-for-bit.
  std::vector<double> row;
  row.reserve(static_cast<std::size_t>(bands - 1));
  for (Eigen::Index i = 0; i < bands; ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < bands; ++j) {
      if (j != i) row.push_back(std::abs(correlation(i, j)));
    }
    std::sort(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += v;
    out.abc(i) = sum / denom;
  }
  return out;
}

AbcVector average_band_correlation(const CorrelationMatrix& cm) { return average_band_correlation(cm.values); }

BandSelection select_bands_by_abc(const AbcVector& abc, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("ABC threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
  BandSelection sel;
  sel.method = "abc-threshold";
  sel.threshold = threshold;
  sel.abc = abc.abc;
  sel.n_bands_total = abc.n_bands();
  for (Eigen::Index i = 0; i < abc.abc.size(); ++i) {
    if (abc.abc(i) < threshold) sel.selected.push_back(static_cast<std::size_t>(i));
  }
  if (sel.selected.empty()) {
    std::ostringstream os;
    os << "no band has ABC below the threshold " << threshold << " (minimum ABC is " << abc.abc.minCoeff()
       << "); use a higher threshold";
    throw ValidationError(os.str());
  }
  return sel;
}

namespace {

void check_indices(std::span<const std::size_t> bands, std::size_t n_bands) {
  if (bands.empty()) throw ValidationError("band extraction needs at least one band");
  for (auto b : bands) {
    if (b >= n_bands) {
      throw ValidationError("band index " + std::to_string(b) + " out of range for " + std::to_string(n_bands) +
                            " bands");
    }
  }
}

template <typename Matrix>
Matrix gather_columns(const Matrix& m, std::span<const std::size_t> bands) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(bands.size()));
  for (std::size_t k = 0; k < bands.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(bands[k]));
  }
  return out;
}

}  // namespace

HyperspectralCube extract_bands(const HyperspectralCube& cube, std::span<const std::size_t> bands) {
  check_indices(bands, cube.n_bands());
  HyperspectralCube out;
  out.width = cube.width;
  out.height = cube.height;
  out.data = gather_columns(cube.data, bands);
  if (!cube.wavelengths.empty()) {
    for (auto b : bands) out.wavelengths.push_back(cube.wavelengths[b]);
  }
  return out;
}

HyperspectralCube extract_bands(const HyperspectralCube& cube, const BandSelection& sel) {
  return extract_bands(cube, std::span<const std::size_t>(sel.selected));
}

PixelMatrix extract_bands(const PixelMatrix& pm, std::span<const std::size_t> bands) {
  check_indices(bands, pm.n_bands());
  PixelMatrix out;
  out.values = gather_columns(pm.values, bands);
  out.coords = pm.coords;
  out.labels = pm.labels;
  out.image_width = pm.image_width;
  out.image_height = pm.image_height;
  return out;
}

PixelMatrix extract_bands(const PixelMatrix& pm, const BandSelection& sel) {
  return extract_bands(pm, std::span<const std::size_t>(sel.selected));
}

void write_matrix_csv(const fs::path& path, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_abc_csv(const fs::path& path, const AbcVector& abc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17) << "band,abc\n";
  for (Eigen::Index i = 0; i < abc.abc.size(); ++i) out << i << ',' << abc.abc(i) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void save_selection(const BandSelection& sel, const fs::path& path) {
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (auto b : sel.selected) out << b << '\n';
    if (!out) throw IoError("write failed: " + path.string());
  }
  nlohmann::ordered_json j;
  j["method"] = sel.method;
  if (sel.threshold) j["threshold"] = *sel.threshold;
  j["n_bands_total"] = sel.n_bands_total;
  j["n_selected"] = sel.selected.size();
  j["selected"] = sel.selected;
  j["abc"] = std::vector<double>(sel.abc.data(), sel.abc.data() + sel.abc.size());
  j["parameters"] = sel.parameters;

  fs::path meta = path;
  meta.replace_extension(".json");
  std::ofstream out(meta, std::ios::trunc);
  if (!out) throw IoError("cannot open " + meta.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + meta.string());
}

BandSelection load_selection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open selection file " + path.string());
  BandSelection sel;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(line, &used);
      if (v < 0) throw std::invalid_argument(line);
      sel.selected.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ": bad band index '" + line + "'");
    }
  }
  if (sel.selected.empty()) throw ValidationError(path.string() + ": empty selection");
  for (std::size_t k = 1; k < sel.selected.size(); ++k) {
    if (sel.selected[k] <= sel.selected[k - 1]) {
      throw ValidationError(path.string() + ": band indices must be strictly increasing");
    }
  }

  fs::path meta = path;
  meta.replace_extension(".json");
  sel.method = "abc-threshold";
  if (fs::exists(meta)) {
    std::ifstream jin(meta);
    try {
      const auto j = nlohmann::json::parse(jin);
      sel.method = j.value("method", sel.method);
      if (j.contains("threshold")) sel.threshold = j.at("threshold").get<double>();
      sel.n_bands_total = j.value("n_bands_total", std::size_t{0});
      if (j.contains("abc")) {
        const auto abc = j.at("abc").get<std::vector<double>>();
        sel.abc = Eigen::Map<const Eigen::VectorXd>(abc.data(), static_cast<Eigen::Index>(abc.size()));
      }
      if (j.contains("parameters")) sel.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(meta.string() + ": " + e.what());
    }
  }
  return sel;
}

}  // namespace hsi
