#include "hsi/baselines.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "hsi/error.hpp"

namespace hsi {

namespace fs = std::filesystem;

PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, std::size_t k) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index bands = samples.cols();
  if (k == 0 || k > static_cast<std::size_t>(bands)) {
    throw ConfigError("PCA: k must lie in [1, " + std::to_string(bands) + "], got " + std::to_string(k));
  }
  if (n < 1) throw ValidationError("PCA: no samples");

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("PCA: symmetric eigensolver did not converge");

  // Eigen returns ascending order.
  const Eigen::VectorXd ascending = solver.eigenvalues();
  model.all_eigenvalues = ascending.reverse().cwiseMax(0.0);
  const auto kk = static_cast<Eigen::Index>(k);
  model.eigenvalues = model.all_eigenvalues.head(kk);
  model.components.resize(kk, bands);
  for (Eigen::Index c = 0; c < kk; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(bands - 1 - c);
    Eigen::Index pivot = 0;
    for (Eigen::Index j = 1; j < bands; ++j) {
      if (std::abs(v(j)) > std::abs(v(pivot))) pivot = j;
    }
    if (v(pivot) < 0.0) v = -v;
    model.components.row(c) = v.transpose();
  }

  const double total = model.all_eigenvalues.sum();
  model.cumulative_variance_ratio = total > 0.0 ? model.eigenvalues.sum() / total : 1.0;
  return model;
}

PcaModel pca_fit(const PixelMatrix& pm, std::size_t k) { return pca_fit(pm.values, k); }

Eigen::MatrixXd pca_transform(const Eigen::Ref<const Eigen::MatrixXd>& samples, const PcaModel& model) {
  if (static_cast<std::size_t>(samples.cols()) != model.n_bands()) {
    throw ValidationError("PCA transform: data has " + std::to_string(samples.cols()) + " bands, model expects " +
                          std::to_string(model.n_bands()));
  }
  return (samples.rowwise() - model.mean.transpose()) * model.components.transpose();
}

PixelMatrix pca_transform(const PixelMatrix& pm, const PcaModel& model) {
  PixelMatrix out;
  out.values = pca_transform(pm.values, model);
  out.coords = pm.coords;
  out.labels = pm.labels;
  out.image_width = pm.image_width;
  out.image_height = pm.image_height;
  return out;
}

Eigen::MatrixXd pca_reconstruct(const Eigen::Ref<const Eigen::MatrixXd>& scores, const PcaModel& model) {
  if (static_cast<std::size_t>(scores.cols()) != model.n_components()) {
    throw ValidationError("PCA reconstruct: score width does not match component count");
  }
  return (scores * model.components).rowwise() + model.mean.transpose();
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_pca_model(const PcaModel& model, const fs::path& path) {
  static_assert(std::endian::native == std::endian::little, "PCA model files are little-endian");
  fs::path raw = path;
  raw.replace_extension(".raw");

  nlohmann::ordered_json j;
  j["n_bands"] = model.n_bands();
  j["n_components"] = model.n_components();
  j["cumulative_variance_ratio"] = model.cumulative_variance_ratio;
  j["mean"] = to_vector(model.mean);
  j["eigenvalues"] = to_vector(model.eigenvalues);
  j["all_eigenvalues"] = to_vector(model.all_eigenvalues);
  j["components_file"] = raw.filename().string();
  j["components_layout"] = "row-major f64 little-endian, n_components x n_bands";

  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = model.components;
  {
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + raw.string() + " for writing");
    out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(rows.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + raw.string());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

PcaModel load_pca_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PCA model " + path.string());
  PcaModel model;
  std::size_t bands = 0;
  std::size_t k = 0;
  fs::path raw;
  try {
    const auto j = nlohmann::json::parse(in);
    bands = j.at("n_bands").get<std::size_t>();
    k = j.at("n_components").get<std::size_t>();
    model.cumulative_variance_ratio = j.at("cumulative_variance_ratio").get<double>();
    model.mean = from_vector(j.at("mean").get<std::vector<double>>());
    model.eigenvalues = from_vector(j.at("eigenvalues").get<std::vector<double>>());
    model.all_eigenvalues = from_vector(j.value("all_eigenvalues", std::vector<double>{}));
    raw = path.parent_path() / j.at("components_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (static_cast<std::size_t>(model.mean.size()) != bands || static_cast<std::size_t>(model.eigenvalues.size()) != k) {
    throw ValidationError(path.string() + ": inconsistent PCA model dimensions");
  }

  const std::uintmax_t expected = std::uintmax_t{k} * bands * sizeof(double);
  std::error_code ec;
  const auto actual = fs::file_size(raw, ec);
  if (ec || actual != expected) {
    throw IoError(raw.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                  (ec ? std::string("none") : std::to_string(actual)));
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(static_cast<Eigen::Index>(k),
                                                                              static_cast<Eigen::Index>(bands));
  std::ifstream rin(raw, std::ios::binary);
  rin.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(expected));
  if (!rin) throw IoError("short read: " + raw.string());
  model.components = rows;
  return model;
}

BandSelection sb_select(const CorrelationMatrix& cm, std::size_t k) {
  const std::size_t bands = cm.n_bands();
  if (k < 1 || k > bands) {
    throw ConfigError("SB selection: k must lie in [1, " + std::to_string(bands) + "], got " + std::to_string(k));
  }
  const AbcVector abc = average_band_correlation(cm);

  std::vector<bool> chosen(bands, false);
  std::vector<std::size_t> order;
  Eigen::Index seed = 0;
  abc.abc.minCoeff(&seed);  // first minimum on ties
  order.push_back(static_cast<std::size_t>(seed));
  chosen[static_cast<std::size_t>(seed)] = true;

  // nearest[i]: min dissimilarity from band i to the chosen set
  std::vector<double> nearest(bands, std::numeric_limits<double>::infinity());
  auto absorb = [&](std::size_t added) {
    for (std::size_t i = 0; i < bands; ++i) {
      const double d = 1.0 - std::abs(cm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(added)));
      nearest[i] = std::min(nearest[i], d);
    }
  };
  absorb(order.back());

  while (order.size() < k) {
    std::size_t best = bands;
    for (std::size_t i = 0; i < bands; ++i) {
      if (chosen[i]) continue;
      if (best == bands || nearest[i] > nearest[best]) best = i;
    }
    chosen[best] = true;
    order.push_back(best);
    absorb(best);
  }

  BandSelection sel;
  sel.method = "sb-greedy";
  sel.abc = abc.abc;
  sel.n_bands_total = bands;
  for (std::size_t i = 0; i < bands; ++i) {
    if (chosen[i]) sel.selected.push_back(i);
  }
  std::string trace;
  for (auto b : order) trace += (trace.empty() ? "" : ",") + std::to_string(b);
  sel.parameters["k"] = std::to_string(k);
  sel.parameters["dissimilarity"] = "1-|r|";
  sel.parameters["pick_order"] = trace;
  sel.parameters["note"] = "greedy max-min stand-in, not the original similarity-based algorithm";
  return sel;
}

}  // namespace hsi
