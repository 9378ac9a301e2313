#include "hsi/evaluate.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hsi/error.hpp"

namespace hsi {

ConfusionMatrix confusion(std::span<const std::uint16_t> truth, std::span<const std::uint16_t> predicted,
                          std::size_t n_classes) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  if (n_classes == 0) throw ValidationError("confusion: zero classes");
  ConfusionMatrix cm;
  cm.counts.setZero(static_cast<Eigen::Index>(n_classes), static_cast<Eigen::Index>(n_classes));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = truth[i];
    const auto p = predicted[i];
    if (t < 1 || t > n_classes || p < 1 || p > n_classes) {
      throw ValidationError("confusion: label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                            ") at index " + std::to_string(i) + " outside 1.." + std::to_string(n_classes));
    }
    ++cm.counts(t - 1, p - 1);
  }
  return cm;
}

EvaluationReport report(const ConfusionMatrix& cm, std::string method) {
  const auto k = static_cast<Eigen::Index>(cm.n_classes());
  const std::int64_t total = cm.total();
  if (k == 0 || total <= 0) throw ValidationError("report: empty confusion matrix");

  EvaluationReport r;
  r.method = std::move(method);
  r.confusion = cm;
  const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> rows = cm.counts.rowwise().sum();
  const Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic> cols = cm.counts.colwise().sum();

  std::int64_t trace = 0;
  std::int64_t chance = 0;  // sum_c rowsum_c * colsum_c
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::int64_t tp = cm.counts(c, c);
    trace += tp;
    chance += rows(c) * cols(c);

    ClassMetrics m;
    m.support = rows(c);
    if (cols(c) > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(cols(c));
    } else {
      m.degenerate = true;
    }
    if (rows(c) > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(rows(c));
    } else {
      m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate = true;
    }
    r.per_class.push_back(m);
  }

  r.overall_accuracy = 100.0 * static_cast<double>(trace) / static_cast<double>(total);
  const std::int64_t denom = total * total - chance;
  if (denom == 0) {
    // p_e == 1 forces every pixel into one class on both axes, so p_o == 1 too.
    r.kappa = 1.0;
    r.kappa_degenerate = true;
  } else {
    r.kappa = static_cast<double>(total * trace - chance) / static_cast<double>(denom);
  }
  return r;
}

std::string report_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["n_classes"] = r.confusion.n_classes();
  j["total"] = r.confusion.total();
  j["overall_accuracy"] = r.overall_accuracy;
  j["kappa"] = r.kappa;
  j["kappa_degenerate"] = r.kappa_degenerate;
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    classes.push_back({{"class", c + 1},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"degenerate", m.degenerate}});
  }
  j["per_class"] = classes;
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.confusion.counts.rows(); ++i) {
    std::vector<std::int64_t> row(static_cast<std::size_t>(r.confusion.counts.cols()));
    for (Eigen::Index jdx = 0; jdx < r.confusion.counts.cols(); ++jdx) row[static_cast<std::size_t>(jdx)] = r.confusion.counts(i, jdx);
    rows.push_back(row);
  }
  j["confusion"] = rows;
  return j.dump(2) + "\n";
}

std::string report_table(const EvaluationReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  if (!r.method.empty()) os << r.method << '\n';
  os << std::left << std::setw(8) << "CLASS" << std::setw(11) << "PRECISION" << std::setw(9) << "RECALL" << "F1\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    os << std::setw(8) << (c + 1) << std::setw(11) << m.precision << std::setw(9) << m.recall << m.f1 << '\n';
  }
  os << std::setw(8) << "OA" << r.overall_accuracy << '\n';
  os << std::setw(8) << "KAPPA" << r.kappa << '\n';
  return os.str();
}

std::string comparison_table(std::span<const EvaluationReport> reports, const std::string& title) {
  std::size_t n_classes = 0;
  for (const auto& r : reports) n_classes = std::max(n_classes, r.per_class.size());
  constexpr int kCell = 10;
  constexpr int kGroup = 3 * kCell + 3;

  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << std::left;
  if (!title.empty()) os << title << '\n';
  os << std::setw(8) << "";
  for (const auto& r : reports) os << "| " << std::setw(kGroup - 2) << r.method;
  os << '\n' << std::setw(8) << "CLASS";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    os << "| " << std::setw(kCell) << "PRECISION" << std::setw(kCell) << "RECALL" << std::setw(kCell + 1) << "F1";
  }
  os << '\n';
  for (std::size_t c = 0; c < n_classes; ++c) {
    os << std::setw(8) << (c + 1);
    for (const auto& r : reports) {
      os << "| ";
      if (c < r.per_class.size()) {
        const auto& m = r.per_class[c];
        os << std::setw(kCell) << m.precision << std::setw(kCell) << m.recall << std::setw(kCell + 1) << m.f1;
      } else {
        os << std::setw(kGroup - 2) << "-";
      }
    }
    os << '\n';
  }
  os << std::setw(8) << "OA";
  for (const auto& r : reports) os << "| " << std::setw(kGroup - 2) << r.overall_accuracy;
  os << '\n' << std::setw(8) << "KAPPA";
  for (const auto& r : reports) os << "| " << std::setw(kGroup - 2) << r.kappa;
  os << '\n';
  return os.str();
}

Palette default_palette() {
  return {
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},  {245, 130, 48},  {145, 30, 180},
      {70, 240, 240},  {240, 50, 230},  {210, 245, 60},  {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
      {170, 110, 40},  {255, 250, 200}, {128, 0, 0},     {170, 255, 195},
  };
}

Palette load_palette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open palette " + path.string());
  std::map<int, Rgb> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int label, r, g, b;
    if (!(ls >> label >> r >> g >> b) || label < 1 || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw ValidationError(path.string() + ": bad palette line '" + line + "'");
    }
    entries[label] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
  }
  Palette palette;
  for (const auto& [label, rgb] : entries) {
    if (label != static_cast<int>(palette.size()) + 1) {
      throw ValidationError(path.string() + ": palette labels must be 1..n without gaps");
    }
    palette.push_back(rgb);
  }
  return palette;
}

RgbImage colorize(const LabelRaster& raster, const Palette& palette) {
  if (raster.labels.size() != raster.width * raster.height) throw ValidationError("raster size mismatch");
  RgbImage img;
  img.width = raster.width;
  img.height = raster.height;
  img.pixels.resize(raster.labels.size() * 3);
  for (std::size_t i = 0; i < raster.labels.size(); ++i) {
    const auto label = raster.labels[i];
    Rgb c;
    if (label != 0) {
      if (label > palette.size()) {
        throw ValidationError("label " + std::to_string(label) + " has no palette entry (palette has " +
                              std::to_string(palette.size()) + " colors)");
      }
      c = palette[label - 1];
    }
    img.pixels[3 * i] = c.r;
    img.pixels[3 * i + 1] = c.g;
    img.pixels[3 * i + 2] = c.b;
  }
  return img;
}

void render_map(const LabelRaster& raster, const Palette& palette, const std::filesystem::path& png_path) {
  write_png(png_path, colorize(raster, palette));
}

}  // namespace hsi
