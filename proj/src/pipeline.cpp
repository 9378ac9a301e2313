#include "hsi/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hsi/error.hpp"
#include "hsi/parallel.hpp"
#include "hsi/split.hpp"
#include "hsi/svm.hpp"

namespace hsi {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Runs named stages, records wall time and prefixes errors with the stage.
class StageRunner {
 public:
  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      timings_[name] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record();
      } else {
        auto result = f();
        record();
        return result;
      }
    } catch (const ConfigError& e) {
      throw ConfigError(name + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError(name + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(name + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError(name + ": " + e.what());
    }
  }

  const json& timings() const { return timings_; }

 private:
  json timings_ = json::object();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

json config_json(const RunConfig& c) {
  json j;
  j["cube"] = c.cube.string();
  j["ground_truth"] = c.ground_truth.string();
  j["method"] = c.method;
  j["threshold"] = c.threshold;
  j["pca_k"] = c.pca_k;
  j["sb_k"] = c.sb_k ? json(*c.sb_k) : json(nullptr);
  j["train_fraction"] = c.train_fraction;
  j["seed"] = c.seed;
  j["kernel"] = to_string(c.svm.kernel);
  j["c"] = c.svm.c;
  j["gamma"] = c.svm.gamma ? json(*c.svm.gamma) : json("auto");
  j["tolerance"] = c.svm.tolerance;
  j["max_iterations"] = c.svm.max_iterations;
  j["cache_mb"] = c.svm.cache_mb;
  j["svm_subsample"] = c.svm_subsample;
  j["out_dir"] = c.out_dir.string();
  j["selection"] = c.selection.string();
  j["emit_correlation_csv"] = c.emit_correlation_csv;
  j["full_map"] = c.full_map;
  j["workers"] = c.workers;
  return j;
}

json preprocessing_json(const PreparedData& d) {
  json j;
  j["order"] = "mask_background -> standardize";
  j["standardization"] = "per-band z-score over non-background pixels, population variance";
  j["n_pixels"] = d.pixels.n_pixels();
  j["n_bands"] = d.pixels.n_bands();
  j["n_classes"] = d.ground_truth.n_classes;
  std::vector<std::size_t> zero_var;
  for (std::size_t b = 0; b < d.stats.zero_variance.size(); ++b) {
    if (d.stats.zero_variance[b]) zero_var.push_back(b);
  }
  j["zero_variance_bands"] = zero_var;
  j["zero_variance_policy"] = "kept as zeros; correlation against them defined as 0";
  return j;
}

json selection_json(const BandSelection& sel) {
  json j;
  j["method"] = sel.method;
  if (sel.threshold) j["threshold"] = *sel.threshold;
  j["n_selected"] = sel.selected.size();
  j["selected"] = sel.selected;
  j["parameters"] = sel.parameters;
  return j;
}

const char* display_name(const std::string& method) {
  if (method == "abc") return "PROPOSED (ABC)";
  if (method == "pca") return "PCA";
  return "SB (greedy stand-in)";
}

void set_workers(const RunConfig& c) { set_worker_count(c.workers); }

PreparedData prepare_staged(const RunConfig& config, StageRunner& stages) {
  PreparedData d;
  const HyperspectralCube cube = stages.run("load_cube", [&] { return load_cube(config.cube); });
  d.ground_truth = stages.run("load_ground_truth", [&] { return load_ground_truth(config.ground_truth); });
  d.wavelengths = cube.wavelengths;
  const PixelMatrix masked = stages.run("mask_background", [&] { return mask_background(cube, d.ground_truth); });
  auto [pixels, stats] = stages.run("standardize", [&] { return standardize(masked); });
  d.pixels = std::move(pixels);
  d.stats = std::move(stats);
  return d;
}

void check_selection_fits(const BandSelection& sel, std::size_t n_bands) {
  for (auto b : sel.selected) {
    if (b >= n_bands) {
      throw ValidationError("saved selection refers to band " + std::to_string(b) + " but the cube has " +
                            std::to_string(n_bands) + " bands");
    }
  }
}

struct Features {
  PixelMatrix pixels;
  std::optional<BandSelection> selection;
  std::optional<PcaModel> pca;
  std::optional<std::size_t> abc_band_count;
};

Features build_features(const RunConfig& config, const PreparedData& data, std::optional<std::size_t> sb_k,
                        StageRunner& stages) {
  Features f;
  if (config.method == "pca") {
    f.pca = stages.run("pca_fit", [&] { return pca_fit(data.pixels, config.pca_k); });
    f.pixels = stages.run("pca_transform", [&] { return pca_transform(data.pixels, *f.pca); });
    return f;
  }

  if (!config.selection.empty()) {
    f.selection = stages.run("load_selection", [&] { return load_selection(config.selection); });
    check_selection_fits(*f.selection, data.pixels.n_bands());
  } else {
    const CorrelationMatrix cm = stages.run("correlation_matrix", [&] { return correlation_matrix(data.pixels); });
    const AbcVector abc = stages.run("average_band_correlation", [&] { return average_band_correlation(cm); });
    if (config.method == "abc") {
      f.selection = stages.run("select_bands", [&] { return select_bands_by_abc(abc, config.threshold); });
      f.abc_band_count = f.selection->selected.size();
    } else {
      std::size_t k = 0;
      if (sb_k) {
        k = *sb_k;
      } else if (config.sb_k) {
        k = *config.sb_k;
      } else {
        k = stages.run("select_bands", [&] { return select_bands_by_abc(abc, config.threshold); }).selected.size();
        f.abc_band_count = k;
      }
      f.selection = stages.run("sb_select", [&] { return sb_select(cm, k); });
    }
  }
  f.pixels = stages.run("extract_bands", [&] { return extract_bands(data.pixels, *f.selection); });
  return f;
}

LabelRaster scatter(const PixelMatrix& pm, std::span<const std::size_t> rows, std::span<const std::uint16_t> labels) {
  LabelRaster r;
  r.width = pm.image_width;
  r.height = pm.image_height;
  r.labels.assign(r.width * r.height, 0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& c = pm.coords[rows[k]];
    r.labels[c.row * r.width + c.col] = labels[k];
  }
  return r;
}

std::vector<std::uint16_t> gather(std::span<const std::uint16_t> v, std::span<const std::size_t> idx) {
  std::vector<std::uint16_t> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

ClassifyResult classify_prepared(const RunConfig& config, const PreparedData& data, std::optional<std::size_t> sb_k,
                                 StageRunner& stages, json manifest_prefix) {
  ensure_dir(config.out_dir);
  ClassifyResult result;
  Features features = build_features(config, data, sb_k, stages);
  result.selection = features.selection;
  result.pca = features.pca;
  result.n_features = features.pixels.n_bands();

  const auto& labels = features.pixels.labels;
  const SplitIndices split =
      stages.run("split", [&] { return stratified_split(labels, config.train_fraction, config.seed); });
  const std::vector<std::size_t> train_rows =
      stages.run("subsample", [&] { return stratified_subsample(split.train, labels, config.svm_subsample, config.seed); });

  const Eigen::MatrixXd train_x = features.pixels.values(train_rows, Eigen::all);
  const std::vector<std::uint16_t> train_y = gather(labels, train_rows);
  const SvmModel model = stages.run("svm_train", [&] { return svm_train(train_x, train_y, config.svm); });
  result.gamma = model.gamma;

  std::vector<std::size_t> predict_rows = split.test;
  if (config.full_map) {
    predict_rows.resize(features.pixels.n_pixels());
    for (std::size_t i = 0; i < predict_rows.size(); ++i) predict_rows[i] = i;
  }
  const Eigen::MatrixXd predict_x = features.pixels.values(predict_rows, Eigen::all);
  const std::vector<std::uint16_t> predicted = stages.run("svm_predict", [&] { return svm_predict(model, predict_x); });

  std::vector<std::uint16_t> test_pred;
  if (config.full_map) {
    test_pred = gather(predicted, split.test);
  } else {
    test_pred = predicted;
  }
  const std::vector<std::uint16_t> test_truth = gather(labels, split.test);
  result.report = stages.run("evaluate", [&] {
    return report(confusion(test_truth, test_pred, data.ground_truth.n_classes), config.method);
  });
  result.predictions = scatter(features.pixels, predict_rows, predicted);
  result.report_json = report_json(result.report);

  stages.run("write_outputs", [&] {
    const Palette palette = config.palette.empty() ? default_palette() : load_palette(config.palette);
    write_text(config.out_dir / "report.json", result.report_json);
    write_text(config.out_dir / "report.txt", report_table(result.report));
    save_label_raster(result.predictions, config.out_dir / "predictions.hdr", data.ground_truth.n_classes);
    render_map(result.predictions, palette, config.out_dir / (config.full_map ? "map_full.png" : "map.png"));
    LabelRaster gt_raster{data.ground_truth.width, data.ground_truth.height, data.ground_truth.labels};
    render_map(gt_raster, palette, config.out_dir / "ground_truth.png");
    save_svm_model(model, config.out_dir / "svm_model.json");
    if (result.selection && config.selection.empty()) save_selection(*result.selection, config.out_dir / "selection.txt");
    if (result.pca) save_pca_model(*result.pca, config.out_dir / "pca_model.json");
  });

  json m = std::move(manifest_prefix);
  m["tool_version"] = kToolVersion;
  m["command"] = "classify";
  m["config"] = config_json(config);
  m["preprocessing"] = preprocessing_json(data);
  if (result.selection) m["selection"] = selection_json(*result.selection);
  if (features.abc_band_count) m["abc_band_count"] = *features.abc_band_count;
  if (result.pca) {
    m["pca"] = {{"n_components", result.pca->n_components()},
                {"cumulative_variance_ratio", result.pca->cumulative_variance_ratio},
                {"eigenvalues", std::vector<double>(result.pca->eigenvalues.data(),
                                                    result.pca->eigenvalues.data() + result.pca->eigenvalues.size())}};
  }
  m["n_features"] = result.n_features;
  m["split"] = {{"train", split.train.size()},
                {"test", split.test.size()},
                {"train_used", train_rows.size()},
                {"stratified", true},
                {"prng", "splitmix64, one stream per class label"}};
  m["svm"] = {{"kernel", to_string(model.kernel)},
              {"gamma", model.gamma},
              {"gamma_source", config.svm.gamma ? "config" : "1/(d * mean feature variance)"},
              {"c", model.c},
              {"tolerance", model.tolerance},
              {"scheme", "one-vs-rest, argmax decision value"},
              {"support_vectors", model.support_vectors.rows()},
              {"iterations", model.iterations},
              {"converged", model.all_converged()}};
  m["metrics"] = {{"overall_accuracy", result.report.overall_accuracy}, {"kappa", result.report.kappa}};
  m["map"] = config.full_map ? "all labeled pixels" : "test pixels only";
  m["timings_ms"] = stages.timings();
  result.manifest_json = m.dump(2) + "\n";
  write_text(config.out_dir / "manifest.json", result.manifest_json);
  return result;
}

}  // namespace

PreparedData prepare(const RunConfig& config) {
  StageRunner stages;
  return prepare_staged(config, stages);
}

SelectResult run_select(const RunConfig& config) {
  validate_config(config);
  if (config.method == "pca") throw ConfigError("select: pca is feature extraction, not band selection; use classify");
  set_workers(config);
  ensure_dir(config.out_dir);

  StageRunner stages;
  const PreparedData data = prepare_staged(config, stages);
  SelectResult r;
  r.correlation = stages.run("correlation_matrix", [&] { return correlation_matrix(data.pixels); });
  r.abc = stages.run("average_band_correlation", [&] { return average_band_correlation(r.correlation); });
  std::optional<std::size_t> abc_count;
  if (config.method == "abc") {
    r.selection = stages.run("select_bands", [&] { return select_bands_by_abc(r.abc, config.threshold); });
  } else {
    std::size_t k = 0;
    if (config.sb_k) {
      k = *config.sb_k;
    } else {
      k = stages.run("select_bands", [&] { return select_bands_by_abc(r.abc, config.threshold); }).selected.size();
      abc_count = k;
    }
    r.selection = stages.run("sb_select", [&] { return sb_select(r.correlation, k); });
  }

  stages.run("write_outputs", [&] {
    save_selection(r.selection, config.out_dir / "selection.txt");
    write_abc_csv(config.out_dir / "abc.csv", r.abc);
    if (config.emit_correlation_csv) write_matrix_csv(config.out_dir / "correlation.csv", r.correlation.values);
  });

  json m;
  m["tool_version"] = kToolVersion;
  m["command"] = "select";
  m["config"] = config_json(config);
  m["preprocessing"] = preprocessing_json(data);
  m["selection"] = selection_json(r.selection);
  if (abc_count) m["abc_band_count"] = *abc_count;
  m["accumulation"] = "f64, sequential index order per band pair";
  m["timings_ms"] = stages.timings();
  r.manifest_json = m.dump(2) + "\n";
  write_text(config.out_dir / "select_manifest.json", r.manifest_json);
  return r;
}

ClassifyResult run_classify(const RunConfig& config) {
  validate_config(config);
  set_workers(config);
  StageRunner stages;
  const PreparedData data = prepare_staged(config, stages);
  return classify_prepared(config, data, std::nullopt, stages, json::object());
}

std::vector<RunConfig> method_configs(const RunConfig& base) {
  std::vector<RunConfig> out;
  for (const char* method : {"abc", "pca", "sb"}) {
    RunConfig c = base;
    c.method = method;
    c.out_dir = base.out_dir / method;
    if (c.method == "pca") c.selection.clear();
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

const RunConfig& find_method(std::span<const RunConfig> configs, const std::string& method) {
  const RunConfig* found = nullptr;
  for (const auto& c : configs) {
    if (c.method == method) {
      if (found) throw ConfigError("compare: more than one '" + method + "' config");
      found = &c;
    }
  }
  if (!found) throw ConfigError("compare: missing a config with method '" + method + "'");
  return *found;
}

void check_comparable(const RunConfig& a, const RunConfig& b) {
  auto refuse = [&](const std::string& what) {
    throw ConfigError("compare: '" + a.method + "' and '" + b.method + "' configs use different " + what +
                      "; the comparison would be invalid");
  };
  if (a.seed != b.seed) refuse("seeds (" + std::to_string(a.seed) + " vs " + std::to_string(b.seed) + ")");
  if (fs::weakly_canonical(a.cube) != fs::weakly_canonical(b.cube)) refuse("cubes");
  if (fs::weakly_canonical(a.ground_truth) != fs::weakly_canonical(b.ground_truth)) refuse("ground truths");
  if (a.train_fraction != b.train_fraction) refuse("train fractions");
  if (a.svm_subsample != b.svm_subsample) refuse("training subsample caps");
}

}  // namespace

CompareResult run_compare(std::span<const RunConfig> configs, const fs::path& out_dir) {
  if (configs.size() != 3) throw ConfigError("compare: expected exactly three configs (abc, pca, sb)");
  const RunConfig& abc_cfg = find_method(configs, "abc");
  const RunConfig& pca_cfg = find_method(configs, "pca");
  const RunConfig& sb_cfg = find_method(configs, "sb");
  check_comparable(abc_cfg, pca_cfg);
  check_comparable(abc_cfg, sb_cfg);
  for (const auto& c : configs) validate_config(c);
  set_workers(abc_cfg);
  ensure_dir(out_dir);

  StageRunner prep;
  const PreparedData data = prepare_staged(abc_cfg, prep);

  CompareResult out;
  StageRunner abc_stages = prep;
  const ClassifyResult abc = classify_prepared(abc_cfg, data, std::nullopt, abc_stages, json::object());
  out.abc_band_count = abc.selection->selected.size();
  out.sb_k = sb_cfg.sb_k.value_or(out.abc_band_count);

  StageRunner pca_stages = prep;
  const ClassifyResult pca = classify_prepared(pca_cfg, data, std::nullopt, pca_stages, json::object());
  out.pca_cumulative_variance = pca.pca->cumulative_variance_ratio;

  StageRunner sb_stages = prep;
  RunConfig sb_run = sb_cfg;
  sb_run.selection.clear();
  json sb_prefix;
  sb_prefix["sb_k_source"] = sb_cfg.sb_k ? "config" : "ABC band count";
  const ClassifyResult sb = classify_prepared(sb_run, data, out.sb_k, sb_stages, sb_prefix);

  // Column order: PCA, SB, proposed.
  for (const ClassifyResult* r : {&pca, &sb, &abc}) {
    EvaluationReport rep = r->report;
    rep.method = display_name(r->report.method);
    out.reports.push_back(std::move(rep));
  }
  std::ostringstream title;
  title << "dataset: " << abc_cfg.cube.filename().string() << "  seed: " << abc_cfg.seed
        << "  ABC bands: " << out.abc_band_count << "  SB k: " << out.sb_k << "  PCA k: " << pca_cfg.pca_k
        << " (cumulative variance " << std::fixed << std::setprecision(2) << 100.0 * out.pca_cumulative_variance
        << "%)";
  out.table = comparison_table(out.reports, title.str());

  json j;
  j["tool_version"] = kToolVersion;
  j["dataset"] = abc_cfg.cube.string();
  j["seed"] = abc_cfg.seed;
  j["train_fraction"] = abc_cfg.train_fraction;
  j["abc_band_count"] = out.abc_band_count;
  j["sb_k"] = out.sb_k;
  j["pca_k"] = pca_cfg.pca_k;
  j["pca_cumulative_variance_ratio"] = out.pca_cumulative_variance;
  j["sb_note"] = "sb-greedy is a greedy max-min dissimilarity stand-in, not the original similarity-based method";
  auto methods = json::array();
  for (const ClassifyResult* r : {&pca, &sb, &abc}) {
    methods.push_back({{"method", r->report.method},
                       {"n_features", r->n_features},
                       {"overall_accuracy", r->report.overall_accuracy},
                       {"kappa", r->report.kappa},
                       {"out_dir", (r == &pca ? pca_cfg : r == &sb ? sb_cfg : abc_cfg).out_dir.string()}});
  }
  j["methods"] = methods;
  out.json = j.dump(2) + "\n";
  write_text(out_dir / "compare.txt", out.table);
  write_text(out_dir / "compare.json", out.json);
  return out;
}

std::string run_seed_sweep(std::span<const RunConfig> configs, std::span<const std::uint64_t> seeds,
                           const fs::path& out_dir) {
  if (seeds.empty()) throw ConfigError("seed sweep: no seeds given");
  std::map<std::string, std::vector<double>> oa;
  std::vector<std::string> order;
  for (auto seed : seeds) {
    std::vector<RunConfig> run = {configs.begin(), configs.end()};
    const fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
    for (auto& c : run) {
      c.seed = seed;
      c.out_dir = seed_dir / c.method;
    }
    const CompareResult r = run_compare(run, seed_dir);
    for (const auto& rep : r.reports) {
      if (!oa.count(rep.method)) order.push_back(rep.method);
      oa[rep.method].push_back(rep.overall_accuracy);
    }
  }

  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "OA over " << seeds.size() << " seed(s)\n";
  json j;
  j["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  for (const auto& method : order) {
    const auto& v = oa[method];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    os << std::left << std::setw(24) << method << " mean " << mean << "  sd " << sd << "  min "
       << *std::min_element(v.begin(), v.end()) << "  max " << *std::max_element(v.begin(), v.end()) << '\n';
    j["methods"][method] = {{"overall_accuracy", v}, {"mean", mean}, {"sd", sd}};
  }
  write_text(out_dir / "compare_seeds.txt", os.str());
  write_text(out_dir / "compare_seeds.json", j.dump(2) + "\n");
  return os.str();
}

}  // namespace hsi
