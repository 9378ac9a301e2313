#include <doctest.h>

#include <nlohmann/json.hpp>

#include "hsi/error.hpp"
#include "hsi/pipeline.hpp"
#include "hsi/synth.hpp"
#include "test_util.hpp"

using namespace hsi;
namespace fs = std::filesystem;

namespace {

/// Writes the demo scene into `dir` and returns a config pointing at it.
RunConfig demo_config(const testutil::TempDir& dir, const SyntheticSpec& spec = demo_spec()) {
  const auto [cube, gt] = synthesize_cube(spec, 3);
  save_cube(cube, dir / "cube.hdr");
  save_ground_truth(gt, dir / "gt.hdr");
  RunConfig cfg;
  cfg.cube = dir / "cube.hdr";
  cfg.ground_truth = dir / "gt.hdr";
  cfg.out_dir = dir / "out";
  return cfg;
}

}  // namespace

TEST_CASE("select keeps the independent bands of the demo scene") {
  testutil::TempDir dir;
  RunConfig cfg = demo_config(dir);
  cfg.emit_correlation_csv = true;
  const auto res = run_select(cfg);
  CHECK(res.selection.selected == std::vector<std::size_t>{6, 7, 8, 9});
  CHECK(fs::exists(cfg.out_dir / "selection.txt"));
  CHECK(fs::exists(cfg.out_dir / "selection.json"));
  CHECK(fs::exists(cfg.out_dir / "abc.csv"));
  CHECK(fs::exists(cfg.out_dir / "correlation.csv"));
  CHECK(fs::exists(cfg.out_dir / "select_manifest.json"));

  cfg.threshold = 1.0;
  CHECK(run_select(cfg).selection.selected.size() == 10);

  cfg.method = "pca";
  CHECK_THROWS_AS(run_select(cfg), ConfigError);
}

TEST_CASE("classify on a well separated scene") {
  testutil::TempDir dir;
  SyntheticSpec spec = demo_spec();
  for (auto& g : spec.groups) g.class_means *= 3.0;
  RunConfig cfg = demo_config(dir, spec);
  const auto res = run_classify(cfg);
  CHECK(res.report.overall_accuracy >= 99.0);
  CHECK(res.n_features == res.selection->selected.size());
  for (const char* f : {"report.json", "report.txt", "predictions.hdr", "predictions.raw", "map.png",
                        "ground_truth.png", "svm_model.json", "svm_model.raw", "selection.txt", "manifest.json"})
    CHECK_MESSAGE(fs::exists(cfg.out_dir / f), f);

  const auto pred = load_label_raster(cfg.out_dir / "predictions.hdr");
  const auto gt = load_ground_truth(cfg.ground_truth);
  for (std::size_t i = 0; i < gt.labels.size(); ++i)
    if (gt.labels[i] == 0) CHECK(pred.labels[i] == 0);

  cfg.method = "pca";
  cfg.out_dir = dir / "pca";
  const auto pca = run_classify(cfg);
  CHECK(pca.n_features == 5);
  CHECK(fs::exists(cfg.out_dir / "pca_model.json"));
}

TEST_CASE("classify output does not depend on the worker count") {
  testutil::TempDir dir;
  RunConfig cfg = demo_config(dir);
  cfg.workers = 1;
  cfg.out_dir = dir / "w1";
  const auto a = run_classify(cfg);
  cfg.workers = 8;
  cfg.out_dir = dir / "w8";
  const auto b = run_classify(cfg);
  CHECK(a.report_json == b.report_json);
  CHECK(testutil::read_bytes(dir / "w1" / "report.json") == testutil::read_bytes(dir / "w8" / "report.json"));
  CHECK(testutil::read_bytes(dir / "w1" / "predictions.raw") == testutil::read_bytes(dir / "w8" / "predictions.raw"));
  CHECK(testutil::read_bytes(dir / "w1" / "map.png") == testutil::read_bytes(dir / "w8" / "map.png"));
}

TEST_CASE("classify reuses a saved selection") {
  testutil::TempDir dir;
  RunConfig cfg = demo_config(dir);
  run_select(cfg);
  RunConfig reuse = cfg;
  reuse.selection = cfg.out_dir / "selection.txt";
  reuse.out_dir = dir / "reuse";
  const auto a = run_classify(reuse);
  cfg.out_dir = dir / "fresh";
  const auto b = run_classify(cfg);
  CHECK(a.selection->selected == b.selection->selected);
  CHECK(a.report.overall_accuracy == b.report.overall_accuracy);
}

TEST_CASE("compare runs three methods on one split") {
  testutil::TempDir dir;
  const RunConfig base = demo_config(dir);
  const auto configs = method_configs(base);
  const auto res = run_compare(configs, dir / "out");
  REQUIRE(res.reports.size() == 3);
  CHECK(res.reports[0].method == "PCA");
  CHECK(res.reports[2].method == "PROPOSED (ABC)");
  CHECK(res.sb_k == res.abc_band_count);
  CHECK(res.abc_band_count == 4);
  CHECK(fs::exists(dir / "out" / "compare.txt"));
  const auto j = nlohmann::json::parse(testutil::read_bytes(dir / "out" / "compare.json"));
  CHECK(j.at("methods").size() == 3);

  auto bad = configs;
  bad[1].seed = 7;
  CHECK_THROWS_AS(run_compare(bad, dir / "out"), ConfigError);
  std::vector<RunConfig> two(configs.begin(), configs.begin() + 2);
  CHECK_THROWS_AS(run_compare(two, dir / "out"), ConfigError);
}

TEST_CASE("seed sweep summarizes every method") {
  testutil::TempDir dir;
  const auto configs = method_configs(demo_config(dir));
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto table = run_seed_sweep(configs, seeds, dir / "out");
  CHECK(table.find("PCA") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "compare_seeds.json"));
}

TEST_CASE("config files") {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "run.cfg", "# demo\ncube = data/c.hdr\nthreshold = 0.5\npca_k = 3\nseed = 9\nkernel = linear\n");
  const auto cfg = load_config(dir / "run.cfg");
  CHECK(cfg.cube == dir / "data/c.hdr");
  CHECK(cfg.threshold == 0.5);
  CHECK(cfg.pca_k == 3);
  CHECK(cfg.seed == 9);
  CHECK(cfg.svm.kernel == KernelType::linear);

  RunConfig c;
  CHECK_THROWS_AS(apply_config_value(c, "no-such-key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_config_value(c, "threshold", "abc"), ConfigError);
  apply_config_value(c, "--train_fraction", "0.5");
  CHECK(c.train_fraction == 0.5);
  apply_config_value(c, "gamma", "auto");
  CHECK_FALSE(c.svm.gamma.has_value());
  c.svm.c = -1;
  CHECK_THROWS_AS(validate_config(c, false), ConfigError);
  CHECK_THROWS_AS(validate_config(RunConfig{}, true), Error);
}

TEST_CASE("pipeline errors name the stage") {
  testutil::TempDir dir;
  RunConfig cfg = demo_config(dir);
  cfg.cube = dir / "missing.hdr";
  CHECK_THROWS_AS(run_classify(cfg), Error);
}
