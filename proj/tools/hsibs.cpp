// hsibs: correlation-based hyperspectral band selection and its evaluation
// protocol (PCA / SB baselines, one-vs-rest SVM, OA / kappa, maps).

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsi/cube.hpp"
#include "hsi/error.hpp"
#include "hsi/evaluate.hpp"
#include "hsi/pipeline.hpp"
#include "hsi/synth.hpp"

namespace {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kNumericError = 4 };

/// Run-config flags shared by select/classify/compare. Values are kept as
/// strings and fed through the same parser as config files.
struct RunFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> values;
  std::map<std::string, std::string> storage;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> flags;

  void add(CLI::App* app) {
    app->add_option("--config", config, "flat key = value config file");
    const std::vector<std::pair<std::string, std::string>> opts = {
        {"cube", "cube header (.hdr)"},
        {"ground-truth", "ground-truth header (.hdr)"},
        {"method", "abc | pca | sb"},
        {"threshold", "ABC threshold, bands with ABC below it are kept (default 0.65)"},
        {"pca-k", "principal components kept (default 5)"},
        {"sb-k", "bands chosen by the SB stand-in (default: ABC band count)"},
        {"seed", "split / subsample seed (default 42)"},
        {"train-fraction", "per-class training fraction (default 0.7)"},
        {"kernel", "rbf | linear (default rbf)"},
        {"c", "SVM regularization C (default 1)"},
        {"gamma", "RBF gamma (default 1/(d * mean feature variance))"},
        {"tolerance", "SMO stopping tolerance (default 1e-3)"},
        {"max-iterations", "SMO iteration cap per binary problem"},
        {"cache-mb", "kernel cache size in MiB"},
        {"svm-subsample", "cap on training pixels, stratified (default: none)"},
        {"out-dir", "output directory"},
        {"selection", "reuse a saved selection.txt"},
        {"palette", "palette file: 'label r g b' per line"},
        {"workers", "worker threads (0 = all cores)"},
    };
    for (const auto& [name, help] : opts) options[name] = app->add_option("--" + name, storage[name], help);
    for (const char* name : {"emit-correlation-csv", "full-map"}) {
      flags[name] = false;
      options[name] = app->add_flag(std::string("--") + name, flags[name]);
    }
  }

  hsi::RunConfig build() const {
    hsi::RunConfig c;
    if (!config.empty()) hsi::load_config_into(c, config);
    for (const auto& [name, opt] : options) {
      if (opt->count() == 0) continue;
      if (flags.count(name)) {
        hsi::apply_config_value(c, name, flags.at(name) ? "true" : "false");
      } else {
        hsi::apply_config_value(c, name, storage.at(name));
      }
    }
    return c;
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw hsi::ConfigError("bad seed '" + item + "'");
    }
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-based hyperspectral band selection"};
  app.require_subcommand(1);

  // import
  auto* import_cmd = app.add_subcommand("import", "convert a raw raster dump to the f32 BSQ format");
  std::string import_data, import_out, import_dtype = "u16", import_interleave = "bsq", import_order = "little";
  hsi::RawLayout layout;
  bool import_gt = false;
  std::string import_wavelengths;
  import_cmd->add_option("--data", import_data, "input raw file")->required();
  import_cmd->add_option("--out", import_out, "output header path (.hdr)")->required();
  import_cmd->add_option("--samples", layout.width, "width")->required();
  import_cmd->add_option("--lines", layout.height, "height")->required();
  import_cmd->add_option("--bands", layout.bands, "band count");
  import_cmd->add_option("--dtype", import_dtype, "u8 | u16 | i16 | i32 | f32 | f64");
  import_cmd->add_option("--interleave", import_interleave, "bsq | bil | bip");
  import_cmd->add_option("--byte-order", import_order, "little | big");
  import_cmd->add_option("--offset", layout.header_offset, "bytes to skip at the start");
  import_cmd->add_option("--wavelengths", import_wavelengths, "comma-separated wavelengths (um)");
  import_cmd->add_flag("--ground-truth", import_gt, "input is a single-band label raster");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic labeled cube");
  std::string synth_spec, synth_out = "synthetic";
  std::uint64_t synth_seed = 42;
  synth_cmd->add_option("--spec", synth_spec, "JSON scene description (default: built-in demo scene)");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--out-dir", synth_out, "output directory (cube.hdr, ground_truth.hdr)");

  auto* select_cmd = app.add_subcommand("select", "ABC band selection");
  RunFlags select_flags;
  select_flags.add(select_cmd);

  auto* classify_cmd = app.add_subcommand("classify", "select/extract features, train SVM, evaluate, render");
  RunFlags classify_flags;
  classify_flags.add(classify_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "PCA vs SB vs ABC on one split");
  RunFlags compare_flags;
  compare_flags.add(compare_cmd);
  std::string abc_config, pca_config, sb_config, seeds;
  compare_cmd->add_option("--abc-config", abc_config, "config for the ABC run (overrides --config)");
  compare_cmd->add_option("--pca-config", pca_config, "config for the PCA run");
  compare_cmd->add_option("--sb-config", sb_config, "config for the SB run");
  compare_cmd->add_option("--seeds", seeds, "comma-separated seeds for a sensitivity sweep");

  auto* render_cmd = app.add_subcommand("render", "render a u16 label raster as PNG");
  std::string render_raster, render_out, render_palette;
  render_cmd->add_option("--raster", render_raster, "label raster header (.hdr)")->required();
  render_cmd->add_option("--out", render_out, "output PNG")->required();
  render_cmd->add_option("--palette", render_palette, "palette file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*import_cmd) {
      layout.type = hsi::parse_sample_type(import_dtype);
      layout.interleave = hsi::parse_interleave(import_interleave);
      if (import_order != "little" && import_order != "big") throw hsi::ConfigError("byte order must be little or big");
      layout.big_endian = import_order == "big";
      if (import_gt) {
        layout.bands = 1;
        const auto gt = hsi::import_ground_truth(import_data, layout);
        hsi::save_ground_truth(gt, import_out);
        std::cout << "wrote " << import_out << " (" << gt.width << "x" << gt.height << ", " << gt.n_classes
                  << " classes)\n";
      } else {
        auto cube = hsi::import_cube(import_data, layout);
        if (!import_wavelengths.empty()) {
          std::stringstream ss(import_wavelengths);
          std::string item;
          while (std::getline(ss, item, ',')) {
            try {
              cube.wavelengths.push_back(std::stod(item));
            } catch (const std::exception&) {
              throw hsi::ConfigError("bad wavelength '" + item + "'");
            }
          }
        }
        hsi::save_cube(cube, import_out);
        std::cout << "wrote " << import_out << " (" << cube.width << "x" << cube.height << "x" << cube.n_bands()
                  << ")\n";
      }
    } else if (*synth_cmd) {
      hsi::SyntheticSpec spec = hsi::demo_spec();
      if (!synth_spec.empty()) {
        std::ifstream in(synth_spec);
        if (!in) throw hsi::ConfigError("cannot open " + synth_spec);
        std::stringstream buf;
        buf << in.rdbuf();
        spec = hsi::synthetic_spec_from_json(buf.str());
      }
      const auto [cube, gt] = hsi::synthesize_cube(spec, synth_seed);
      fs::create_directories(synth_out);
      hsi::save_cube(cube, fs::path(synth_out) / "cube.hdr");
      hsi::save_ground_truth(gt, fs::path(synth_out) / "ground_truth.hdr");
      std::cout << "wrote " << synth_out << "/cube.hdr (" << cube.width << "x" << cube.height << "x"
                << cube.n_bands() << ") and ground_truth.hdr (" << gt.n_classes << " classes)\n";
    } else if (*select_cmd) {
      const auto r = hsi::run_select(select_flags.build());
      std::cout << r.selection.selected.size() << " of " << r.selection.n_bands_total << " bands selected ("
                << r.selection.method << "):";
      for (auto b : r.selection.selected) std::cout << ' ' << b;
      std::cout << '\n';
    } else if (*classify_cmd) {
      const auto r = hsi::run_classify(classify_flags.build());
      std::cout << hsi::report_table(r.report);
    } else if (*compare_cmd) {
      const hsi::RunConfig base = compare_flags.build();
      std::vector<hsi::RunConfig> configs = hsi::method_configs(base);
      auto override_with = [&](const std::string& path, const char* method) {
        if (path.empty()) return;
        hsi::RunConfig c = hsi::load_config(path);
        c.method = method;
        if (c.out_dir == hsi::RunConfig{}.out_dir) c.out_dir = base.out_dir / method;
        for (auto& existing : configs) {
          if (existing.method == method) existing = c;
        }
      };
      override_with(abc_config, "abc");
      override_with(pca_config, "pca");
      override_with(sb_config, "sb");
      if (!seeds.empty()) {
        std::cout << hsi::run_seed_sweep(configs, parse_seeds(seeds), base.out_dir);
      } else {
        std::cout << hsi::run_compare(configs, base.out_dir).table;
      }
    } else if (*render_cmd) {
      const auto raster = hsi::load_label_raster(render_raster);
      const auto palette = render_palette.empty() ? hsi::default_palette() : hsi::load_palette(render_palette);
      hsi::render_map(raster, palette, render_out);
      std::cout << "wrote " << render_out << '\n';
    }
  } catch (const hsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const hsi::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const hsi::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}
