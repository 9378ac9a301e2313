#include "hsi/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "hsi/error.hpp"

namespace hsi {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string key) {
  key = trim(key);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '_' || c == ' ' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (key.rfind("--", 0) == 0) key.erase(0, 2);
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config '" + key + "': expected a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config '" + key + "': expected a boolean, got '" + v + "'");
}

fs::path to_path(const std::string& v, const fs::path& base) {
  fs::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

}  // namespace

void apply_config_value(RunConfig& c, const std::string& raw_key, const std::string& raw_value, const fs::path& base) {
  const std::string key = normalize_key(raw_key);
  const std::string v = trim(raw_value);
  if (key == "cube") c.cube = to_path(v, base);
  else if (key == "ground-truth" || key == "gt") c.ground_truth = to_path(v, base);
  else if (key == "method") c.method = v;
  else if (key == "threshold") c.threshold = to_double(key, v);
  else if (key == "pca-k") c.pca_k = to_uint(key, v);
  else if (key == "sb-k") c.sb_k = v.empty() ? std::nullopt : std::optional<std::size_t>(to_uint(key, v));
  else if (key == "train-fraction") c.train_fraction = to_double(key, v);
  else if (key == "seed") c.seed = to_uint(key, v);
  else if (key == "kernel") c.svm.kernel = parse_kernel(v);
  else if (key == "c") c.svm.c = to_double(key, v);
  else if (key == "gamma") c.svm.gamma = (v.empty() || v == "auto") ? std::nullopt : std::optional<double>(to_double(key, v));
  else if (key == "tolerance") c.svm.tolerance = to_double(key, v);
  else if (key == "max-iterations") c.svm.max_iterations = to_uint(key, v);
  else if (key == "cache-mb") c.svm.cache_mb = to_uint(key, v);
  else if (key == "svm-subsample") c.svm_subsample = to_uint(key, v);
  else if (key == "out-dir") c.out_dir = to_path(v, base);
  else if (key == "selection") c.selection = v.empty() ? fs::path{} : to_path(v, base);
  else if (key == "palette") c.palette = v.empty() ? fs::path{} : to_path(v, base);
  else if (key == "emit-correlation-csv") c.emit_correlation_csv = to_bool(key, v);
  else if (key == "full-map") c.full_map = to_bool(key, v);
  else if (key == "workers") c.workers = static_cast<int>(to_uint(key, v));
  else throw ConfigError("unknown config key '" + raw_key + "'");
}

void load_config_into(RunConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  const fs::path base = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_config_value(config, t.substr(0, eq), t.substr(eq + 1), base);
  }
}

RunConfig load_config(const fs::path& path) {
  RunConfig c;
  load_config_into(c, path);
  return c;
}

void validate_config(const RunConfig& c, bool require_inputs) {
  if (c.method != "abc" && c.method != "pca" && c.method != "sb") {
    throw ConfigError("method must be abc, pca or sb, got '" + c.method + "'");
  }
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  if (c.pca_k == 0) throw ConfigError("pca-k must be positive");
  if (c.sb_k && *c.sb_k == 0) throw ConfigError("sb-k must be positive");
  if (!(c.svm.c > 0.0)) throw ConfigError("C must be positive");
  if (c.svm.gamma && !(*c.svm.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(c.svm.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (c.svm.max_iterations == 0) throw ConfigError("max-iterations must be positive");
  if (require_inputs) {
    if (c.cube.empty() || !fs::exists(c.cube)) throw ConfigError("cube header not found: '" + c.cube.string() + "'");
    if (c.ground_truth.empty() || !fs::exists(c.ground_truth)) {
      throw ConfigError("ground-truth header not found: '" + c.ground_truth.string() + "'");
    }
    if (!c.selection.empty() && !fs::exists(c.selection)) {
      throw ConfigError("selection file not found: '" + c.selection.string() + "'");
    }
  }
}

}  // namespace hsi
