#include "hsi/svm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <list>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hsi/error.hpp"

namespace hsi {

namespace fs = std::filesystem;

KernelType parse_kernel(const std::string& name) {
  if (name == "rbf") return KernelType::rbf;
  if (name == "linear") return KernelType::linear;
  throw ConfigError("unknown kernel '" + name + "' (expected rbf or linear)");
}

std::string to_string(KernelType kernel) { return kernel == KernelType::rbf ? "rbf" : "linear"; }

double default_gamma(const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n == 0 || d == 0) return 1.0;
  double var_sum = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = features.col(j).mean();
    var_sum += (features.col(j).array() - mean).square().sum() / static_cast<double>(n);
  }
  const double mean_var = var_sum / static_cast<double>(d);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0;
}

double Kernel::operator()(const double* x, const double* z, std::size_t d) const {
  if (type == KernelType::linear) {
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += x[k] * z[k];
    return dot;
  }
  double dist = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = x[k] - z[k];
    dist += diff * diff;
  }
  return std::exp(-gamma * dist);
}

namespace {

constexpr double kTau = 1e-12;

class KernelRowCache {
 public:
  KernelRowCache(const RowMatrixXd& x, const Kernel& kernel, std::size_t capacity)
      : x_(x), kernel_(kernel),
        capacity_(std::max<std::size_t>(std::min<std::size_t>(capacity, static_cast<std::size_t>(x.rows())), 2)) {
    slots_.reserve(capacity_);  // row references stay valid while slots are added
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.position);
      return slots_[it->second.slot];
    }
    std::size_t slot;
    if (slots_.size() < capacity_) {
      slot = slots_.size();
      slots_.emplace_back(static_cast<std::size_t>(x_.rows()));
    } else {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      slot = index_.at(victim).slot;
      index_.erase(victim);
    }
    fill(i, slots_[slot]);
    lru_.push_front(i);
    index_.emplace(i, Entry{slot, lru_.begin()});
    return slots_[slot];
  }

 private:
  struct Entry {
    std::size_t slot;
    std::list<std::size_t>::iterator position;
  };

  void fill(std::size_t i, std::vector<double>& out) const {
    const auto d = static_cast<std::size_t>(x_.cols());
    const double* xi = x_.row(static_cast<Eigen::Index>(i)).data();
    for (Eigen::Index t = 0; t < x_.rows(); ++t) out[static_cast<std::size_t>(t)] = kernel_(xi, x_.row(t).data(), d);
  }

  const RowMatrixXd& x_;
  Kernel kernel_;
  std::size_t capacity_;
  std::vector<std::vector<double>> slots_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, Entry> index_;
};

}  // namespace

BinarySolution solve_binary_svm(const RowMatrixXd& x, std::span<const int> y, const Kernel& kernel, double c,
                                double tolerance, std::size_t max_iterations, std::size_t cache_rows) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (y.size() != n) throw ValidationError("SVM: label count does not match sample count");
  if (!(c > 0.0)) throw ConfigError("SVM: C must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("SVM: tolerance must be positive");

  KernelRowCache cache(x, kernel, cache_rows);
  std::vector<double> diag(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double* xt = x.row(static_cast<Eigen::Index>(t)).data();
    diag[t] = kernel(xt, xt, d);
  }

  BinarySolution sol;
  sol.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  auto& alpha = sol.alpha;
  // Gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
  std::vector<double> grad(n, -1.0);
  auto at_upper = [&](std::size_t t) { return alpha(static_cast<Eigen::Index>(t)) >= c; };
  auto at_lower = [&](std::size_t t) { return alpha(static_cast<Eigen::Index>(t)) <= 0.0; };

  while (sol.iterations < max_iterations) {
    // Working set: i maximizes -y_t G_t over I_up, j minimizes the second
    // order objective decrease over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    if (i == n) {
      sol.converged = true;
      break;
    }

    const std::vector<double>& ki = cache.row(i);
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y[t] == 1) {
        if (at_lower(t)) continue;
        grad_diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
      } else {
        if (at_upper(t)) continue;
        grad_diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
      }
      if (grad_diff > 0.0) {
        const double quad = diag[i] + diag[t] - 2.0 * ki[t];
        const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < tolerance || j == n) {
      sol.converged = true;
      break;
    }
    ++sol.iterations;

    const std::vector<double>& kj = cache.row(j);
    const std::vector<double>& ki_row = cache.row(i);
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const double old_ai = alpha(ii);
    const double old_aj = alpha(jj);
    const double kij = ki_row[j];

    if (y[i] != y[j]) {
      double quad = diag[i] + diag[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha(ii) - alpha(jj);
      alpha(ii) += delta;
      alpha(jj) += delta;
      if (diff > 0.0) {
        if (alpha(jj) < 0.0) {
          alpha(jj) = 0.0;
          alpha(ii) = diff;
        }
      } else if (alpha(ii) < 0.0) {
        alpha(ii) = 0.0;
        alpha(jj) = -diff;
      }
      if (diff > 0.0) {
        if (alpha(ii) > c) {
          alpha(ii) = c;
          alpha(jj) = c - diff;
        }
      } else if (alpha(jj) > c) {
        alpha(jj) = c;
        alpha(ii) = c + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha(ii) + alpha(jj);
      alpha(ii) -= delta;
      alpha(jj) += delta;
      if (sum > c) {
        if (alpha(ii) > c) {
          alpha(ii) = c;
          alpha(jj) = sum - c;
        }
      } else if (alpha(jj) < 0.0) {
        alpha(jj) = 0.0;
        alpha(ii) = sum;
      }
      if (sum > c) {
        if (alpha(jj) > c) {
          alpha(jj) = c;
          alpha(ii) = sum - c;
        }
      } else if (alpha(ii) < 0.0) {
        alpha(ii) = 0.0;
        alpha(jj) = sum;
      }
    }

    const double dai = alpha(ii) - old_ai;
    const double daj = alpha(jj) - old_aj;
    const double yi = y[i];
    const double yj = y[j];
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (yi * ki_row[t] * dai + yj * kj[t] * daj);
    }
  }

  // Bias from free vectors, midpoint of the feasible interval otherwise.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
  sol.bias = -rho;
  return sol;
}

bool SvmModel::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
}

SvmModel svm_train(const Eigen::Ref<const Eigen::MatrixXd>& features, std::span<const std::uint16_t> labels,
                   const SvmConfig& config) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) throw ValidationError("SVM: label count does not match sample count");
  if (!features.allFinite()) throw ValidationError("SVM: non-finite feature value");
  if (!(config.c > 0.0)) throw ConfigError("SVM: C must be positive");
  if (!(config.tolerance > 0.0)) throw ConfigError("SVM: tolerance must be positive");

  SvmModel model;
  model.classes.assign(labels.begin(), labels.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  if (model.classes.size() < 2) throw ValidationError("SVM: training data must contain at least 2 classes");

  model.kernel = config.kernel;
  model.c = config.c;
  model.tolerance = config.tolerance;
  model.gamma = config.gamma.value_or(default_gamma(features));
  if (config.kernel == KernelType::rbf && !(model.gamma > 0.0)) throw ConfigError("SVM: gamma must be positive");
  model.n_training = n;

  const RowMatrixXd x = features;
  const Kernel kernel{config.kernel, model.gamma};
  const std::size_t n_classes = model.classes.size();
  const std::size_t row_bytes = std::max<std::size_t>(n, 1) * sizeof(double);
  const std::size_t cache_rows = config.cache_mb * 1024 * 1024 / row_bytes / n_classes;

  std::vector<BinarySolution> solutions(n_classes);
  std::vector<std::exception_ptr> failures(n_classes);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < n_classes; ++k) {
    try {
      std::vector<int> y(n);
      for (std::size_t t = 0; t < n; ++t) y[t] = labels[t] == model.classes[k] ? 1 : -1;
      solutions[k] = solve_binary_svm(x, y, kernel, config.c, config.tolerance, config.max_iterations, cache_rows);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<std::size_t> sv_rows;
  for (std::size_t t = 0; t < n; ++t) {
    for (const auto& s : solutions) {
      if (s.alpha(static_cast<Eigen::Index>(t)) > 0.0) {
        sv_rows.push_back(t);
        break;
      }
    }
  }
  const auto n_sv = static_cast<Eigen::Index>(sv_rows.size());
  model.support_vectors.resize(n_sv, features.cols());
  model.coefficients.setZero(n_sv, static_cast<Eigen::Index>(n_classes));
  model.bias.resize(static_cast<Eigen::Index>(n_classes));
  for (Eigen::Index s = 0; s < n_sv; ++s) {
    const auto t = static_cast<Eigen::Index>(sv_rows[static_cast<std::size_t>(s)]);
    model.support_vectors.row(s) = x.row(t);
    for (std::size_t k = 0; k < n_classes; ++k) {
      const double sign = labels[static_cast<std::size_t>(t)] == model.classes[k] ? 1.0 : -1.0;
      model.coefficients(s, static_cast<Eigen::Index>(k)) = sign * solutions[k].alpha(t);
    }
  }
  for (std::size_t k = 0; k < n_classes; ++k) {
    model.bias(static_cast<Eigen::Index>(k)) = solutions[k].bias;
    model.iterations.push_back(solutions[k].iterations);
    model.converged.push_back(solutions[k].converged);
  }
  return model;
}

Eigen::MatrixXd svm_decision_values(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  if (static_cast<std::size_t>(features.cols()) != model.n_features()) {
    throw ValidationError("SVM: feature width " + std::to_string(features.cols()) + " does not match model width " +
                          std::to_string(model.n_features()));
  }
  const Eigen::Index n = features.rows();
  const Eigen::Index n_sv = model.support_vectors.rows();
  const auto n_classes = static_cast<Eigen::Index>(model.classes.size());
  const auto d = static_cast<std::size_t>(features.cols());
  const RowMatrixXd x = features;
  const Kernel kernel{model.kernel, model.gamma};

  Eigen::MatrixXd out(n, n_classes);
#pragma omp parallel
  {
    std::vector<double> k_row(static_cast<std::size_t>(n_sv));
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* xi = x.row(i).data();
      for (Eigen::Index s = 0; s < n_sv; ++s) {
        k_row[static_cast<std::size_t>(s)] = kernel(model.support_vectors.row(s).data(), xi, d);
      }
      for (Eigen::Index k = 0; k < n_classes; ++k) {
        double f = 0.0;
        for (Eigen::Index s = 0; s < n_sv; ++s) {
          const double coef = model.coefficients(s, k);
          if (coef != 0.0) f += coef * k_row[static_cast<std::size_t>(s)];
        }
        out(i, k) = f + model.bias(k);
      }
    }
  }
  return out;
}

std::vector<std::uint16_t> svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const Eigen::MatrixXd f = svm_decision_values(model, features);
  std::vector<std::uint16_t> out(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < f.cols(); ++k) {
      if (f(i, k) > f(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = model.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

void save_svm_model(const SvmModel& model, const fs::path& path) {
  static_assert(std::endian::native == std::endian::little, "SVM model files are little-endian");
  fs::path raw = path;
  raw.replace_extension(".raw");

  nlohmann::ordered_json j;
  j["classes"] = model.classes;
  j["kernel"] = to_string(model.kernel);
  j["gamma"] = model.gamma;
  j["c"] = model.c;
  j["tolerance"] = model.tolerance;
  j["n_features"] = model.n_features();
  j["n_support_vectors"] = model.support_vectors.rows();
  j["n_training"] = model.n_training;
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["payload_file"] = raw.filename().string();
  j["payload_layout"] = "support vectors (n_sv x n_features) then coefficients (n_sv x n_classes), row-major f64";

  const RowMatrixXd coef = model.coefficients;
  {
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + raw.string() + " for writing");
    out.write(reinterpret_cast<const char*>(model.support_vectors.data()),
              static_cast<std::streamsize>(model.support_vectors.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(coef.data()), static_cast<std::streamsize>(coef.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + raw.string());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

SvmModel load_svm_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open SVM model " + path.string());
  SvmModel model;
  std::size_t n_features = 0;
  std::size_t n_sv = 0;
  fs::path raw;
  try {
    const auto j = nlohmann::json::parse(in);
    model.classes = j.at("classes").get<std::vector<std::uint16_t>>();
    model.kernel = parse_kernel(j.at("kernel").get<std::string>());
    model.gamma = j.at("gamma").get<double>();
    model.c = j.at("c").get<double>();
    model.tolerance = j.at("tolerance").get<double>();
    n_features = j.at("n_features").get<std::size_t>();
    n_sv = j.at("n_support_vectors").get<std::size_t>();
    model.n_training = j.value("n_training", std::size_t{0});
    const auto bias = j.at("bias").get<std::vector<double>>();
    model.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    model.iterations = j.value("iterations", std::vector<std::size_t>{});
    model.converged = j.value("converged", std::vector<bool>{});
    raw = path.parent_path() / j.at("payload_file").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  const std::size_t n_classes = model.classes.size();
  if (static_cast<std::size_t>(model.bias.size()) != n_classes) throw ValidationError(path.string() + ": bias size");

  model.support_vectors.resize(static_cast<Eigen::Index>(n_sv), static_cast<Eigen::Index>(n_features));
  RowMatrixXd coef(static_cast<Eigen::Index>(n_sv), static_cast<Eigen::Index>(n_classes));
  const std::uintmax_t expected = (std::uintmax_t{n_sv} * n_features + std::uintmax_t{n_sv} * n_classes) * 8;
  std::error_code ec;
  const auto actual = fs::file_size(raw, ec);
  if (ec || actual != expected) {
    throw IoError(raw.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                  (ec ? std::string("none") : std::to_string(actual)));
  }
  std::ifstream rin(raw, std::ios::binary);
  rin.read(reinterpret_cast<char*>(model.support_vectors.data()),
           static_cast<std::streamsize>(model.support_vectors.size() * sizeof(double)));
  rin.read(reinterpret_cast<char*>(coef.data()), static_cast<std::streamsize>(coef.size() * sizeof(double)));
  if (!rin) throw IoError("short read: " + raw.string());
  model.coefficients = coef;
  return model;
}

}  // namespace hsi
