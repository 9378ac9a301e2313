#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hsi {

enum class KernelType { linear, rbf };

KernelType parse_kernel(const std::string& name);
std::string to_string(KernelType kernel);

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SvmConfig {
  KernelType kernel = KernelType::rbf;
  double c = 1.0;
  std::optional<double> gamma;  // rbf only; default_gamma() when unset
  double tolerance = 1e-3;      // max KKT violation at termination
  std::size_t max_iterations = 10'000'000;
  std::size_t cache_mb = 256;   // kernel row cache, shared by all binary problems
};

/// gamma = 1 / (d * mean per-feature population variance); 1 for constant data.
double default_gamma(const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Kernel evaluation over contiguous rows.
struct Kernel {
  KernelType type = KernelType::rbf;
  double gamma = 1.0;

  double operator()(const double* x, const double* z, std::size_t d) const;
};

/// Solution of one soft-margin binary problem in the dual.
struct BinarySolution {
  Eigen::VectorXd alpha;  // 0 <= alpha_i <= C
  double bias = 0.0;      // f(x) = sum alpha_i y_i K(x_i, x) + bias
  std::size_t iterations = 0;
  bool converged = false;
};

/// Sequential minimal optimization with second-order working-set selection
/// and a least-recently-used kernel row cache of `cache_rows` rows (>= 2).
/// `y` holds +1 / -1.
BinarySolution solve_binary_svm(const RowMatrixXd& x, std::span<const int> y, const Kernel& kernel, double c,
                                double tolerance, std::size_t max_iterations, std::size_t cache_rows);

/// One-vs-rest model. The union of all support vectors is stored once;
/// `coefficients(s, k)` is alpha_s * y_s for the binary problem of class k
/// (zero where s is not a support vector of that problem).
struct SvmModel {
  std::vector<std::uint16_t> classes;  // ascending
  KernelType kernel = KernelType::rbf;
  double gamma = 1.0;
  double c = 1.0;
  double tolerance = 1e-3;
  RowMatrixXd support_vectors;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd bias;
  std::vector<std::size_t> iterations;
  std::vector<bool> converged;
  std::size_t n_training = 0;

  std::size_t n_features() const { return static_cast<std::size_t>(support_vectors.cols()); }
  bool all_converged() const;
};

/// One binary problem per class (class vs rest), solved in parallel.
/// Throws ValidationError with fewer than two classes.
SvmModel svm_train(const Eigen::Ref<const Eigen::MatrixXd>& features, std::span<const std::uint16_t> labels,
                   const SvmConfig& config);

/// n x n_classes matrix of f_k(x).
Eigen::MatrixXd svm_decision_values(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

/// argmax_k f_k(x), lowest class label on ties.
std::vector<std::uint16_t> svm_predict(const SvmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features);

/// JSON header at `path`; support vectors then coefficients as row-major
/// little-endian f64 in a sibling `.raw` file.
void save_svm_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm_model(const std::filesystem::path& path);

}  // namespace hsi
