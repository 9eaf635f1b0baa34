#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace qsvm {

struct TrainConfig {
  double C = 1.0;
  double tolerance = 1e-6;  // KKT violation threshold m(alpha) - M(alpha)
  long max_iterations = 10'000'000;
};

// Dual soft-margin SVM on a precomputed kernel:
//   min 0.5 a^T Q a - e^T a,  Q_ij = y_i y_j K_ij,  y^T a = 0,  0 <= a_i <= C
struct SvmModel {
  std::vector<double> alphas;
  std::vector<int> labels;  // +1 / -1
  std::vector<std::size_t> support;
  double bias = 0.0;
  double C = 1.0;
  double tolerance = 1e-6;
  std::string kernel_hash;
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
  // Objective sampled once per sweep (every n iterations) and at the end.
  std::vector<double> objective_trace;

  std::size_t size() const { return alphas.size(); }
};

// SMO with deterministic maximal-violating-pair selection (second-order
// choice of the partner). Throws std::invalid_argument for single-class
// labels, labels outside {-1,+1}, shape mismatch or non-finite kernel entries.
SvmModel train(const Eigen::MatrixXd& kernel, std::span<const int> labels, const TrainConfig& cfg);

double dual_objective(const Eigen::MatrixXd& kernel, std::span<const int> labels,
                      std::span<const double> alphas);

// sum_i a_i y_i K(x_i, x) + b for each row of k_cross (test x train).
Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& k_cross);

struct Prediction {
  std::vector<int> classes;        // 1 signal, 0 background; score 0 maps to 1
  std::vector<double> raw_scores;
  std::vector<double> unit_scores;  // logistic(raw), reporting only
};

Prediction predict(const SvmModel& model, const Eigen::MatrixXd& k_cross);

// FNV-1a over the entry bytes, hex-encoded.
std::string kernel_hash(const Eigen::MatrixXd& kernel);

void write_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel read_model(const std::filesystem::path& path);

}  // namespace qsvm
