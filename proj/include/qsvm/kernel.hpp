#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsvm/encoders.hpp"
#include "qsvm/noise.hpp"
#include "qsvm/preprocess.hpp"

namespace qsvm {

// Gram (square, symmetric) or cross (rectangular) kernel with provenance.
struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::uint64_t shots = 0;  // 0 = exact statevector overlaps
  std::uint64_t seed = 0;
  std::string encoder;      // EncoderSpec::tag() or "rbf-sigma=<s>"

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

// How finite-shot (possibly noisy) kernel entries are estimated.
struct SamplingOptions {
  std::uint64_t shots = 0;  // 0 selects the exact path
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;
  // Applied to the full outcome distribution before reading off P(0...0).
  std::optional<CalibrationMatrix> mitigation;
};

struct GramOptions {
  EncoderSpec encoder;
  SamplingOptions sampling;
  unsigned threads = 0;  // 0 = hardware concurrency
  // Completed upper-triangle rows are appended here and reused on restart.
  std::optional<std::filesystem::path> checkpoint;
};

// |<psi(xi)|psi(xj)>|^2 from two statevector builds.
double kernel_exact(std::span<const double> xi, std::span<const double> xj, const EncoderSpec& spec);

// Runs U(xj) followed by U^dagger(xi) from |0...0> and returns the fraction
// of shots reporting |0...0>. Noise and mitigation are taken from `sampling`.
double kernel_sampled(std::span<const double> xi, std::span<const double> xj,
                      const EncoderSpec& spec, const SamplingOptions& sampling);

// The compute-uncompute circuit U^dagger(xi) U(xj).
Circuit kernel_circuit(std::span<const double> xi, std::span<const double> xj,
                       const EncoderSpec& spec);

KernelMatrix gram_matrix(std::span<const FeatureVector> x, const GramOptions& opts);
KernelMatrix cross_gram(std::span<const FeatureVector> x_test, std::span<const FeatureVector> x_train,
                        const GramOptions& opts);

// exp(-|xi - xj|^2 / (2 sigma^2)); throws std::invalid_argument for sigma <= 0.
double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double sigma);
KernelMatrix rbf_gram(std::span<const FeatureVector> x, double sigma);
KernelMatrix rbf_cross(std::span<const FeatureVector> x_test, std::span<const FeatureVector> x_train,
                       double sigma);

enum class PsdRepair { DiagonalShift, ClipEigenvalues };

// Repairs an indefinite symmetric matrix in place. DiagonalShift adds
// lambda I with lambda = max(0, -lambda_min + 1e-8); ClipEigenvalues zeroes
// negative eigenvalues. Returns the smallest eigenvalue before repair.
double repair_psd(Eigen::MatrixXd& k, PsdRepair mode = PsdRepair::DiagonalShift);
double min_eigenvalue(const Eigen::MatrixXd& k);

}  // namespace qsvm
