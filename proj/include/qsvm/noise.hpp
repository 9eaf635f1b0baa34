#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qsvm/statevec.hpp"

namespace qsvm {

// Parameterized stochastic noise: after each gate, with probability p1 (one
// qubit gates) or p2 (CNOT) a uniformly random Pauli hits a uniformly chosen
// qubit the gate acts on. Readout flips each reported bit according to the
// qubit's confusion matrix (rows: true 0/1, columns: reported 0/1).
struct NoiseModel {
  double p1 = 0.0;
  double p2 = 0.0;
  // One matrix per qubit; a single entry applies to every qubit; empty means
  // perfect readout.
  std::vector<Eigen::Matrix2d> readout;
  // Number of independent error trajectories simulated per circuit. Shots
  // are assigned round-robin to trajectories, so trajectories >= shots is
  // exact per-shot Monte Carlo.
  std::uint64_t trajectories = 128;

  static Eigen::Matrix2d symmetric_flip(double q);
  static NoiseModel readout_only(double flip);
  // Representative small-device magnitudes, not a calibration of real hardware.
  static NoiseModel toronto_like();

  Eigen::Matrix2d confusion(int qubit) const;
  bool ideal_gates() const { return p1 == 0.0 && p2 == 0.0; }
  bool ideal_readout() const;

  // Throws std::invalid_argument on probabilities outside [0,1] or confusion
  // rows not summing to 1.
  void validate() const;
};

// Samples |0...0> evolved through `circuit` under `model`. With zero gate
// error rates the outcome draws coincide shot-for-shot with sample_counts
// on the ideal state for the same seed.
Counts noisy_sample(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed,
                    const NoiseModel& model);

enum class CalibrationMode { Full, Tensored };

CalibrationMode default_calibration_mode(int n_qubits);
std::string_view to_string(CalibrationMode m);
CalibrationMode parse_calibration_mode(std::string_view name);

// Response matrix A with A[measured][prepared] = observed frequency.
struct CalibrationMatrix {
  CalibrationMode mode = CalibrationMode::Tensored;
  int n_qubits = 0;
  Eigen::MatrixXd full;                  // 2^n x 2^n, Full mode
  std::vector<Eigen::Matrix2d> per_qubit;  // Tensored mode, qubit 0 first
  std::uint64_t shots = 0;

  // Dense 2^n x 2^n response (Kronecker product in Tensored mode).
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& p) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const;
  double condition_number() const;
};

// Prepares every basis state (Full, 2^n circuits) or each qubit in 0 and 1
// (Tensored, 2n circuits) and measures with the model's readout noise only.
CalibrationMatrix calibrate(int n_qubits, std::uint64_t shots, std::uint64_t seed,
                            const NoiseModel& model, CalibrationMode mode);

struct MitigationResult {
  Eigen::VectorXd unconstrained;  // A^{-1} p_raw, may have negative entries
  Eigen::VectorXd probabilities;  // argmin |A p - p_raw|, p >= 0, sum p = 1
  double condition_number = 0.0;
};

inline constexpr double kMaxCalibrationCondition = 1e6;

// Throws MitigationUnreliable if cond(A) exceeds kMaxCalibrationCondition.
MitigationResult mitigate(const Eigen::VectorXd& raw_probabilities, const CalibrationMatrix& cal);
MitigationResult mitigate(const Counts& raw_counts, const CalibrationMatrix& cal);

Eigen::VectorXd counts_to_probabilities(const Counts& counts, int n_qubits);

// Euclidean projection onto {p >= 0, sum p = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace qsvm
