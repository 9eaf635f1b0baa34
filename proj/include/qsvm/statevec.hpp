#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace qsvm {

using Complex = std::complex<double>;

// Dense simulation is refused above this many qubits.
inline constexpr int kMaxQubits = 20;

enum class GateKind { H, RX, RZ, CNOT };

// Angles are in radians. RX(a) = exp(-i a X / 2), RZ(a) = diag(e^{-ia/2}, e^{ia/2}).
struct Gate {
  GateKind kind = GateKind::H;
  int target = 0;
  int control = -1;  // CNOT only
  double angle = 0.0;

  static Gate h(int q) { return {GateKind::H, q, -1, 0.0}; }
  static Gate rx(int q, double a) { return {GateKind::RX, q, -1, a}; }
  static Gate rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
  static Gate cnot(int c, int t) { return {GateKind::CNOT, t, c, 0.0}; }

  bool is_two_qubit() const { return kind == GateKind::CNOT; }
  Gate inverse() const;
  bool valid_for(int n_qubits) const;

  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  explicit Circuit(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  std::span<const Gate> gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  // Throws InvalidGate if the gate does not fit this circuit.
  Circuit& append(const Gate& g);
  Circuit& append(std::span<const Gate> gs);
  Circuit& append(const Circuit& other);

  // Reversed gate list with negated rotation angles.
  Circuit adjoint() const;

  std::size_t count(GateKind kind) const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
};

enum class Pauli { X, Y, Z };

// Qubit 0 is the least-significant bit of the basis index.
class Statevector {
 public:
  // |0...0>
  explicit Statevector(int n_qubits);
  static Statevector basis(int n_qubits, std::uint64_t index);
  // Takes amplitudes as given; the length must be a power of two.
  static Statevector from_amplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }

  void apply(const Gate& g);
  void apply(const Circuit& c);
  void apply_pauli(int q, Pauli p);

  double norm() const;

 private:
  Statevector(int n_qubits, std::vector<Complex> amps);

  void apply_1q(int q, const Complex (&m)[2][2]);
  void apply_cnot(int control, int target);

  int n_qubits_;
  std::vector<Complex> amps_;
};

Statevector apply_gate(Statevector state, const Gate& gate);
Statevector apply_circuit(Statevector state, const Circuit& circuit);

// <a|b>, conjugate-linear in a.
Complex inner_product(const Statevector& a, const Statevector& b);

std::vector<double> probabilities(const Statevector& state);

using Counts = std::map<std::uint64_t, std::uint64_t>;

// Inverse-CDF sampler over a fixed outcome distribution. Shot s uses the
// uniform draw to_unit(derive_seed(seed, s)), so any two samplers sharing a
// seed consume identical draws shot by shot.
class OutcomeSampler {
 public:
  explicit OutcomeSampler(std::span<const double> probs);
  std::uint64_t draw(double u) const;

 private:
  std::vector<double> cdf_;
};

double shot_uniform(std::uint64_t seed, std::uint64_t shot);

// Throws std::invalid_argument for shots == 0.
Counts sample_counts(const Statevector& state, std::uint64_t shots, std::uint64_t seed);

}  // namespace qsvm
