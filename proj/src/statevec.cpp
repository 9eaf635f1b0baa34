#include "qsvm/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

namespace {

void check_qubit_count(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw InvalidGate("qubit count " + std::to_string(n) + " outside [1, " +
                      std::to_string(kMaxQubits) + "]");
  }
}

std::string describe(const Gate& g) {
  switch (g.kind) {
    case GateKind::H: return "H(" + std::to_string(g.target) + ")";
    case GateKind::RX: return "RX(" + std::to_string(g.target) + ")";
    case GateKind::RZ: return "RZ(" + std::to_string(g.target) + ")";
    case GateKind::CNOT:
      return "CNOT(" + std::to_string(g.control) + "->" + std::to_string(g.target) + ")";
  }
  return "?";
}

void require_valid(const Gate& g, int n_qubits) {
  if (!g.valid_for(n_qubits)) {
    throw InvalidGate("gate " + describe(g) + " invalid for " + std::to_string(n_qubits) +
                      " qubits");
  }
}

}  // namespace

Gate Gate::inverse() const {
  Gate g = *this;
  if (kind == GateKind::RX || kind == GateKind::RZ) g.angle = -angle;
  return g;
}

bool Gate::valid_for(int n_qubits) const {
  if (target < 0 || target >= n_qubits) return false;
  if (kind == GateKind::CNOT) return control >= 0 && control < n_qubits && control != target;
  return true;
}

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) { check_qubit_count(n_qubits); }

Circuit& Circuit::append(const Gate& g) {
  require_valid(g, n_qubits_);
  gates_.push_back(g);
  return *this;
}

Circuit& Circuit::append(std::span<const Gate> gs) {
  for (const auto& g : gs) append(g);
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits_ != n_qubits_) {
    throw DimensionMismatch("cannot append a " + std::to_string(other.n_qubits_) +
                            "-qubit circuit to a " + std::to_string(n_qubits_) +
                            "-qubit circuit");
  }
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

Circuit Circuit::adjoint() const {
  Circuit out(n_qubits_);
  out.gates_.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) out.gates_.push_back(it->inverse());
  return out;
}

std::size_t Circuit::count(GateKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(gates_.begin(), gates_.end(), [kind](const Gate& g) { return g.kind == kind; }));
}

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
  check_qubit_count(n_qubits);
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = 1.0;
}

Statevector::Statevector(int n_qubits, std::vector<Complex> amps)
    : n_qubits_(n_qubits), amps_(std::move(amps)) {}

Statevector Statevector::basis(int n_qubits, std::uint64_t index) {
  Statevector s(n_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

Statevector Statevector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t d = amplitudes.size();
  if (d < 2 || (d & (d - 1)) != 0) {
    throw DimensionMismatch("amplitude count " + std::to_string(d) + " is not a power of two");
  }
  int n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  check_qubit_count(n);
  return Statevector(n, std::move(amplitudes));
}

void Statevector::apply_1q(int q, const Complex (&m)[2][2]) {
  const std::size_t stride = std::size_t{1} << q;
  const std::size_t d = amps_.size();
  for (std::size_t base = 0; base < d; base += 2 * stride) {
    for (std::size_t k = base; k < base + stride; ++k) {
      const Complex a0 = amps_[k];
      const Complex a1 = amps_[k + stride];
      amps_[k] = m[0][0] * a0 + m[0][1] * a1;
      amps_[k + stride] = m[1][0] * a0 + m[1][1] * a1;
    }
  }
}

void Statevector::apply_cnot(int control, int target) {
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t k = 0; k < amps_.size(); ++k) {
    if ((k & cmask) && !(k & tmask)) std::swap(amps_[k], amps_[k | tmask]);
  }
}

void Statevector::apply(const Gate& g) {
  require_valid(g, n_qubits_);
  switch (g.kind) {
    case GateKind::H: {
      const double r = (1.0 / std::numbers::sqrt2);
      const std::size_t stride = std::size_t{1} << g.target;
      for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t k = base; k < base + stride; ++k) {
          const Complex a0 = amps_[k];
          const Complex a1 = amps_[k + stride];
          amps_[k] = r * (a0 + a1);
          amps_[k + stride] = r * (a0 - a1);
        }
      }
      break;
    }
    case GateKind::RX: {
      const double c = std::cos(g.angle / 2.0);
      const double s = std::sin(g.angle / 2.0);
      const Complex m[2][2] = {{c, Complex{0.0, -s}}, {Complex{0.0, -s}, c}};
      apply_1q(g.target, m);
      break;
    }
    case GateKind::RZ: {
      const Complex p0 = std::polar(1.0, -g.angle / 2.0);
      const Complex p1 = std::polar(1.0, g.angle / 2.0);
      const std::size_t mask = std::size_t{1} << g.target;
      for (std::size_t k = 0; k < amps_.size(); ++k) amps_[k] *= (k & mask) ? p1 : p0;
      break;
    }
    case GateKind::CNOT:
      apply_cnot(g.control, g.target);
      break;
  }
}

void Statevector::apply(const Circuit& c) {
  if (c.n_qubits() != n_qubits_) {
    throw DimensionMismatch("circuit has " + std::to_string(c.n_qubits()) +
                            " qubits, state has " + std::to_string(n_qubits_));
  }
  for (const auto& g : c.gates()) apply(g);
}

void Statevector::apply_pauli(int q, Pauli p) {
  if (q < 0 || q >= n_qubits_) throw InvalidGate("Pauli target out of range");
  const std::size_t mask = std::size_t{1} << q;
  switch (p) {
    case Pauli::X:
      for (std::size_t k = 0; k < amps_.size(); ++k)
        if (!(k & mask)) std::swap(amps_[k], amps_[k | mask]);
      break;
    case Pauli::Y:
      // Y = [[0, -i], [i, 0]]
      for (std::size_t k = 0; k < amps_.size(); ++k) {
        if (k & mask) continue;
        const Complex a0 = amps_[k];
        const Complex a1 = amps_[k | mask];
        amps_[k] = Complex{0.0, -1.0} * a1;
        amps_[k | mask] = Complex{0.0, 1.0} * a0;
      }
      break;
    case Pauli::Z:
      for (std::size_t k = 0; k < amps_.size(); ++k)
        if (k & mask) amps_[k] = -amps_[k];
      break;
  }
}

double Statevector::norm() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

Statevector apply_gate(Statevector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

Statevector apply_circuit(Statevector state, const Circuit& circuit) {
  state.apply(circuit);
  return state;
}

Complex inner_product(const Statevector& a, const Statevector& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw DimensionMismatch("inner product of " + std::to_string(a.n_qubits()) + "- and " +
                            std::to_string(b.n_qubits()) + "-qubit states");
  }
  Complex acc{0.0, 0.0};
  const auto x = a.amplitudes();
  const auto y = b.amplitudes();
  for (std::size_t k = 0; k < x.size(); ++k) acc += std::conj(x[k]) * y[k];
  return acc;
}

std::vector<double> probabilities(const Statevector& state) {
  std::vector<double> p(state.dim());
  const auto a = state.amplitudes();
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(a[k]);
  return p;
}

OutcomeSampler::OutcomeSampler(std::span<const double> probs) : cdf_(probs.size()) {
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    cdf_[k] = acc;
  }
}

std::uint64_t OutcomeSampler::draw(double u) const {
  // Scale by the accumulated total so rounding in the norm never leaves a gap
  // at the top of the distribution.
  const double target = u * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  // upper_bound never lands on a zero-probability outcome.
  if (it == cdf_.end()) --it;
  return static_cast<std::uint64_t>(it - cdf_.begin());
}

double shot_uniform(std::uint64_t seed, std::uint64_t shot) {
  return to_unit(derive_seed(seed, shot, 0x73686f74ULL));
}

Counts sample_counts(const Statevector& state, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("shots must be >= 1");
  const auto probs = probabilities(state);
  const OutcomeSampler sampler(probs);
  Counts counts;
  for (std::uint64_t s = 0; s < shots; ++s) ++counts[sampler.draw(shot_uniform(seed, s))];
  return counts;
}

}  // namespace qsvm
