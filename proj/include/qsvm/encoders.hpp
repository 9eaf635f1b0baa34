#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsvm/statevec.hpp"

namespace qsvm {

enum class Strategy { Combinatorial, BlochSphere, SeparateParticle, SeparateParticleBloch };

inline constexpr Strategy kAllStrategies[] = {Strategy::Combinatorial, Strategy::BlochSphere,
                                              Strategy::SeparateParticle,
                                              Strategy::SeparateParticleBloch};

std::string_view to_string(Strategy s);
// Accepts the names produced by to_string. Throws std::invalid_argument.
Strategy parse_strategy(std::string_view name);

struct EncoderSpec {
  Strategy strategy = Strategy::SeparateParticleBloch;
  int layers = 2;                       // repetitions of [H layer + U(x)]
  bool intra_particle_entangle = true;  // SeparateParticleBloch only

  // Short identifier stored in kernel file headers, e.g. "spb-L2-intra".
  std::string tag() const;
};

// (1/pi)(xl - pi)(xm - pi)
double entangler_f2(double xl, double xm);
// (1/pi^2)(pi - p)(pi - theta)(pi - phi)
double entangler_f3(double p, double theta, double phi);

// CNOT(ql->qm), RZ(qm, 2 angle), CNOT(ql->qm). With the RZ convention of
// statevec this is exp(-i angle Z_l Z_m); kernels are unaffected by the sign.
std::vector<Gate> zz_block(int ql, int qm, double angle);

// One qubit per feature. Per layer: H on all; RZ(2 x_k); ZZ(f2) on every pair.
Circuit build_combinatorial(std::span<const double> x, int layers);

// One qubit per particle: RX(theta) then RZ(p~). phi is not encoded.
Circuit build_bloch(std::span<const double> x, int layers);

// Two qubits per particle: angle qubit 2i, momentum qubit 2i+1.
// Per layer: H on all; RZ(2 theta) on the angle qubit; RZ(2 p~) on the
// momentum qubit; ZZ(f2(p~, theta)) and ZZ(f2(p~, phi)) within the particle;
// ZZ(f2(p~_i, p~_j)) between every pair of momentum qubits. phi only enters
// through its ZZ block, since a second RZ on the angle wire would merge with
// theta into 2 theta + phi.
Circuit build_separate_particle(std::span<const double> x, int layers);

// Two qubits per particle: angle qubit RX(theta), RZ(phi) from |0>; momentum
// qubit H, RZ(p~). Optional ZZ(f3) within the particle, then ZZ(f2) between
// momentum qubits as in build_separate_particle.
Circuit build_separate_particle_bloch(std::span<const double> x, int layers, bool intra);

Circuit build_encoding(const EncoderSpec& spec, std::span<const double> x);

int qubit_count(Strategy s, std::size_t n_features);

}  // namespace qsvm
