#include "qsvm/encoders.hpp"

#include <numbers>
#include <stdexcept>

#include "qsvm/error.hpp"

namespace qsvm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_layers(int layers) {
  if (layers < 1) throw std::invalid_argument("encoder needs at least one layer");
}

std::size_t particles_of(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("empty feature vector");
  if (x.size() % 3 != 0) {
    throw std::invalid_argument("feature count " + std::to_string(x.size()) +
                                " is not a multiple of 3");
  }
  return x.size() / 3;
}

struct ParticleFeatures {
  double p, theta, phi;
};

ParticleFeatures particle(std::span<const double> x, std::size_t i) {
  return {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
}

int angle_qubit(std::size_t i) { return static_cast<int>(2 * i); }
int momentum_qubit(std::size_t i) { return static_cast<int>(2 * i + 1); }

void append_momentum_ring(Circuit& c, std::span<const double> x, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      c.append(zz_block(momentum_qubit(i), momentum_qubit(j), entangler_f2(x[3 * i], x[3 * j])));
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Combinatorial: return "combinatorial";
    case Strategy::BlochSphere: return "bloch";
    case Strategy::SeparateParticle: return "separate_particle";
    case Strategy::SeparateParticleBloch: return "separate_particle_bloch";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown encoder strategy '" + std::string(name) + "'");
}

std::string EncoderSpec::tag() const {
  std::string t;
  switch (strategy) {
    case Strategy::Combinatorial: t = "comb"; break;
    case Strategy::BlochSphere: t = "bloch"; break;
    case Strategy::SeparateParticle: t = "sp"; break;
    case Strategy::SeparateParticleBloch: t = "spb"; break;
  }
  t += "-L" + std::to_string(layers);
  if (strategy == Strategy::SeparateParticleBloch) t += intra_particle_entangle ? "-intra" : "-nointra";
  return t;
}

double entangler_f2(double xl, double xm) { return (xl - kPi) * (xm - kPi) / kPi; }

double entangler_f3(double p, double theta, double phi) {
  return (kPi - p) * (kPi - theta) * (kPi - phi) / (kPi * kPi);
}

std::vector<Gate> zz_block(int ql, int qm, double angle) {
  if (ql == qm) throw InvalidGate("zz_block needs two distinct qubits");
  return {Gate::cnot(ql, qm), Gate::rz(qm, 2.0 * angle), Gate::cnot(ql, qm)};
}

Circuit build_combinatorial(std::span<const double> x, int layers) {
  check_layers(layers);
  if (x.empty()) throw std::invalid_argument("empty feature vector");
  const int n = static_cast<int>(x.size());
  Circuit c(n);
  for (int layer = 0; layer < layers; ++layer) {
    for (int q = 0; q < n; ++q) c.append(Gate::h(q));
    for (int q = 0; q < n; ++q) c.append(Gate::rz(q, 2.0 * x[q]));
    for (int l = 0; l < n; ++l)
      for (int m = l + 1; m < n; ++m) c.append(zz_block(l, m, entangler_f2(x[l], x[m])));
  }
  return c;
}

Circuit build_bloch(std::span<const double> x, int layers) {
  check_layers(layers);
  const std::size_t k = particles_of(x);
  Circuit c(static_cast<int>(k));
  for (int layer = 0; layer < layers; ++layer) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto f = particle(x, i);
      c.append(Gate::rx(static_cast<int>(i), f.theta));
      c.append(Gate::rz(static_cast<int>(i), f.p));
    }
  }
  return c;
}

Circuit build_separate_particle(std::span<const double> x, int layers) {
  check_layers(layers);
  const std::size_t k = particles_of(x);
  Circuit c(static_cast<int>(2 * k));
  for (int layer = 0; layer < layers; ++layer) {
    for (int q = 0; q < c.n_qubits(); ++q) c.append(Gate::h(q));
    for (std::size_t i = 0; i < k; ++i) {
      const auto f = particle(x, i);
      const int a = angle_qubit(i);
      const int m = momentum_qubit(i);
      c.append(Gate::rz(a, 2.0 * f.theta));
      c.append(Gate::rz(m, 2.0 * f.p));
      c.append(zz_block(m, a, entangler_f2(f.p, f.theta)));
      c.append(zz_block(m, a, entangler_f2(f.p, f.phi)));
    }
    append_momentum_ring(c, x, k);
  }
  return c;
}

Circuit build_separate_particle_bloch(std::span<const double> x, int layers, bool intra) {
  check_layers(layers);
  const std::size_t k = particles_of(x);
  Circuit c(static_cast<int>(2 * k));
  for (int layer = 0; layer < layers; ++layer) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto f = particle(x, i);
      const int a = angle_qubit(i);
      const int m = momentum_qubit(i);
      c.append(Gate::rx(a, f.theta));
      c.append(Gate::rz(a, f.phi));
      c.append(Gate::h(m));
      c.append(Gate::rz(m, f.p));
      if (intra) c.append(zz_block(m, a, entangler_f3(f.p, f.theta, f.phi)));
    }
    append_momentum_ring(c, x, k);
  }
  return c;
}

Circuit build_encoding(const EncoderSpec& spec, std::span<const double> x) {
  switch (spec.strategy) {
    case Strategy::Combinatorial: return build_combinatorial(x, spec.layers);
    case Strategy::BlochSphere: return build_bloch(x, spec.layers);
    case Strategy::SeparateParticle: return build_separate_particle(x, spec.layers);
    case Strategy::SeparateParticleBloch:
      return build_separate_particle_bloch(x, spec.layers, spec.intra_particle_entangle);
  }
  throw std::invalid_argument("unknown strategy");
}

int qubit_count(Strategy s, std::size_t n_features) {
  switch (s) {
    case Strategy::Combinatorial: return static_cast<int>(n_features);
    case Strategy::BlochSphere: return static_cast<int>(n_features / 3);
    case Strategy::SeparateParticle:
    case Strategy::SeparateParticleBloch: return static_cast<int>(2 * (n_features / 3));
  }
  return 0;
}

}  // namespace qsvm
