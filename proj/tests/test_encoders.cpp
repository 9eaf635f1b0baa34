#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qsvm/encoders.hpp"
#include "qsvm/error.hpp"
#include "qsvm/kernel.hpp"
#include "qsvm/rng.hpp"

using namespace qsvm;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_features(int particles, Rng& rng) {
  std::vector<double> x;
  for (int i = 0; i < particles; ++i) {
    x.push_back(rng.uniform(0, kPi));
    x.push_back(rng.uniform(0, kPi));
    x.push_back(rng.uniform(0, 2 * kPi));
  }
  return x;
}

}  // namespace

TEST_CASE("entangling functions") {
  CHECK(entangler_f2(kPi, kPi) == 0.0);
  CHECK(entangler_f2(0, 0) == doctest::Approx(kPi));
  CHECK(entangler_f2(kPi / 2, 0) == doctest::Approx(kPi / 2));
  CHECK(entangler_f3(kPi, 0.4, 2.0) == 0.0);
  CHECK(entangler_f3(0, 0, 0) == doctest::Approx(kPi));
  CHECK(entangler_f3(0, kPi / 2, kPi / 2) == doctest::Approx(kPi / 4));
}

TEST_CASE("zz block") {
  const auto g = zz_block(0, 1, 0.3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == Gate::cnot(0, 1));
  CHECK(g[1] == Gate::rz(1, 0.6));
  CHECK(g[2] == Gate::cnot(0, 1));
  CHECK_THROWS_AS(zz_block(2, 2, 0.1), InvalidGate);

  SUBCASE("zero angle is the identity") {
    Circuit c(2);
    c.append(Gate::h(0)).append(Gate::rx(1, 0.7)).append(zz_block(0, 1, 0.0));
    Circuit ref(2);
    ref.append(Gate::h(0)).append(Gate::rx(1, 0.7));
    const auto a = apply_circuit(Statevector(2), c);
    const auto b = apply_circuit(Statevector(2), ref);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }
  SUBCASE("diagonal on |00>") {
    Circuit c(2);
    c.append(zz_block(0, 1, 1.1));
    const auto p = probabilities(apply_circuit(Statevector(2), c));
    CHECK(p[0] == doctest::Approx(1.0));
  }
  SUBCASE("matches the exponential of the ZZ generator on |++>") {
    for (double f : {kPi / 4, 0.37, -1.3}) {
      Circuit c(2);
      c.append(Gate::h(0)).append(Gate::h(1)).append(zz_block(0, 1, f));
      const oracle::CVec got = oracle::to_vec(apply_circuit(Statevector(2), c));
      oracle::CMat zz = oracle::CMat::Zero(4, 4);
      for (int k = 0; k < 4; ++k) zz(k, k) = ((k & 1) ^ (k >> 1)) ? -1.0 : 1.0;
      const oracle::CVec plus = oracle::CVec::Constant(4, 0.5);
      const oracle::CVec expected = oracle::expm(std::complex<double>(0, -f) * zz) * plus;
      CHECK(oracle::phase_free_distance(expected, got) < 1e-12);
    }
  }
}

TEST_CASE("combinatorial layout and gate counts") {
  Rng rng(1);
  const auto x = random_features(4, rng);
  const Circuit c = build_combinatorial(x, 1);
  CHECK(c.n_qubits() == 12);
  CHECK(c.count(GateKind::H) == 12);
  CHECK(c.count(GateKind::CNOT) == 132);
  CHECK(c.size() == 12 + 12 + 3 * 66);
  CHECK(build_combinatorial(x, 3).count(GateKind::CNOT) == 3 * 132);
  CHECK_THROWS(build_combinatorial(std::vector<double>{}, 1));
  CHECK_THROWS(build_combinatorial(x, 0));
}

TEST_CASE("bloch encoding") {
  SUBCASE("zero angles keep |0>") {
    const std::vector<double> x{0, 0, 1.3, 0, 0, 0.2};
    const auto s = apply_circuit(Statevector(2), build_bloch(x, 2));
    CHECK(std::norm(s[0]) == doctest::Approx(1.0));
    CHECK(kernel_exact(x, std::vector<double>(6, 0.0), {Strategy::BlochSphere, 2, true}) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("theta = pi flips the qubit") {
    const std::vector<double> x{0.8, kPi, 0.0};
    const auto s = apply_circuit(Statevector(1), build_bloch(x, 1));
    CHECK(std::norm(s[1]) == doctest::Approx(1.0));
  }
  SUBCASE("no entangling gates and product probabilities") {
    Rng rng(4);
    const auto x = random_features(3, rng);
    const Circuit c = build_bloch(x, 2);
    CHECK(c.n_qubits() == 3);
    CHECK(c.count(GateKind::CNOT) == 0);
    const auto joint = probabilities(apply_circuit(Statevector(3), c));
    std::vector<std::vector<double>> single;
    for (int i = 0; i < 3; ++i) {
      const std::vector<double> xi(x.begin() + 3 * i, x.begin() + 3 * i + 3);
      single.push_back(probabilities(apply_circuit(Statevector(1), build_bloch(xi, 2))));
    }
    for (std::size_t k = 0; k < 8; ++k) {
      const double prod = single[0][k & 1] * single[1][(k >> 1) & 1] * single[2][(k >> 2) & 1];
      CHECK(std::abs(joint[k] - prod) < 1e-12);
    }
  }
  SUBCASE("phi is ignored") {
    const std::vector<double> a{1.0, 0.5, 0.1};
    const std::vector<double> b{1.0, 0.5, 4.0};
    CHECK(build_bloch(a, 2) == build_bloch(b, 2));
  }
}

TEST_CASE("separate particle encoding") {
  Rng rng(2);
  SUBCASE("one particle has no inter-particle blocks") {
    const auto x = random_features(1, rng);
    const Circuit c = build_separate_particle(x, 1);
    CHECK(c.n_qubits() == 2);
    CHECK(c.count(GateKind::CNOT) == 4);  // two intra-particle ZZ blocks
  }
  SUBCASE("k particles give C(k,2) inter-particle blocks per layer") {
    for (int k = 2; k <= 5; ++k) {
      const auto x = random_features(k, rng);
      const Circuit c = build_separate_particle(x, 2);
      CHECK(c.n_qubits() == 2 * k);
      const std::size_t inter = static_cast<std::size_t>(k * (k - 1) / 2);
      CHECK(c.count(GateKind::CNOT) == 2 * (2 * (2 * static_cast<std::size_t>(k)) + 2 * inter));
    }
  }
  SUBCASE("fewer CNOTs than combinatorial for 4 particles") {
    const auto x = random_features(4, rng);
    CHECK(build_separate_particle(x, 1).count(GateKind::CNOT) < 132);
  }
  SUBCASE("theta and phi stay distinguishable") {
    // p~ = pi silences every f2 block. Stacking RZ(2 theta) and RZ(phi) on one
    // wire would then only see 2 theta + phi, which is equal for a and b.
    const std::vector<double> a{kPi, 0.8, 2.0};
    const std::vector<double> b{kPi, 1.1, 1.4};
    CHECK(kernel_exact(a, b, {Strategy::SeparateParticle, 1, true}) < 0.99);
  }
  CHECK_THROWS(build_separate_particle(std::vector<double>{}, 1));
  CHECK_THROWS(build_separate_particle(std::vector<double>{1, 2}, 1));
}

TEST_CASE("separate particle with bloch encoding") {
  Rng rng(3);
  SUBCASE("three particles use six qubits") {
    CHECK(build_separate_particle_bloch(random_features(3, rng), 2, true).n_qubits() == 6);
    CHECK(qubit_count(Strategy::SeparateParticleBloch, 9) == 6);
  }
  SUBCASE("no intra entangler, zero inputs: angle qubit |0>, momentum qubit |+>") {
    const std::vector<double> x{0, 0, 0};
    const auto s = apply_circuit(Statevector(2), build_separate_particle_bloch(x, 1, false));
    // angle qubit 0 in |0>, momentum qubit 1 in |+>: amplitudes on |00> and |10>.
    CHECK(std::norm(s[0b00]) == doctest::Approx(0.5));
    CHECK(std::norm(s[0b10]) == doctest::Approx(0.5));
    CHECK(std::abs(std::conj(s[0b00]) * s[0b10] - Complex(0.5)) < 1e-12);
  }
  SUBCASE("intra flag adds one block per particle") {
    const auto x = random_features(4, rng);
    CHECK(build_separate_particle_bloch(x, 1, true).count(GateKind::CNOT) == 8 + 12);
    CHECK(build_separate_particle_bloch(x, 1, false).count(GateKind::CNOT) == 12);
  }
  CHECK_THROWS(build_separate_particle_bloch(std::vector<double>{1, 2, 3, 4}, 1, true));
}

TEST_CASE("cnot ordering across strategies") {
  Rng rng(9);
  for (int k = 3; k <= 5; ++k) {
    const auto x = random_features(k, rng);
    for (int layers = 1; layers <= 2; ++layers) {
      const auto spb = build_separate_particle_bloch(x, layers, true).count(GateKind::CNOT);
      const auto sp = build_separate_particle(x, layers).count(GateKind::CNOT);
      const auto comb = build_combinatorial(x, layers).count(GateKind::CNOT);
      CHECK(spb < sp);
      CHECK(sp < comb);
    }
  }
}

TEST_CASE("builders are deterministic, valid and normalized") {
  Rng rng(6);
  const auto x = random_features(3, rng);
  for (Strategy s : kAllStrategies) {
    const EncoderSpec spec{s, 2, true};
    const Circuit a = build_encoding(spec, x);
    CHECK(a == build_encoding(spec, x));
    CHECK(a.n_qubits() == qubit_count(s, x.size()));
    for (const Gate& g : a.gates()) CHECK(g.valid_for(a.n_qubits()));
    CHECK(std::abs(apply_circuit(Statevector(a.n_qubits()), a).norm() - 1.0) < 1e-10);
    CHECK(kernel_exact(x, x, spec) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("particle swaps stay within the fidelity bound") {
  Rng rng(10);
  const auto x = random_features(3, rng);
  std::vector<double> swapped = x;
  std::swap_ranges(swapped.begin(), swapped.begin() + 3, swapped.begin() + 3);
  for (Strategy s : kAllStrategies) {
    const double k = kernel_exact(x, swapped, {s, 2, true});
    CHECK(k <= 1.0 + 1e-12);
    CHECK(k >= 0.0);
  }
  CHECK(kernel_exact(x, swapped, {Strategy::Combinatorial, 2, true}) < 1.0 - 1e-6);
}

TEST_CASE("strategy names and tags") {
  for (Strategy s : kAllStrategies) CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("nope"), std::invalid_argument);
  CHECK(EncoderSpec{Strategy::Combinatorial, 2, true}.tag() == "comb-L2");
  CHECK(EncoderSpec{Strategy::SeparateParticleBloch, 2, true}.tag() == "spb-L2-intra");
  CHECK(EncoderSpec{Strategy::SeparateParticleBloch, 1, false}.tag() != EncoderSpec{}.tag());
}
