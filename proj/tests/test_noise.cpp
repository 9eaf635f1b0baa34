#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsvm/error.hpp"
#include "qsvm/noise.hpp"
#include "qsvm/rng.hpp"

using namespace qsvm;

namespace {

Circuit random_circuit(int n, int gates, std::uint64_t seed) {
  Rng rng(seed);
  Circuit c(n);
  for (int k = 0; k < gates; ++k) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    switch (rng.below(4)) {
      case 0: c.append(Gate::h(t)); break;
      case 1: c.append(Gate::rx(t, rng.uniform(-3, 3))); break;
      case 2: c.append(Gate::rz(t, rng.uniform(-3, 3))); break;
      default: c.append(Gate::cnot(t, (t + 1) % n));
    }
  }
  return c;
}

double fraction(const Counts& c, std::uint64_t outcome, std::uint64_t shots) {
  const auto it = c.find(outcome);
  return it == c.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(shots);
}

}  // namespace

TEST_CASE("noise model validation and presets") {
  NoiseModel m;
  CHECK_NOTHROW(m.validate());
  CHECK(m.ideal_gates());
  CHECK(m.ideal_readout());
  m.p1 = 1.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  NoiseModel bad;
  Eigen::Matrix2d r;
  r << 0.9, 0.2, 0.1, 0.9;
  bad.readout = {r};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  const auto t = NoiseModel::toronto_like();
  CHECK(t.p1 == 0.001);
  CHECK(t.p2 == 0.02);
  CHECK(t.confusion(3)(0, 1) == doctest::Approx(0.02));
  CHECK(NoiseModel::symmetric_flip(0.1)(1, 0) == doctest::Approx(0.1));
}

TEST_CASE("noiseless model reproduces the ideal sampler") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Circuit c = random_circuit(4, 40, seed);
    const auto ideal = sample_counts(apply_circuit(Statevector(4), c), 3000, seed);
    CHECK(noisy_sample(c, 3000, seed, NoiseModel{}) == ideal);
  }
}

TEST_CASE("readout flip on an empty circuit") {
  const std::uint64_t shots = 100000;
  const auto c = noisy_sample(Circuit(1), shots, 3, NoiseModel::readout_only(0.1));
  CHECK(std::abs(fraction(c, 1, shots) - 0.1) < 5 * std::sqrt(0.1 * 0.9 / shots));
}

TEST_CASE("full depolarization randomizes a single qubit") {
  Circuit c(1);
  c.append(Gate::h(0));
  NoiseModel m;
  m.p1 = 1.0;
  m.trajectories = 100000;
  const std::uint64_t shots = 100000;
  const auto counts = noisy_sample(c, shots, 5, m);
  CHECK(std::abs(fraction(counts, 0, shots) - 0.5) < 5 * std::sqrt(0.25 / shots));
}

TEST_CASE("noisy sampling is deterministic and seed dependent") {
  const Circuit c = random_circuit(3, 30, 9);
  const auto m = NoiseModel::toronto_like();
  CHECK(noisy_sample(c, 2000, 1, m) == noisy_sample(c, 2000, 1, m));
  CHECK(noisy_sample(c, 2000, 1, m) != noisy_sample(c, 2000, 2, m));
  std::uint64_t total = 0;
  for (const auto& [k, v] : noisy_sample(c, 2000, 1, m)) total += v;
  CHECK(total == 2000);
}

TEST_CASE("gate noise lowers the return probability of an identity circuit") {
  Circuit u = random_circuit(3, 30, 4);
  Circuit cu(3);
  cu.append(u).append(u.adjoint());
  NoiseModel m;
  m.p1 = 0.02;
  m.p2 = 0.05;
  m.trajectories = 4000;
  const auto counts = noisy_sample(cu, 4000, 2, m);
  CHECK(fraction(counts, 0, 4000) < 0.97);
  CHECK(fraction(counts, 0, 4000) > 0.3);
}

TEST_CASE("calibration") {
  SUBCASE("ideal readout gives the identity") {
    for (auto mode : {CalibrationMode::Full, CalibrationMode::Tensored}) {
      const auto cal = calibrate(2, 1000, 1, NoiseModel{}, mode);
      CHECK((cal.dense() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("tensored per-qubit matrices match the flip rate") {
    const double q = 0.05;
    const std::uint64_t shots = 20000;
    const auto cal = calibrate(3, shots, 2, NoiseModel::readout_only(q), CalibrationMode::Tensored);
    REQUIRE(cal.per_qubit.size() == 3);
    const double tol = 5 * std::sqrt(q * (1 - q) / shots);
    for (const auto& a : cal.per_qubit) {
      CHECK(std::abs(a(1, 0) - q) < tol);
      CHECK(std::abs(a(0, 1) - q) < tol);
      CHECK(std::abs(a.col(0).sum() - 1.0) < 1e-12);
      CHECK(std::abs(a.col(1).sum() - 1.0) < 1e-12);
    }
  }
  SUBCASE("full calibration of independent noise is a Kronecker product") {
    NoiseModel m;
    m.readout = {NoiseModel::symmetric_flip(0.03), NoiseModel::symmetric_flip(0.08)};
    const std::uint64_t shots = 50000;
    const auto full = calibrate(2, shots, 3, m, CalibrationMode::Full);
    Eigen::Matrix2d a0, a1;
    a0 << 0.97, 0.03, 0.03, 0.97;
    a1 << 0.92, 0.08, 0.08, 0.92;
    Eigen::MatrixXd kron(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) kron(r, c) = a1(r >> 1, c >> 1) * a0(r & 1, c & 1);
    CHECK((full.dense() - kron).cwiseAbs().maxCoeff() < 5 * std::sqrt(0.25 / shots));
    for (int c = 0; c < 4; ++c) CHECK(std::abs(full.full.col(c).sum() - 1.0) < 1e-12);
    const auto tens = calibrate(2, shots, 3, m, CalibrationMode::Tensored);
    CHECK((full.dense() - tens.dense()).cwiseAbs().maxCoeff() < 10 * std::sqrt(0.25 / shots));
  }
  CHECK_THROWS_AS(calibrate(2, 0, 1, NoiseModel{}, CalibrationMode::Full), std::invalid_argument);
  CHECK(default_calibration_mode(4) == CalibrationMode::Full);
  CHECK(default_calibration_mode(5) == CalibrationMode::Tensored);
  CHECK(parse_calibration_mode(to_string(CalibrationMode::Full)) == CalibrationMode::Full);
  CHECK_THROWS(parse_calibration_mode("both"));
}

TEST_CASE("mitigation") {
  SUBCASE("identity calibration returns the input") {
    const auto cal = calibrate(2, 100, 1, NoiseModel{}, CalibrationMode::Full);
    Eigen::VectorXd p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    const auto r = mitigate(p, cal);
    CHECK((r.probabilities - p).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("exact inversion of a known response") {
    CalibrationMatrix cal;
    cal.mode = CalibrationMode::Tensored;
    cal.n_qubits = 2;
    cal.per_qubit = {NoiseModel::symmetric_flip(0.1), NoiseModel::symmetric_flip(0.05)};
    Eigen::VectorXd ideal(4);
    ideal << 0.6, 0.1, 0.0, 0.3;
    const auto r = mitigate(cal.apply(ideal), cal);
    CHECK((r.probabilities - ideal).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((r.unconstrained - ideal).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("output is always a probability vector") {
    CalibrationMatrix cal;
    cal.mode = CalibrationMode::Tensored;
    cal.n_qubits = 2;
    cal.per_qubit = {NoiseModel::symmetric_flip(0.2), NoiseModel::symmetric_flip(0.2)};
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd raw(4);
      for (int k = 0; k < 4; ++k) raw(k) = rng.uniform();
      raw(t % 4) = 0.0;
      raw /= raw.sum();
      const auto r = mitigate(raw, cal);
      CHECK(r.probabilities.minCoeff() >= 0.0);
      CHECK(std::abs(r.probabilities.sum() - 1.0) < 1e-9);
      CHECK(std::abs(r.unconstrained.sum() - 1.0) < 1e-9);
    }
  }
  SUBCASE("constrained solution beats clipping the unconstrained one") {
    CalibrationMatrix cal;
    cal.mode = CalibrationMode::Tensored;
    cal.n_qubits = 1;
    cal.per_qubit = {NoiseModel::symmetric_flip(0.1)};
    Eigen::VectorXd raw(2);
    raw << 0.05, 0.95;  // below the 0.1 floor: unconstrained goes negative
    const auto r = mitigate(raw, cal);
    CHECK(r.unconstrained.minCoeff() < 0.0);
    CHECK(r.probabilities(0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.probabilities(1) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("ill-conditioned calibration is refused") {
    CalibrationMatrix cal;
    cal.mode = CalibrationMode::Tensored;
    cal.n_qubits = 1;
    cal.per_qubit = {NoiseModel::symmetric_flip(0.5 - 1e-8)};
    Eigen::VectorXd raw(2);
    raw << 0.5, 0.5;
    CHECK_THROWS_AS(mitigate(raw, cal), MitigationUnreliable);
  }
  SUBCASE("counts overload and dimension check") {
    const auto cal = calibrate(2, 100, 1, NoiseModel{}, CalibrationMode::Tensored);
    const Counts counts{{0, 30}, {3, 70}};
    const auto r = mitigate(counts, cal);
    CHECK(r.probabilities(0) == doctest::Approx(0.3));
    CHECK(r.probabilities(3) == doctest::Approx(0.7));
    CHECK_THROWS(mitigate(Eigen::VectorXd::Ones(8) / 8.0, cal));
  }
}

TEST_CASE("simplex projection") {
  Eigen::VectorXd v(3);
  v << 0.5, 0.7, -0.3;
  const auto p = project_to_simplex(v);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(p(0) == doctest::Approx(0.4));
  CHECK(p(1) == doctest::Approx(0.6));
  Eigen::VectorXd already(2);
  already << 0.25, 0.75;
  CHECK((project_to_simplex(already) - already).cwiseAbs().maxCoeff() < 1e-15);
}
