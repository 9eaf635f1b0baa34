#include "qsvm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "qsvm/error.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

namespace {

constexpr std::uint64_t kTrajectoryStream = 0x7472616a;  // "traj"
constexpr std::uint64_t kReadoutStream = 0x72656164;     // "read"
constexpr std::size_t kCheckpointStride = 16;

struct PauliError {
  std::size_t after_gate;
  int qubit;
  Pauli pauli;
};

std::vector<PauliError> draw_errors(const Circuit& circuit, const NoiseModel& model, Rng& rng) {
  std::vector<PauliError> errors;
  const auto gates = circuit.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const bool two = gates[g].is_two_qubit();
    const double p = two ? model.p2 : model.p1;
    if (p <= 0.0 || rng.uniform() >= p) continue;
    int qubit = gates[g].target;
    if (two && rng.below(2) == 0) qubit = gates[g].control;
    errors.push_back({g, qubit, static_cast<Pauli>(rng.below(3))});
  }
  return errors;
}

// Ideal states at every kCheckpointStride-th gate boundary, so trajectories
// replay only from the last checkpoint before their first error.
class PrefixCache {
 public:
  explicit PrefixCache(const Circuit& circuit) : circuit_(circuit) {
    Statevector s(circuit.n_qubits());
    const auto gates = circuit.gates();
    for (std::size_t g = 0; g < gates.size(); ++g) {
      if (g % kCheckpointStride == 0) checkpoints_.push_back(s);
      s.apply(gates[g]);
    }
    final_ = std::move(s);
  }

  const Statevector& final_state() const { return *final_; }

  Statevector run(const std::vector<PauliError>& errors) const {
    if (errors.empty()) return *final_;
    const std::size_t first = errors.front().after_gate;
    const std::size_t start = (first / kCheckpointStride) * kCheckpointStride;
    Statevector s = checkpoints_[start / kCheckpointStride];
    const auto gates = circuit_.gates();
    auto err = errors.begin();
    for (std::size_t g = start; g < gates.size(); ++g) {
      s.apply(gates[g]);
      for (; err != errors.end() && err->after_gate == g; ++err) s.apply_pauli(err->qubit, err->pauli);
    }
    return s;
  }

 private:
  const Circuit& circuit_;
  std::vector<Statevector> checkpoints_;
  std::optional<Statevector> final_;
};

std::uint64_t apply_readout(std::uint64_t outcome, int n_qubits, const NoiseModel& model,
                            std::uint64_t seed, std::uint64_t shot) {
  std::uint64_t reported = outcome;
  for (int q = 0; q < n_qubits; ++q) {
    const int bit = static_cast<int>((outcome >> q) & 1u);
    const double flip = model.confusion(q)(bit, 1 - bit);
    if (flip <= 0.0) continue;
    const double u = to_unit(derive_seed(seed ^ kReadoutStream, shot, static_cast<std::uint64_t>(q)));
    if (u < flip) reported ^= std::uint64_t{1} << q;
  }
  return reported;
}

// Applies a 2x2 matrix along qubit axis q of a length-2^n real vector.
void apply_axis(Eigen::VectorXd& v, int q, const Eigen::Matrix2d& m) {
  const std::size_t stride = std::size_t{1} << q;
  const auto d = static_cast<std::size_t>(v.size());
  for (std::size_t base = 0; base < d; base += 2 * stride) {
    for (std::size_t k = base; k < base + stride; ++k) {
      const double a0 = v[k];
      const double a1 = v[k + stride];
      v[k] = m(0, 0) * a0 + m(0, 1) * a1;
      v[k + stride] = m(1, 0) * a0 + m(1, 1) * a1;
    }
  }
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Circuit preparation_circuit(int n_qubits, std::uint64_t bits) {
  Circuit c(n_qubits);
  for (int q = 0; q < n_qubits; ++q)
    if ((bits >> q) & 1u) c.append(Gate::rx(q, std::numbers::pi));
  return c;
}

double singular_ratio(const Eigen::MatrixXd& m, double* sigma_max = nullptr) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (sigma_max) *sigma_max = s(0);
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

Eigen::Matrix2d NoiseModel::symmetric_flip(double q) {
  Eigen::Matrix2d m;
  m << 1.0 - q, q, q, 1.0 - q;
  return m;
}

NoiseModel NoiseModel::readout_only(double flip) {
  NoiseModel m;
  m.readout = {symmetric_flip(flip)};
  return m;
}

NoiseModel NoiseModel::toronto_like() {
  NoiseModel m;
  m.p1 = 0.001;
  m.p2 = 0.02;
  m.readout = {symmetric_flip(0.02)};
  return m;
}

Eigen::Matrix2d NoiseModel::confusion(int qubit) const {
  if (readout.empty()) return Eigen::Matrix2d::Identity();
  if (readout.size() == 1) return readout.front();
  if (qubit < 0 || static_cast<std::size_t>(qubit) >= readout.size()) {
    throw std::out_of_range("no readout confusion matrix for qubit " + std::to_string(qubit));
  }
  return readout[static_cast<std::size_t>(qubit)];
}

bool NoiseModel::ideal_readout() const {
  return std::all_of(readout.begin(), readout.end(),
                     [](const Eigen::Matrix2d& m) { return m(0, 1) == 0.0 && m(1, 0) == 0.0; });
}

void NoiseModel::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p1) || !prob(p2)) throw std::invalid_argument("gate error probability outside [0,1]");
  for (const auto& m : readout) {
    for (int r = 0; r < 2; ++r) {
      if (!prob(m(r, 0)) || !prob(m(r, 1)) || std::abs(m(r, 0) + m(r, 1) - 1.0) > 1e-12) {
        throw std::invalid_argument("readout confusion rows must be probability vectors");
      }
    }
  }
  if (trajectories == 0) throw std::invalid_argument("trajectories must be >= 1");
}

Counts noisy_sample(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed,
                    const NoiseModel& model) {
  if (shots == 0) throw std::invalid_argument("shots must be >= 1");
  model.validate();
  if (!model.readout.empty() && model.readout.size() != 1 &&
      model.readout.size() < static_cast<std::size_t>(circuit.n_qubits())) {
    throw DimensionMismatch("readout model covers fewer qubits than the circuit");
  }
  const int n = circuit.n_qubits();
  const PrefixCache prefix(circuit);
  const bool noisy_readout = !model.ideal_readout();

  std::vector<OutcomeSampler> samplers;
  if (model.ideal_gates()) {
    samplers.emplace_back(probabilities(prefix.final_state()));
  } else {
    const std::uint64_t t_count = std::min(model.trajectories, shots);
    samplers.reserve(t_count);
    std::optional<OutcomeSampler> ideal;
    for (std::uint64_t t = 0; t < t_count; ++t) {
      Rng rng(derive_seed(seed, kTrajectoryStream, t));
      const auto errors = draw_errors(circuit, model, rng);
      if (errors.empty()) {
        if (!ideal) ideal.emplace(probabilities(prefix.final_state()));
        samplers.push_back(*ideal);
      } else {
        samplers.emplace_back(probabilities(prefix.run(errors)));
      }
    }
  }

  Counts counts;
  for (std::uint64_t s = 0; s < shots; ++s) {
    std::uint64_t outcome = samplers[s % samplers.size()].draw(shot_uniform(seed, s));
    if (noisy_readout) outcome = apply_readout(outcome, n, model, seed, s);
    ++counts[outcome];
  }
  return counts;
}

CalibrationMode default_calibration_mode(int n_qubits) {
  return n_qubits > 4 ? CalibrationMode::Tensored : CalibrationMode::Full;
}

std::string_view to_string(CalibrationMode m) {
  return m == CalibrationMode::Full ? "full" : "tensored";
}

CalibrationMode parse_calibration_mode(std::string_view name) {
  if (name == "full") return CalibrationMode::Full;
  if (name == "tensored") return CalibrationMode::Tensored;
  throw std::invalid_argument("unknown calibration mode '" + std::string(name) + "'");
}

Eigen::MatrixXd CalibrationMatrix::dense() const {
  if (mode == CalibrationMode::Full) return full;
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (const auto& m : per_qubit) out = kron(m, out);
  return out;
}

Eigen::VectorXd CalibrationMatrix::apply(const Eigen::VectorXd& p) const {
  if (mode == CalibrationMode::Full) return full * p;
  Eigen::VectorXd v = p;
  for (int q = 0; q < n_qubits; ++q) apply_axis(v, q, per_qubit[static_cast<std::size_t>(q)]);
  return v;
}

Eigen::VectorXd CalibrationMatrix::apply_transpose(const Eigen::VectorXd& r) const {
  if (mode == CalibrationMode::Full) return full.transpose() * r;
  Eigen::VectorXd v = r;
  for (int q = 0; q < n_qubits; ++q)
    apply_axis(v, q, per_qubit[static_cast<std::size_t>(q)].transpose());
  return v;
}

double CalibrationMatrix::condition_number() const {
  if (mode == CalibrationMode::Full) return singular_ratio(full);
  double c = 1.0;
  for (const auto& m : per_qubit) c *= singular_ratio(m);
  return c;
}

CalibrationMatrix calibrate(int n_qubits, std::uint64_t shots, std::uint64_t seed,
                            const NoiseModel& model, CalibrationMode mode) {
  if (shots == 0) throw std::invalid_argument("calibration shots must be >= 1");
  NoiseModel readout_only = model;
  readout_only.p1 = 0.0;
  readout_only.p2 = 0.0;

  CalibrationMatrix cal;
  cal.mode = mode;
  cal.n_qubits = n_qubits;
  cal.shots = shots;
  const double inv = 1.0 / static_cast<double>(shots);
  if (mode == CalibrationMode::Full) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    cal.full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t prepared = 0; prepared < dim; ++prepared) {
      const auto counts = noisy_sample(preparation_circuit(n_qubits, prepared), shots,
                                       derive_seed(seed, prepared), readout_only);
      for (const auto& [measured, c] : counts)
        cal.full(static_cast<Eigen::Index>(measured), static_cast<Eigen::Index>(prepared)) =
            static_cast<double>(c) * inv;
    }
  } else {
    cal.per_qubit.assign(static_cast<std::size_t>(n_qubits), Eigen::Matrix2d::Zero());
    for (int q = 0; q < n_qubits; ++q) {
      for (int bit = 0; bit < 2; ++bit) {
        const std::uint64_t bits = static_cast<std::uint64_t>(bit) << q;
        const auto counts = noisy_sample(preparation_circuit(n_qubits, bits), shots,
                                         derive_seed(seed, static_cast<std::uint64_t>(q), bit),
                                         readout_only);
        for (const auto& [measured, c] : counts)
          cal.per_qubit[static_cast<std::size_t>(q)]((measured >> q) & 1u, bit) +=
              static_cast<double>(c) * inv;
      }
    }
  }
  return cal;
}

Eigen::VectorXd counts_to_probabilities(const Counts& counts, int n_qubits) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << n_qubits);
  std::uint64_t total = 0;
  for (const auto& [k, c] : counts) {
    if (k >= static_cast<std::uint64_t>(p.size())) {
      throw DimensionMismatch("outcome index exceeds the calibration dimension");
    }
    p(static_cast<Eigen::Index>(k)) = static_cast<double>(c);
    total += c;
  }
  if (total == 0) throw std::invalid_argument("empty counts");
  return p / static_cast<double>(total);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  return (v.array() - tau).max(0.0).matrix();
}

MitigationResult mitigate(const Eigen::VectorXd& raw, const CalibrationMatrix& cal) {
  const Eigen::Index dim = Eigen::Index{1} << cal.n_qubits;
  if (raw.size() != dim) throw DimensionMismatch("raw distribution does not match calibration");

  MitigationResult out;
  out.condition_number = cal.condition_number();
  if (!(out.condition_number <= kMaxCalibrationCondition)) {
    throw MitigationUnreliable("calibration matrix condition number " +
                               std::to_string(out.condition_number) + " exceeds 1e6");
  }

  double lipschitz = 1.0;
  if (cal.mode == CalibrationMode::Full) {
    out.unconstrained = cal.full.partialPivLu().solve(raw);
    double smax = 0.0;
    singular_ratio(cal.full, &smax);
    lipschitz = smax * smax;
  } else {
    out.unconstrained = raw;
    for (int q = 0; q < cal.n_qubits; ++q) {
      const auto& m = cal.per_qubit[static_cast<std::size_t>(q)];
      apply_axis(out.unconstrained, q, m.inverse());
      double smax = 0.0;
      singular_ratio(m, &smax);
      lipschitz *= smax * smax;
    }
  }

  const bool feasible = out.unconstrained.minCoeff() >= -1e-12 &&
                        std::abs(out.unconstrained.sum() - 1.0) <= 1e-9;
  Eigen::VectorXd x = project_to_simplex(out.unconstrained);
  if (feasible) {
    out.probabilities = x;
    return out;
  }

  // Accelerated projected gradient on 0.5 |A p - raw|^2 over the simplex.
  const double step = 1.0 / lipschitz;
  Eigen::VectorXd y = x;
  double t = 1.0;
  for (int iter = 0; iter < 20000; ++iter) {
    const Eigen::VectorXd grad = cal.apply_transpose(cal.apply(y) - raw);
    const Eigen::VectorXd next = project_to_simplex(y - step * grad);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    t = t_next;
    if (change < 1e-13) break;
  }
  out.probabilities = x;
  return out;
}

MitigationResult mitigate(const Counts& raw_counts, const CalibrationMatrix& cal) {
  return mitigate(counts_to_probabilities(raw_counts, cal.n_qubits), cal);
}

}  // namespace qsvm
