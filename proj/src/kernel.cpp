#include "qsvm/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qsvm/error.hpp"
#include "qsvm/kernel_io.hpp"
#include "qsvm/parallel.hpp"
#include "qsvm/rng.hpp"

namespace qsvm {

namespace {

constexpr std::uint64_t kCrossStream = 0x63726f7373;  // "cross"

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("feature lengths differ: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
}

Statevector encode(std::span<const double> x, const EncoderSpec& spec) {
  const Circuit c = build_encoding(spec, x);
  Statevector s(c.n_qubits());
  s.apply(c);
  return s;
}

std::vector<Statevector> encode_all(std::span<const FeatureVector> xs, const EncoderSpec& spec,
                                    unsigned threads) {
  std::vector<std::optional<Statevector>> tmp(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) { tmp[i] = encode(xs[i].values, spec); });
  std::vector<Statevector> out;
  out.reserve(xs.size());
  for (auto& s : tmp) out.push_back(std::move(*s));
  return out;
}

double fidelity(const Statevector& a, const Statevector& b) { return std::norm(inner_product(a, b)); }

template <typename Fn>
double with_context(Eigen::Index i, Eigen::Index j, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "kernel entry (" << i << ", " << j << "): " << e.what();
    throw std::runtime_error(msg.str());
  }
}

SamplingOptions pair_sampling(const SamplingOptions& base, std::uint64_t seed) {
  SamplingOptions s = base;
  s.seed = seed;
  return s;
}

KernelMatrix metadata(const GramOptions& opts) {
  KernelMatrix k;
  k.shots = opts.sampling.shots;
  k.seed = opts.sampling.seed;
  k.encoder = opts.encoder.tag();
  return k;
}

}  // namespace

double kernel_exact(std::span<const double> xi, std::span<const double> xj, const EncoderSpec& spec) {
  check_lengths(xi, xj);
  return fidelity(encode(xi, spec), encode(xj, spec));
}

Circuit kernel_circuit(std::span<const double> xi, std::span<const double> xj,
                       const EncoderSpec& spec) {
  check_lengths(xi, xj);
  Circuit c = build_encoding(spec, xj);
  c.append(build_encoding(spec, xi).adjoint());
  return c;
}

double kernel_sampled(std::span<const double> xi, std::span<const double> xj,
                      const EncoderSpec& spec, const SamplingOptions& sampling) {
  if (sampling.shots == 0) throw std::invalid_argument("kernel_sampled needs shots >= 1");
  const Circuit c = kernel_circuit(xi, xj, spec);
  Counts counts;
  if (sampling.noise) {
    counts = noisy_sample(c, sampling.shots, sampling.seed, *sampling.noise);
  } else {
    Statevector s(c.n_qubits());
    s.apply(c);
    counts = sample_counts(s, sampling.shots, sampling.seed);
  }
  if (sampling.mitigation) return mitigate(counts, *sampling.mitigation).probabilities(0);
  const auto it = counts.find(0);
  const double zeros = it == counts.end() ? 0.0 : static_cast<double>(it->second);
  return zeros / static_cast<double>(sampling.shots);
}

KernelMatrix gram_matrix(std::span<const FeatureVector> x, const GramOptions& opts) {
  if (x.empty()) throw std::invalid_argument("gram_matrix: empty input");
  const auto n = static_cast<Eigen::Index>(x.size());
  KernelMatrix k = metadata(opts);
  Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(n, n);
  const bool exact = opts.sampling.shots == 0;

  std::optional<GramCheckpoint> checkpoint;
  Eigen::Index first_row = 0;
  if (opts.checkpoint) {
    checkpoint.emplace(*opts.checkpoint, n, k);
    checkpoint->restore(upper);
    first_row = checkpoint->completed_rows();
  }

  std::vector<Statevector> states;
  if (exact && first_row < n) states = encode_all(x, opts.encoder, opts.threads);

  auto entry = [&](Eigen::Index i, Eigen::Index j) {
    return with_context(i, j, [&] {
      if (exact) return i == j ? 1.0 : fidelity(states[static_cast<std::size_t>(i)],
                                                 states[static_cast<std::size_t>(j)]);
      const auto seed = derive_seed(opts.sampling.seed, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(j));
      return kernel_sampled(x[static_cast<std::size_t>(i)].values,
                            x[static_cast<std::size_t>(j)].values, opts.encoder,
                            pair_sampling(opts.sampling, seed));
    });
  };

  // Rows are processed in blocks; pairs inside a block run in parallel and
  // finished rows are appended to the checkpoint in order.
  const Eigen::Index block = std::max<Eigen::Index>(1, 2 * resolve_threads(opts.threads));
  for (Eigen::Index r0 = first_row; r0 < n; r0 += block) {
    const Eigen::Index r1 = std::min(n, r0 + block);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i = r0; i < r1; ++i)
      for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
    parallel_for(pairs.size(), opts.threads, [&](std::size_t p) {
      const auto [i, j] = pairs[p];
      upper(i, j) = entry(i, j);
    });
    if (checkpoint)
      for (Eigen::Index i = r0; i < r1; ++i) checkpoint->append_row(i, upper);
  }

  k.entries = upper;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) k.entries(j, i) = upper(i, j);
  return k;
}

KernelMatrix cross_gram(std::span<const FeatureVector> x_test, std::span<const FeatureVector> x_train,
                        const GramOptions& opts) {
  if (x_test.empty() || x_train.empty()) throw std::invalid_argument("cross_gram: empty input");
  const auto rows = static_cast<Eigen::Index>(x_test.size());
  const auto cols = static_cast<Eigen::Index>(x_train.size());
  KernelMatrix k = metadata(opts);
  k.entries.resize(rows, cols);

  if (opts.sampling.shots == 0) {
    const auto test_states = encode_all(x_test, opts.encoder, opts.threads);
    const auto train_states = encode_all(x_train, opts.encoder, opts.threads);
    parallel_for(static_cast<std::size_t>(rows * cols), opts.threads, [&](std::size_t p) {
      const auto t = static_cast<Eigen::Index>(p) / cols;
      const auto r = static_cast<Eigen::Index>(p) % cols;
      k.entries(t, r) = with_context(t, r, [&] {
        return fidelity(test_states[static_cast<std::size_t>(t)],
                        train_states[static_cast<std::size_t>(r)]);
      });
    });
    return k;
  }

  const std::uint64_t base = derive_seed(opts.sampling.seed, kCrossStream);
  parallel_for(static_cast<std::size_t>(rows * cols), opts.threads, [&](std::size_t p) {
    const auto t = static_cast<Eigen::Index>(p) / cols;
    const auto r = static_cast<Eigen::Index>(p) % cols;
    k.entries(t, r) = with_context(t, r, [&] {
      const auto seed = derive_seed(base, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(r));
      return kernel_sampled(x_test[static_cast<std::size_t>(t)].values,
                            x_train[static_cast<std::size_t>(r)].values, opts.encoder,
                            pair_sampling(opts.sampling, seed));
    });
  });
  return k;
}

double rbf_kernel(std::span<const double> xi, std::span<const double> xj, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("rbf sigma must be positive");
  check_lengths(xi, xj);
  double d2 = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) d2 += (xi[k] - xj[k]) * (xi[k] - xj[k]);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

namespace {

std::string rbf_tag(double sigma) {
  std::ostringstream s;
  s.precision(17);
  s << "rbf-sigma=" << sigma;
  return s.str();
}

}  // namespace

KernelMatrix rbf_gram(std::span<const FeatureVector> x, double sigma) {
  if (x.empty()) throw std::invalid_argument("rbf_gram: empty input");
  const auto n = static_cast<Eigen::Index>(x.size());
  KernelMatrix k;
  k.encoder = rbf_tag(sigma);
  k.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k.entries(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(x[static_cast<std::size_t>(i)].values,
                                  x[static_cast<std::size_t>(j)].values, sigma);
      k.entries(i, j) = v;
      k.entries(j, i) = v;
    }
  }
  return k;
}

KernelMatrix rbf_cross(std::span<const FeatureVector> x_test, std::span<const FeatureVector> x_train,
                       double sigma) {
  if (x_test.empty() || x_train.empty()) throw std::invalid_argument("rbf_cross: empty input");
  KernelMatrix k;
  k.encoder = rbf_tag(sigma);
  k.entries.resize(static_cast<Eigen::Index>(x_test.size()), static_cast<Eigen::Index>(x_train.size()));
  for (std::size_t t = 0; t < x_test.size(); ++t)
    for (std::size_t r = 0; r < x_train.size(); ++r)
      k.entries(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(r)) =
          rbf_kernel(x_test[t].values, x_train[r].values, sigma);
  return k;
}

double min_eigenvalue(const Eigen::MatrixXd& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double repair_psd(Eigen::MatrixXd& k, PsdRepair mode) {
  if (mode == PsdRepair::DiagonalShift) {
    const double lmin = min_eigenvalue(k);
    const double shift = std::max(0.0, -lmin + 1e-8);
    if (lmin < 0.0) k.diagonal().array() += shift;
    return lmin;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < 0.0) {
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    k = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  }
  return lmin;
}

}  // namespace qsvm
