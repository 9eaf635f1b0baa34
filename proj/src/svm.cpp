#include "qsvm/svm.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qsvm/error.hpp"

namespace qsvm {

namespace {

constexpr double kTau = 1e-12;

void validate(const Eigen::MatrixXd& k, std::span<const int> y, const TrainConfig& cfg) {
  if (k.rows() != k.cols()) throw DimensionMismatch("training kernel must be square");
  if (static_cast<std::size_t>(k.rows()) != y.size()) {
    throw DimensionMismatch("kernel size " + std::to_string(k.rows()) + " != label count " +
                            std::to_string(y.size()));
  }
  if (!(cfg.C > 0.0) || !(cfg.tolerance > 0.0) || cfg.max_iterations <= 0) {
    throw std::invalid_argument("C, tolerance and max_iterations must be positive");
  }
  if (!k.allFinite()) throw std::invalid_argument("kernel has non-finite entries");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw std::invalid_argument("labels must be -1 or +1");
  }
  if (!pos || !neg) throw std::invalid_argument("training labels contain a single class");
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

double dual_objective(const Eigen::MatrixXd& k, std::span<const int> y, std::span<const double> a) {
  double quad = 0.0, lin = 0.0;
  const auto n = static_cast<Eigen::Index>(a.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    lin += a[static_cast<std::size_t>(i)];
    if (a[static_cast<std::size_t>(i)] == 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      quad += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)] *
              y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * k(i, j);
  }
  return 0.5 * quad - lin;
}

SvmModel train(const Eigen::MatrixXd& k, std::span<const int> y, const TrainConfig& cfg) {
  validate(k, y, cfg);
  const auto n = static_cast<Eigen::Index>(y.size());
  const double C = cfg.C;
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  std::vector<double> g(static_cast<std::size_t>(n), -1.0);  // Q a - e
  auto yy = [&](Eigen::Index i) { return static_cast<double>(y[static_cast<std::size_t>(i)]); };
  auto q = [&](Eigen::Index i, Eigen::Index j) { return yy(i) * yy(j) * k(i, j); };
  auto in_up = [&](Eigen::Index t) {
    const double at = a[static_cast<std::size_t>(t)];
    return (yy(t) > 0 && at < C) || (yy(t) < 0 && at > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    const double at = a[static_cast<std::size_t>(t)];
    return (yy(t) > 0 && at > 0) || (yy(t) < 0 && at < C);
  };
  auto objective = [&] {
    double f = 0.0;
    for (Eigen::Index t = 0; t < n; ++t)
      f += a[static_cast<std::size_t>(t)] * (g[static_cast<std::size_t>(t)] - 1.0);
    return 0.5 * f;
  };

  SvmModel m;
  m.C = C;
  m.tolerance = cfg.tolerance;
  m.labels.assign(y.begin(), y.end());
  m.kernel_hash = kernel_hash(k);

  long iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    if (iter % n == 0) m.objective_trace.push_back(objective());

    // i: maximal -y_t g_t over I_up
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_up(t)) continue;
      const double v = -yy(t) * g[static_cast<std::size_t>(t)];
      if (v > gmax) {
        gmax = v;
        i = t;
      }
    }
    // j: second-order choice among violating members of I_low
    Eigen::Index j = -1;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -yy(t) * g[static_cast<std::size_t>(t)];
      gmin = std::min(gmin, v);
      if (i < 0 || v >= gmax) continue;
      const double b = gmax - v;
      double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (quad <= 0.0) quad = kTau;
      const double score = -(b * b) / quad;
      if (score < best) {
        best = score;
        j = t;
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < cfg.tolerance) {
      m.converged = true;
      break;
    }

    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    const double ai_old = a[si];
    const double aj_old = a[sj];
    if (y[si] != y[sj]) {
      double quad = k(i, i) + k(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[si] - g[sj]) / quad;
      const double diff = a[si] - a[sj];
      a[si] += delta;
      a[sj] += delta;
      if (diff > 0) {
        if (a[sj] < 0) { a[sj] = 0; a[si] = diff; }
      } else {
        if (a[si] < 0) { a[si] = 0; a[sj] = -diff; }
      }
      if (diff > 0) {
        if (a[si] > C) { a[si] = C; a[sj] = C - diff; }
      } else {
        if (a[sj] > C) { a[sj] = C; a[si] = C + diff; }
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[si] - g[sj]) / quad;
      const double sum = a[si] + a[sj];
      a[si] -= delta;
      a[sj] += delta;
      if (sum > C) {
        if (a[si] > C) { a[si] = C; a[sj] = sum - C; }
      } else {
        if (a[sj] < 0) { a[sj] = 0; a[si] = sum; }
      }
      if (sum > C) {
        if (a[sj] > C) { a[sj] = C; a[si] = sum - C; }
      } else {
        if (a[si] < 0) { a[si] = 0; a[sj] = sum; }
      }
    }
    const double di = a[si] - ai_old;
    const double dj = a[sj] - aj_old;
    for (Eigen::Index t = 0; t < n; ++t)
      g[static_cast<std::size_t>(t)] += q(t, i) * di + q(t, j) * dj;
  }
  m.iterations = iter;
  m.objective = objective();
  m.objective_trace.push_back(m.objective);

  // Bias from free support vectors; otherwise the midpoint of the feasible
  // interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const double yg = yy(t) * g[st];
    if (a[st] >= C) {
      if (yy(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[st] <= 0) {
      if (yy(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  m.bias = -rho;

  m.alphas = std::move(a);
  for (std::size_t t = 0; t < m.alphas.size(); ++t)
    if (m.alphas[t] > 0.0) m.support.push_back(t);
  return m;
}

Eigen::VectorXd decision_function(const SvmModel& model, const Eigen::MatrixXd& k_cross) {
  if (static_cast<std::size_t>(k_cross.cols()) != model.size()) {
    throw DimensionMismatch("cross kernel has " + std::to_string(k_cross.cols()) +
                            " columns, model has " + std::to_string(model.size()) +
                            " training points");
  }
  Eigen::VectorXd scores = Eigen::VectorXd::Constant(k_cross.rows(), model.bias);
  for (std::size_t s : model.support) {
    const double w = model.alphas[s] * model.labels[s];
    scores += w * k_cross.col(static_cast<Eigen::Index>(s));
  }
  return scores;
}

Prediction predict(const SvmModel& model, const Eigen::MatrixXd& k_cross) {
  const Eigen::VectorXd raw = decision_function(model, k_cross);
  Prediction p;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    p.raw_scores.push_back(raw(i));
    p.classes.push_back(raw(i) >= 0.0 ? 1 : 0);
    p.unit_scores.push_back(1.0 / (1.0 + std::exp(-raw(i))));
  }
  return p;
}

std::string kernel_hash(const Eigen::MatrixXd& kernel) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(kernel.rows()),
                                 static_cast<std::uint64_t>(kernel.cols())};
  mix(dims, sizeof(dims));
  for (Eigen::Index i = 0; i < kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      const double v = kernel(i, j);
      mix(&v, sizeof(v));
    }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Text format, one "key value..." per line:
//   qsvm-model v1
//   C <c>
//   tolerance <tol>
//   kernel_hash <hex>
//   n <training points>
//   bias <b>
//   labels <y_1> ... <y_n>
//   support <count>
//   <index> <alpha_i * y_i>      (one line per support vector)
void write_model(const SvmModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "qsvm-model v1\n";
  out << "C " << fmt(m.C) << "\n";
  out << "tolerance " << fmt(m.tolerance) << "\n";
  out << "kernel_hash " << m.kernel_hash << "\n";
  out << "n " << m.size() << "\n";
  out << "bias " << fmt(m.bias) << "\n";
  out << "labels";
  for (int y : m.labels) out << ' ' << y;
  out << "\nsupport " << m.support.size() << "\n";
  for (std::size_t s : m.support) out << s << ' ' << fmt(m.alphas[s] * m.labels[s]) << "\n";
}

SvmModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const std::string& key) {
    if (!std::getline(in, line)) throw ParseError("missing '" + key + "'", lineno + 1);
    ++lineno;
    std::istringstream s(line);
    std::string k;
    s >> k;
    if (k != key) throw ParseError("expected '" + key + "', found '" + k + "'", lineno);
    return s.str().substr(k.size());
  };
  auto parse = [&](const std::string& text, auto& v) {
    std::istringstream s(text);
    if (!(s >> v)) throw ParseError("bad value '" + text + "'", lineno);
  };

  if (!std::getline(in, line) || line != "qsvm-model v1") throw ParseError("not a qsvm model file", 1);
  ++lineno;
  SvmModel m;
  parse(next("C"), m.C);
  parse(next("tolerance"), m.tolerance);
  {
    std::istringstream s(next("kernel_hash"));
    s >> m.kernel_hash;
  }
  std::size_t n = 0;
  parse(next("n"), n);
  parse(next("bias"), m.bias);
  {
    std::istringstream s(next("labels"));
    m.labels.resize(n);
    for (auto& y : m.labels)
      if (!(s >> y) || (y != 1 && y != -1)) throw ParseError("bad label list", lineno);
  }
  std::size_t count = 0;
  parse(next("support"), count);
  m.alphas.assign(n, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    if (!std::getline(in, line)) throw ParseError("truncated support list", lineno + 1);
    ++lineno;
    std::istringstream s(line);
    std::size_t idx = 0;
    double ay = 0.0;
    if (!(s >> idx >> ay) || idx >= n) throw ParseError("bad support line", lineno);
    m.alphas[idx] = ay * m.labels[idx];
    m.support.push_back(idx);
  }
  m.converged = true;
  return m;
}

}  // namespace qsvm
