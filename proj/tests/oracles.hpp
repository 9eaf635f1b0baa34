// Brute-force reference implementations used only by tests. None of these
// share code with the library beyond plain data types.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "qsvm/statevec.hpp"

namespace oracle {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cd = std::complex<double>;

inline Eigen::Matrix2cd single_qubit_matrix(const qsvm::Gate& g) {
  const cd i(0.0, 1.0);
  Eigen::Matrix2cd m;
  switch (g.kind) {
    case qsvm::GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      m << r, r, r, -r;
      break;
    }
    case qsvm::GateKind::RX: {
      const double c = std::cos(g.angle / 2), s = std::sin(g.angle / 2);
      m << c, -i * s, -i * s, c;
      break;
    }
    case qsvm::GateKind::RZ:
      m << std::exp(-i * (g.angle / 2)), 0.0, 0.0, std::exp(i * (g.angle / 2));
      break;
    default:
      m.setIdentity();
  }
  return m;
}

// Full 2^n x 2^n matrix via Kronecker products; qubit 0 is the rightmost
// factor so that it is the least-significant bit of the basis index.
inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

inline CMat gate_matrix(const qsvm::Gate& g, int n) {
  if (g.kind != qsvm::GateKind::CNOT) {
    CMat m = CMat::Identity(1, 1);
    for (int q = n - 1; q >= 0; --q) {
      const CMat f = q == g.target ? CMat(single_qubit_matrix(g)) : CMat(CMat::Identity(2, 2));
      m = kron(m, f);
    }
    return m;
  }
  // |0><0|_c (x) I + |1><1|_c (x) X_t, each lifted by Kronecker products.
  CMat p0 = CMat::Identity(1, 1), p1 = CMat::Identity(1, 1);
  CMat proj0 = CMat::Zero(2, 2), proj1 = CMat::Zero(2, 2), x = CMat::Zero(2, 2);
  proj0(0, 0) = 1.0;
  proj1(1, 1) = 1.0;
  x(0, 1) = x(1, 0) = 1.0;
  for (int q = n - 1; q >= 0; --q) {
    const CMat id = CMat::Identity(2, 2);
    p0 = kron(p0, q == g.control ? proj0 : id);
    p1 = kron(p1, q == g.control ? proj1 : (q == g.target ? x : id));
  }
  return p0 + p1;
}

inline CVec to_vec(const qsvm::Statevector& s) {
  CVec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t k = 0; k < s.dim(); ++k) v(static_cast<Eigen::Index>(k)) = s[k];
  return v;
}

// exp(A) by scaling and squaring with a 30-term Taylor series.
inline CMat expm(const CMat& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.5) ++squarings;
  const CMat b = a / std::pow(2.0, squarings);
  CMat term = CMat::Identity(a.rows(), a.cols());
  CMat sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// |<a|b>|^2 invariant comparison up to global phase.
inline double phase_free_distance(const CVec& a, const CVec& b) {
  const cd overlap = a.dot(b);  // conjugates a
  const cd phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : cd(1.0);
  return (b - phase * a).cwiseAbs().maxCoeff();
}

// ---- thrust ----

inline double thrust_of(std::span<const Eigen::Vector3d> p, const Eigen::Vector3d& n) {
  double num = 0.0, den = 0.0;
  for (const auto& v : p) {
    num += std::abs(v.dot(n));
    den += v.norm();
  }
  return num / den;
}

struct GridThrust {
  Eigen::Vector3d axis;
  double value;
};

// Fibonacci-lattice scan of `directions` points on the sphere, then pattern
// search on the tangent plane with a shrinking step.
inline GridThrust grid_thrust(std::span<const Eigen::Vector3d> p, int directions = 1'000'000) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::Vector3d best(0, 0, 1);
  double best_t = -1.0;
  for (int k = 0; k < directions; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / directions;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * k;
    const Eigen::Vector3d n(r * std::cos(a), r * std::sin(a), z);
    const double t = thrust_of(p, n);
    if (t > best_t) {
      best_t = t;
      best = n;
    }
  }
  double step = 0.01;
  constexpr int kDirs = 24;
  while (step > 1e-13) {
    Eigen::Vector3d u = best.unitOrthogonal();
    Eigen::Vector3d v = best.cross(u);
    bool improved = false;
    for (int d = 0; d < kDirs; ++d) {
      const double a = 2.0 * std::numbers::pi * d / kDirs;
      const Eigen::Vector3d cand = (best + step * (std::cos(a) * u + std::sin(a) * v)).normalized();
      const double t = thrust_of(p, cand);
      if (t > best_t) {
        best_t = t;
        best = cand;
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, best_t};
}

// Angle between axes, ignoring sign.
inline double axis_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0));
}

// ---- SVM dual QP ----

// Euclidean projection onto {0 <= a <= C, y^T a = 0} by bisection on the
// multiplier of the equality constraint.
inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double c) {
  auto at = [&](double mu) {
    Eigen::VectorXd a = v - mu * y;
    return a.cwiseMax(0.0).cwiseMin(c).eval();
  };
  double lo = -1.0, hi = 1.0;
  while (y.dot(at(lo)) < 0) lo *= 2;
  while (y.dot(at(hi)) > 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (y.dot(at(mid)) > 0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

inline double dual_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& a) {
  return 0.5 * a.dot(q * a) - a.sum();
}

// Accelerated projected gradient followed by an equality-constrained Newton
// polish on the apparent free set.
inline Eigen::VectorXd solve_dual(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c) {
  const Eigen::Index n = k.rows();
  const Eigen::MatrixXd q = y.asDiagonal() * k * y.asDiagonal();
  const double lip = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff());
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), z = a, prev = a;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd g = q * z - Eigen::VectorXd::Ones(n);
    a = project_box_hyperplane(z - g / lip, y, c);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = a + ((t - 1.0) / tn) * (a - prev);
    if ((a - prev).norm() < 1e-15 && it > 100) break;
    prev = a;
    t = tn;
  }
  // Polish: solve the KKT system restricted to free variables.
  const double eps = 1e-7 * c;
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i)
    if (a(i) > eps && a(i) < c - eps) free.push_back(i);
  if (!free.empty()) {
    const Eigen::Index f = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(f + 1, f + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
    for (Eigen::Index r = 0; r < f; ++r) {
      double bound = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (std::find(free.begin(), free.end(), j) == free.end()) bound += q(free[r], j) * (a(j) > c / 2 ? c : 0.0);
      for (Eigen::Index s = 0; s < f; ++s) m(r, s) = q(free[r], free[s]);
      m(r, f) = y(free[r]);
      m(f, r) = y(free[r]);
      rhs(r) = 1.0 - bound;
    }
    double ybound = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::find(free.begin(), free.end(), j) == free.end()) ybound += y(j) * (a(j) > c / 2 ? c : 0.0);
    rhs(f) = -ybound;
    const Eigen::VectorXd sol = m.completeOrthogonalDecomposition().solve(rhs);
    Eigen::VectorXd polished = a;
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::find(free.begin(), free.end(), j) == free.end()) polished(j) = a(j) > c / 2 ? c : 0.0;
    for (Eigen::Index r = 0; r < f; ++r) polished(free[r]) = sol(r);
    const bool feasible = polished.minCoeff() >= -1e-12 && polished.maxCoeff() <= c + 1e-12;
    if (feasible && dual_objective(q, polished) <= dual_objective(q, a)) a = polished.cwiseMax(0.0).cwiseMin(c);
  }
  return a;
}

// ---- AUC ----

// Probability that a random positive outscores a random negative, ties 1/2.
inline double auc_pairwise(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] <= 0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] > 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace oracle
