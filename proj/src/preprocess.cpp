#include "qsvm/preprocess.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qsvm/error.hpp"

namespace qsvm {

namespace {

constexpr double kPi = std::numbers::pi;

// Vertices of a regular dodecahedron: 20 directions spread evenly over the
// sphere.
std::array<Eigen::Vector3d, 20> icosahedral_seeds() {
  const double g = std::numbers::phi;
  const double ig = 1.0 / g;
  std::array<Eigen::Vector3d, 20> s;
  std::size_t k = 0;
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0})
      for (double z : {-1.0, 1.0}) s[k++] = Eigen::Vector3d(x, y, z);
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      s[k++] = Eigen::Vector3d(0.0, a * ig, b * g);
      s[k++] = Eigen::Vector3d(a * ig, b * g, 0.0);
      s[k++] = Eigen::Vector3d(a * g, 0.0, b * ig);
    }
  }
  for (auto& v : s) v.normalize();
  return s;
}

Eigen::Vector3d ascend(std::span<const Eigen::Vector3d> momenta, Eigen::Vector3d n) {
  std::vector<bool> signs(momenta.size());
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    bool changed = iter == 0;
    for (std::size_t i = 0; i < momenta.size(); ++i) {
      const bool positive = momenta[i].dot(n) >= 0.0;
      if (positive != signs[i]) changed = true;
      signs[i] = positive;
      sum += positive ? momenta[i] : Eigen::Vector3d(-momenta[i]);
    }
    const double len = sum.norm();
    if (len == 0.0) return n;
    n = sum / len;
    if (!changed) break;
  }
  return n;
}

}  // namespace

double thrust_value(std::span<const Eigen::Vector3d> momenta, const Eigen::Vector3d& axis) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : momenta) {
    num += std::abs(p.dot(axis));
    den += p.norm();
  }
  if (den == 0.0) throw DegenerateEvent("event has zero total |p|");
  return num / den;
}

Eigen::Vector3d canonicalize_axis(Eigen::Vector3d n) {
  constexpr double eps = 1e-12;
  bool flip = false;
  if (std::abs(n.z()) > eps) {
    flip = n.z() < 0.0;
  } else if (std::abs(n.y()) > eps) {
    flip = n.y() < 0.0;
  } else {
    flip = n.x() < 0.0;
  }
  if (flip) n = -n;
  return n;
}

Thrust thrust_axis(std::span<const Eigen::Vector3d> momenta) {
  double total = 0.0;
  for (const auto& p : momenta) {
    if (!p.allFinite()) throw std::invalid_argument("non-finite momentum component");
    total += p.norm();
  }
  if (momenta.empty() || total == 0.0) throw DegenerateEvent("all momenta are zero");

  // The icosahedral seeds are supplemented by every particle direction; the
  // optimum is a fixed point of the ascent, and seeding from the particles
  // makes the sign pattern of the optimum reachable for small events.
  std::vector<Eigen::Vector3d> seeds;
  for (const auto& s : icosahedral_seeds()) seeds.push_back(s);
  for (const auto& p : momenta)
    if (p.norm() > 0.0) seeds.push_back(p.normalized());

  Thrust best{Eigen::Vector3d::UnitZ(), -1.0};
  for (const auto& seed : seeds) {
    const Eigen::Vector3d n = ascend(momenta, seed);
    const double t = thrust_value(momenta, n);
    if (t > best.value) best = {n, t};
  }
  best.axis = canonicalize_axis(best.axis.normalized());
  return best;
}

FourMomenta boost_to_cm(std::span<const Eigen::Vector3d> momenta,
                        std::span<const double> energies) {
  if (!energies.empty() && energies.size() != momenta.size()) {
    throw DimensionMismatch("energy count does not match particle count");
  }
  FourMomenta out;
  out.momenta.assign(momenta.begin(), momenta.end());
  out.energies.resize(momenta.size());
  Eigen::Vector3d total_p = Eigen::Vector3d::Zero();
  double total_e = 0.0;
  for (std::size_t i = 0; i < momenta.size(); ++i) {
    out.energies[i] = energies.empty() ? momenta[i].norm() : energies[i];
    total_p += momenta[i];
    total_e += out.energies[i];
  }
  const double p_mag = total_p.norm();
  if (p_mag == 0.0) return out;
  if (!(total_e > p_mag)) {
    throw UnphysicalEvent("total energy " + std::to_string(total_e) +
                          " does not exceed total momentum " + std::to_string(p_mag));
  }
  const Eigen::Vector3d beta = total_p / total_e;
  const double b2 = beta.squaredNorm();
  const double gamma = 1.0 / std::sqrt(1.0 - b2);
  for (std::size_t i = 0; i < momenta.size(); ++i) {
    const Eigen::Vector3d& p = momenta[i];
    const double e = out.energies[i];
    const double bp = beta.dot(p);
    out.momenta[i] = p + ((gamma - 1.0) * bp / b2 - gamma * e) * beta;
    out.energies[i] = gamma * (e - bp);
  }
  return out;
}

Event boost_to_cm(const Event& event, std::span<const double> energies) {
  Event out;
  out.label = event.label;
  out.particles = boost_to_cm(event.particles, energies).momenta;
  return out;
}

ThrustFrameEvent to_thrust_frame(const Event& event) {
  const Thrust t = thrust_axis(event.particles);
  const Eigen::Vector3d& n = t.axis;

  // Azimuth origin: the component of global x perpendicular to the axis.
  Eigen::Vector3d ref = Eigen::Vector3d::UnitX() - n.x() * n;
  if (ref.norm() < 1e-6) ref = Eigen::Vector3d::UnitY() - n.y() * n;
  const Eigen::Vector3d e1 = ref.normalized();
  const Eigen::Vector3d e2 = n.cross(e1);

  ThrustFrameEvent out;
  out.thrust_axis = n;
  out.thrust_value = t.value;
  out.label = event.label;
  out.particles.reserve(event.particles.size());
  for (const auto& p : event.particles) {
    const double along = p.dot(n);
    const double a = p.dot(e1);
    const double b = p.dot(e2);
    SphericalMomentum s;
    s.p = p.norm();
    s.theta = std::atan2(std::hypot(a, b), along);
    s.phi = std::atan2(b, a);
    if (s.phi >= kPi) s.phi -= 2.0 * kPi;
    out.particles.push_back(s);
  }
  return out;
}

FeatureVector normalize(const ThrustFrameEvent& tfe, double p_max) {
  if (!(p_max > 0.0)) throw std::invalid_argument("p_max must be positive");
  FeatureVector fv;
  fv.label = tfe.label;
  fv.values.reserve(3 * tfe.particles.size());
  for (const auto& s : tfe.particles) {
    double p = s.p * kPi / p_max;
    if (s.p > p_max) {
      p = kPi;
      ++fv.clamped;
    }
    double phi = s.phi < 0.0 ? s.phi + 2.0 * kPi : s.phi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    fv.values.push_back(p);
    fv.values.push_back(s.theta);
    fv.values.push_back(phi);
  }
  return fv;
}

double compute_p_max(std::span<const Event> events) {
  if (events.empty()) throw std::invalid_argument("compute_p_max: no events");
  double best = 0.0;
  for (const auto& e : events)
    for (const auto& p : e.particles) best = std::max(best, p.norm());
  return best;
}

double compute_p_max(std::span<const std::vector<Event>> datasets) {
  bool any = false;
  double best = 0.0;
  for (const auto& d : datasets) {
    if (d.empty()) continue;
    any = true;
    best = std::max(best, compute_p_max(std::span<const Event>(d)));
  }
  if (!any) throw std::invalid_argument("compute_p_max: no events");
  return best;
}

FeatureVector make_features(const Event& event, double p_max) {
  return normalize(to_thrust_frame(event), p_max);
}

std::vector<FeatureVector> make_features(std::span<const Event> events, double p_max) {
  std::vector<FeatureVector> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(make_features(e, p_max));
  return out;
}

}  // namespace qsvm
