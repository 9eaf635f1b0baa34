#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace qsvm {

// Class labels: -1 continuum background (qq), +1 signal (BB), 0 unlabeled.
enum class Label : int { Background = -1, Unlabeled = 0, Signal = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

struct Event {
  std::vector<Eigen::Vector3d> particles;  // momenta in GeV/c
  Label label = Label::Unlabeled;
};

struct Thrust {
  Eigen::Vector3d axis;  // unit vector, sign-canonicalized
  double value = 0.0;    // T in (0.5, 1]
};

struct SphericalMomentum {
  double p = 0.0;      // |p|
  double theta = 0.0;  // angle to the thrust axis, [0, pi]
  double phi = 0.0;    // azimuth about the thrust axis, [-pi, pi)
};

struct ThrustFrameEvent {
  std::vector<SphericalMomentum> particles;
  Eigen::Vector3d thrust_axis;
  double thrust_value = 0.0;
  Label label = Label::Unlabeled;
};

// Flat [p~_1, theta_1, phi_1, ..., p~_k, theta_k, phi_k], p~ = p * pi / p_max.
struct FeatureVector {
  std::vector<double> values;
  Label label = Label::Unlabeled;
  int clamped = 0;  // particles with p > p_max, clamped to pi

  std::size_t particle_count() const { return values.size() / 3; }
};

// T(n) = sum |P_i . n| / sum |P_i|
double thrust_value(std::span<const Eigen::Vector3d> momenta, const Eigen::Vector3d& axis);

// Flips n so that z >= 0 (ties broken on y, then x).
Eigen::Vector3d canonicalize_axis(Eigen::Vector3d n);

// Maximizes T by fixed-point ascent n <- sum sign(P_i . n) P_i from a fixed
// set of seed directions. Throws DegenerateEvent if every momentum is zero.
Thrust thrust_axis(std::span<const Eigen::Vector3d> momenta);
inline Thrust thrust_axis(const Event& e) { return thrust_axis(e.particles); }

struct FourMomenta {
  std::vector<Eigen::Vector3d> momenta;
  std::vector<double> energies;
};

// Boosts into the frame with zero total momentum. Missing energies are
// taken as massless (E = |p|). Throws UnphysicalEvent if E_tot <= |P_tot|.
FourMomenta boost_to_cm(std::span<const Eigen::Vector3d> momenta,
                        std::span<const double> energies = {});
Event boost_to_cm(const Event& event, std::span<const double> energies = {});

ThrustFrameEvent to_thrust_frame(const Event& event);

// Throws std::invalid_argument if p_max <= 0.
FeatureVector normalize(const ThrustFrameEvent& tfe, double p_max);

// Maximum |p| across every particle of every collection.
double compute_p_max(std::span<const std::vector<Event>> datasets);
double compute_p_max(std::span<const Event> events);

// Thrust frame then normalize. Expects events already in their CM frame, so
// that p_max computed on the same events bounds every |p|.
FeatureVector make_features(const Event& event, double p_max);
std::vector<FeatureVector> make_features(std::span<const Event> events, double p_max);

}  // namespace qsvm
