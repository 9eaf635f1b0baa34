#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qsvm/preprocess.hpp"

namespace qsvm {

// Synthetic stand-in for collider data: isotropic "signal" events and
// two-jet "background" events, both in their CM frame.
struct GenConfig {
  int n_particles = 4;
  std::size_t n_events = 1000;  // per class
  double jet_spread = 0.35;     // radians, background cone width
  double momentum_scale = 1.0;  // GeV/c, mean |p|
  std::uint64_t seed = 1;

  static GenConfig three_particle();
  // jet_spread = 0.01: background is nearly collinear.
  static GenConfig near_collinear();

  // Throws std::invalid_argument.
  void validate() const;
};

// Event `index` of each class is a pure function of (cfg, index).
Event generate_signal(const GenConfig& cfg, std::uint64_t index);
Event generate_background(const GenConfig& cfg, std::uint64_t index);

// cfg.n_events of each class, alternating signal/background.
std::vector<Event> generate_dataset(const GenConfig& cfg);

// Text format: a "# qsvm-events v1" header, then one event per line:
//   label n px1 py1 pz1 ... pxn pyn pzn
// Reals are written in shortest round-trip form, so reading back recovers
// every double exactly. Labels are -1, 0 (unlabeled) or 1.
void write_events(std::span<const Event> events, const std::filesystem::path& path);
// Throws ParseError carrying the offending line number.
std::vector<Event> read_events(const std::filesystem::path& path);

// Same conventions for feature vectors:
//   "# qsvm-features v1", "p_max <value>", then "label clamped n v1 ... vn".
void write_features(std::span<const FeatureVector> features, double p_max,
                    const std::filesystem::path& path);
struct FeatureFile {
  std::vector<FeatureVector> features;
  double p_max = 0.0;
};
FeatureFile read_features(const std::filesystem::path& path);

}  // namespace qsvm
