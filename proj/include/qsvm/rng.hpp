#pragma once

#include <cstdint>
#include <random>

namespace qsvm {

// Counter-based seed derivation. Every random stream in the library is keyed
// by (seed, a, b) so results do not depend on evaluation order or threading.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
double to_unit(std::uint64_t bits) noexcept;

// Portable generator: the engine is fully specified by the standard and the
// distributions below are implemented here, so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return to_unit(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qsvm
