#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace sdc {

// Seeded generator with platform-independent distributions. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// distributions below are implemented here because the std:: ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream addressed by (seed, path...). Two calls with the same
  // arguments yield identical sequences regardless of what else was drawn.
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace sdc
