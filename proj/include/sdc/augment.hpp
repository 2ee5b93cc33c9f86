#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sdc/rng.hpp"
#include "sdc/sample.hpp"

namespace sdc {

struct AugmentorConfig {
  Layout layout;

  // Image only: square-ish random crop with side fraction in
  // [crop_min, crop_max], resized back bilinearly.
  bool crop_enabled = true;
  double crop_min = 0.5;
  double crop_max = 1.0;

  // Optional extra op, off by default: the weak view applied with this
  // probability.
  bool flip_enabled = false;
  double flip_probability = 0.5;

  // Additive Gaussian noise, sigma expressed as a multiple of the sample's
  // own feature standard deviation.
  bool noise_enabled = true;
  double noise_sigma = 0.1;

  // A random contiguous run of this fraction of coordinates set to zero.
  bool mask_enabled = true;
  double mask_fraction = 0.1;

  std::uint64_t seed = 0;

  // Throws ConfigError on out-of-range parameters.
  void validate() const;

  // Everything off: strong views equal the input.
  static AugmentorConfig identity(Layout layout);
};

// Deterministic weak view: horizontal flip for images, index reversal for
// vectors. An involution that consumes no randomness.
Sample weak_view(const Sample& x, const Layout& layout);
std::vector<double> weak_view(std::span<const double> features, const Layout& layout);

// One strongly augmented copy of x.
Sample strong_view(const Sample& x, const AugmentorConfig& config, Rng& rng);

// Two independent strong views; the first draws before the second.
std::pair<Sample, Sample> strong_pair(const Sample& x, const AugmentorConfig& config, Rng& rng);

// The pair for buffer slot `slot` at `iteration`, drawn from the run's
// augmentation substream so that other random consumers cannot perturb it.
std::pair<Sample, Sample> strong_pair_at(const Sample& x, const AugmentorConfig& config, std::uint64_t iteration,
                                         std::uint64_t slot);

}  // namespace sdc
