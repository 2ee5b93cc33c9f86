#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sdc/dataset.hpp"
#include "sdc/model.hpp"

namespace sdc {

struct ProbeOptions {
  double label_fraction = 1.0;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double accuracy = 0.0;
  std::size_t labeled = 0;
  std::size_t evaluated = 0;
};

// Class-stratified subset: floor(fraction·n_c) samples per class, chosen by
// seed. Throws ConfigError if a class ends up empty or if
// fraction·|dataset| < num_classes.
std::vector<std::size_t> stratified_subset(const Dataset& dataset, double fraction, std::uint64_t seed);

// Freezes the encoder, fits softmax regression on standardized
// representations of a labeled subset of `train`, and reports accuracy on
// `test`.
ProbeResult run_probe(const Encoder& encoder, const Dataset& train, const Dataset& test, const ProbeOptions& options);

// Encoder outputs for every sample, row-major [n×d_h].
Tensor representations(const Encoder& encoder, const Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace sdc
