#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdc/tensor.hpp"

namespace sdc {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Classic L2 decay: added to the gradient before the moment updates.
  double weight_decay = 1e-4;
};

struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

AdamState make_adam_state(std::span<const Tensor> params, const AdamOptions& options);

// One bias-corrected Adam update of every parameter from its gradient buffer.
// Throws ContractError if a parameter has no gradient.
void adam_step(AdamState& state, std::span<Tensor> params);

}  // namespace sdc
