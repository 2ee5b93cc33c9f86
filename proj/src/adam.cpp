#include "sdc/adam.hpp"

#include <cmath>

#include "sdc/errors.hpp"

namespace sdc {

AdamState make_adam_state(std::span<const Tensor> params, const AdamOptions& options) {
  AdamState state;
  state.options = options;
  for (const Tensor& p : params) {
    state.first_moment.emplace_back(p.numel(), 0.0);
    state.second_moment.emplace_back(p.numel(), 0.0);
  }
  return state;
}

void adam_step(AdamState& state, std::span<Tensor> params) {
  if (params.size() != state.first_moment.size())
    throw ContractError("adam_step: " + std::to_string(params.size()) + " parameters but state tracks " +
                        std::to_string(state.first_moment.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].has_grad()) throw ContractError("adam_step: parameter " + std::to_string(i) + " has no gradient");
    if (params[i].numel() != state.first_moment[i].size())
      throw ContractError("adam_step: parameter " + std::to_string(i) + " changed size");
  }
  const AdamOptions& o = state.options;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].mutable_data();
    const auto grad = params[i].grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double g = grad[j] + o.weight_decay * theta[j];
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g;
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace sdc
