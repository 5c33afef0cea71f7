#include "penalearn/adam.hpp"

#include <cmath>

#include "penalearn/errors.hpp"

namespace penalearn {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("ADAM learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("ADAM beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("ADAM beta2 must be in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("ADAM epsilon must be > 0");
}

AdamState AdamState::for_network(const Mlp& net, AdamConfig config) {
  config.validate();
  return AdamState{MlpParams::zeros_like(net.params()), MlpParams::zeros_like(net.params()), 0, config};
}

namespace {

template <typename Param>
void update_tensor(Param& theta, Param& m, Param& v, const Param& g, const AdamConfig& c,
                   double correction1, double correction2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * g.array().square();
  theta.array() -= c.learning_rate * (m.array() / correction1) /
                   ((v.array() / correction2).sqrt() + c.epsilon);
}

}  // namespace

void adam_step(Mlp& net, AdamState& state, const MlpParams& grads) {
  auto& theta = net.mutable_params();
  if (!grads.same_shape(theta)) throw DimensionError("gradient shapes do not match network");
  if (!state.first_moment.same_shape(theta) || !state.second_moment.same_shape(theta)) {
    throw DimensionError("ADAM state shapes do not match network");
  }
  const auto& c = state.config;
  state.step_count += 1;
  const double step = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, step);
  const double correction2 = 1.0 - std::pow(c.beta2, step);
  for (std::size_t t = 0; t < theta.weights.size(); ++t) {
    update_tensor(theta.weights[t], state.first_moment.weights[t], state.second_moment.weights[t],
                  grads.weights[t], c, correction1, correction2);
    update_tensor(theta.biases[t], state.first_moment.biases[t], state.second_moment.biases[t],
                  grads.biases[t], c, correction1, correction2);
  }
}

}  // namespace penalearn
