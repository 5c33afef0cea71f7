#pragma once

#include <cstdint>

#include "penalearn/mlp.hpp"

namespace penalearn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  std::uint64_t step_count = 0;
  AdamConfig config;

  static AdamState for_network(const Mlp& net, AdamConfig config = {});
};

// One bias-corrected ADAM update of `net` in place:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(Mlp& net, AdamState& state, const MlpParams& grads);

}  // namespace penalearn
