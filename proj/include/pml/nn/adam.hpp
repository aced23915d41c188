#pragma once

#include <vector>

#include "pml/nn/layers.hpp"

namespace pml::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

// Adaptive-moment gradient descent with bias correction.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  void zero_grad();
  void step();
  long steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Tensor> m_, v_;
  long steps_ = 0;
};

// True when every gradient entry is finite.
bool gradients_finite(const std::vector<Parameter*>& params);

}  // namespace pml::nn
