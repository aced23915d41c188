#pragma once

#include <string>

#include "pml/nn/tensor.hpp"

namespace pml::nn {

enum class LossKind { mse, bce };

LossKind parse_loss_kind(const std::string& text);
std::string to_string(LossKind kind);

struct LossResult {
  double value = 0.0;
  Tensor grad;  // d(loss)/d(prediction)
};

// Mean over every element. BCE expects probabilities and clips them to
// [1e-7, 1 - 1e-7]; clipped entries get zero gradient.
LossResult compute_loss(LossKind kind, const Tensor& prediction,
                        const Tensor& target);

}  // namespace pml::nn
