#include "pml/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pml::nn {

LossKind parse_loss_kind(const std::string& text) {
  if (text == "mse") return LossKind::mse;
  if (text == "bce") return LossKind::bce;
  throw std::invalid_argument("unknown loss: " + text);
}

std::string to_string(LossKind kind) {
  return kind == LossKind::mse ? "mse" : "bce";
}

LossResult compute_loss(LossKind kind, const Tensor& prediction,
                        const Tensor& target) {
  if (prediction.shape() != target.shape()) {
    throw std::invalid_argument("compute_loss: shape mismatch " +
                                shape_string(prediction.shape()) + " vs " +
                                shape_string(target.shape()));
  }
  const double count = static_cast<double>(prediction.size());
  LossResult r{0.0, Tensor(prediction.shape())};
  if (kind == LossKind::mse) {
    for (std::size_t i = 0; i < prediction.size(); ++i) {
      const double d = prediction[i] - target[i];
      r.value += d * d;
      r.grad[i] = 2.0 * d / count;
    }
  } else {
    constexpr double kEps = 1e-7;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
      const double raw = prediction[i];
      const double y = std::clamp(raw, kEps, 1.0 - kEps);
      const double t = target[i];
      r.value -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
      if (raw == y) r.grad[i] = (y - t) / (y * (1.0 - y)) / count;
    }
  }
  r.value /= count;
  return r;
}

}  // namespace pml::nn
