#pragma once

#include <vector>

namespace pml {

// Normalized steering command: -1 is full left, +1 full right.
class SteeringAction {
 public:
  constexpr SteeringAction() = default;

  // Throws std::invalid_argument unless value is finite and in [-1, 1].
  explicit SteeringAction(double value);

  constexpr double value() const { return value_; }

  auto operator<=>(const SteeringAction&) const = default;

 private:
  double value_ = 0.0;
};

// Clamps a finite real into [-1, 1]. Non-finite input is an invalid control
// and throws std::domain_error.
SteeringAction clamp_action(double value);

// Evenly spaced grid from -1 to 1. `count` must be odd and >= 3 so the grid
// contains 0 and is exactly symmetric: value_i = (i - half) / half.
std::vector<SteeringAction> make_steering_grid(int count);

// Strictly increasing, symmetric about zero, bounded by [-1, 1].
bool is_valid_steering_grid(const std::vector<SteeringAction>& grid);

}  // namespace pml
