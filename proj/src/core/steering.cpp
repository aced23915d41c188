#include "pml/core/steering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pml {

SteeringAction::SteeringAction(double value) : value_(value) {
  if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
    throw std::invalid_argument("SteeringAction: value outside [-1, 1]");
  }
}

SteeringAction clamp_action(double value) {
  if (!std::isfinite(value)) {
    throw std::domain_error("clamp_action: non-finite steering command");
  }
  return SteeringAction(std::clamp(value, -1.0, 1.0));
}

std::vector<SteeringAction> make_steering_grid(int count) {
  if (count < 3 || count % 2 == 0) {
    throw std::invalid_argument(
        "make_steering_grid: count must be odd and at least 3");
  }
  const int half = count / 2;
  std::vector<SteeringAction> grid;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) {
    grid.emplace_back(static_cast<double>(i - half) / half);
  }
  return grid;
}

bool is_valid_steering_grid(const std::vector<SteeringAction>& grid) {
  if (grid.empty()) return false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i - 1].value() < grid[i].value())) return false;
    // Exact symmetry: the mirrored entry is the bitwise negation.
    if (grid[i].value() != -grid[grid.size() - 1 - i].value()) return false;
  }
  return true;
}

}  // namespace pml
