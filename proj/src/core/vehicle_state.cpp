#include "pml/core/vehicle_state.hpp"

#include <cmath>
#include <numbers>

namespace pml {

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  if (angle > -kPi && angle <= kPi) return angle;
  const double sign = angle < 0.0 ? -1.0 : 1.0;
  double wrapped = std::fmod(std::fabs(angle) + kPi, 2.0 * kPi) - kPi;
  wrapped *= sign;
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

}  // namespace pml
