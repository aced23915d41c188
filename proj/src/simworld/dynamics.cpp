#include "pml/simworld/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace pml::sim {

VehicleState step_dynamics(const VehicleState& state, SteeringAction action,
                           double dt, double wheelbase,
                           double max_wheel_angle) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_dynamics: dt must be > 0");
  const double wheel_angle = action.value() * max_wheel_angle;
  VehicleState next = state;
  next.heading = wrap_angle(state.heading + (state.speed / wheelbase) *
                                                std::tan(wheel_angle) * dt);
  const double travel = state.speed * dt;
  next.x = state.x + travel * std::cos(next.heading);
  next.y = state.y + travel * std::sin(next.heading);
  return next;
}

VehicleState mirror_state(const VehicleState& state) {
  return VehicleState{state.x, -state.y, wrap_angle(-state.heading),
                      state.speed};
}

}  // namespace pml::sim
