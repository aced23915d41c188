#pragma once

#include "pml/core/steering.hpp"
#include "pml/core/vehicle_state.hpp"

namespace pml::sim {

// Kinematic bicycle, no slip. The wheel angle is action * max_wheel_angle;
// heading integrates first, then the pose advances speed * dt along the new
// heading. Positive steering turns right (heading grows toward +y).
VehicleState step_dynamics(const VehicleState& state, SteeringAction action,
                           double dt, double wheelbase, double max_wheel_angle);

// Reflection across the x axis: the mirror of a state on a track laid along
// +x starting at the origin.
VehicleState mirror_state(const VehicleState& state);

}  // namespace pml::sim
