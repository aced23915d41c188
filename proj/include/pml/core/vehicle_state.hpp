#pragma once

namespace pml {

// Ground-truth ego pose held by the simulator. Agents never read it.
struct VehicleState {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double heading = 0.0;  // rad, kept in (-pi, pi]
  double speed = 0.0;    // m/s, constant per episode

  bool operator==(const VehicleState&) const = default;
};

// Wraps an angle into (-pi, pi]. Odd-symmetric: wrap_angle(-a) == -wrap_angle(a)
// for every a not congruent to pi.
double wrap_angle(double angle);

}  // namespace pml
