#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "pml/core/vehicle_state.hpp"
#include "pml/simworld/geometry.hpp"

namespace pml::sim {

enum class TaskLabel { straight, one_turn, two_turns };

std::string to_string(TaskLabel task);
TaskLabel parse_task_label(const std::string& text);

// Road geometry for one evaluation task.
//
// The centerline is the center of the target lane and extends `runout`
// meters past the goal so the camera keeps seeing road near the finish.
// The road surface spans `road_left` meters left and `road_right` meters
// right of the centerline; multi-lane roads are a wider strip around the
// chosen lane.
struct TrackSpec {
  std::vector<Vec2> centerline;
  double lane_width = 0.0;
  std::vector<Vec2> waypoints;
  TaskLabel task = TaskLabel::straight;
  std::size_t goal_index = 0;
  double road_left = 0.0;
  double road_right = 0.0;

  const Vec2& goal() const { return waypoints.at(goal_index); }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct TrackParams {
  TaskLabel task = TaskLabel::straight;
  double lane_width = 4.0;
  double turn_radius = 20.0;
  double leg_length = 40.0;
  double turn_angle = std::numbers::pi / 2.0;
  int turn_sign = 1;            // +1 first turn to the right, -1 to the left
  double waypoint_spacing = 1.0;
  double runout = 40.0;
  double arc_step = 5.0 * std::numbers::pi / 180.0;
  int lane_count = 1;
  int lane_index = 0;           // 0 is the leftmost lane
};

// straight: one leg. one_turn: leg, arc, leg. two_turns: leg, arc, leg,
// opposite arc, leg. Starts at the origin heading along +x.
TrackSpec make_track(const TrackParams& params);

TrackSpec make_track(TaskLabel task, double lane_width, double turn_radius,
                     double leg_length);

// Direction of centerline segment `i`, as a heading angle.
double segment_heading(const TrackSpec& track, std::size_t i);

// Distance from the lane center; positive to the right.
double lateral_offset(const TrackSpec& track, Vec2 p);

// Canonical start pose at waypoint 0 aligned with the lane, displaced
// `lateral` meters to the right and rotated by `heading_offset`.
VehicleState start_pose(const TrackSpec& track, double speed,
                        double lateral = 0.0, double heading_offset = 0.0);

}  // namespace pml::sim
