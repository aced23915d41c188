#include "pml/simworld/track.hpp"

#include <cmath>
#include <stdexcept>

namespace pml::sim {

std::string to_string(TaskLabel task) {
  switch (task) {
    case TaskLabel::straight: return "straight";
    case TaskLabel::one_turn: return "one_turn";
    case TaskLabel::two_turns: return "two_turns";
  }
  return "unknown";
}

TaskLabel parse_task_label(const std::string& text) {
  if (text == "straight") return TaskLabel::straight;
  if (text == "one_turn") return TaskLabel::one_turn;
  if (text == "two_turns") return TaskLabel::two_turns;
  throw std::invalid_argument("unknown task label: " + text);
}

void TrackSpec::validate() const {
  if (centerline.size() < 2) {
    throw std::invalid_argument("TrackSpec: centerline needs >= 2 points");
  }
  for (std::size_t i = 0; i + 1 < centerline.size(); ++i) {
    if (centerline[i] == centerline[i + 1]) {
      throw std::invalid_argument("TrackSpec: repeated centerline point");
    }
  }
  if (!(lane_width > 0.0)) {
    throw std::invalid_argument("TrackSpec: lane_width must be positive");
  }
  if (waypoints.empty() || goal_index >= waypoints.size()) {
    throw std::invalid_argument("TrackSpec: goal_index out of range");
  }
  for (const auto& w : waypoints) {
    if (project_onto_polyline(w, centerline).distance > lane_width / 2.0) {
      throw std::invalid_argument("TrackSpec: waypoint outside the lane");
    }
  }
}

namespace {

class PathBuilder {
 public:
  explicit PathBuilder(double arc_step) : arc_step_(arc_step) {
    points_.push_back(pos_);
  }

  void leg(double length) {
    pos_ = pos_ + length * Vec2{std::cos(heading_), std::sin(heading_)};
    points_.push_back(pos_);
  }

  // sign +1 turns right (heading increases), -1 turns left.
  void arc(double radius, double angle, int sign) {
    const Vec2 right{-std::sin(heading_), std::cos(heading_)};
    const Vec2 center = pos_ + (sign * radius) * right;
    const int n = static_cast<int>(std::ceil(angle / arc_step_ - 1e-9));
    const double h0 = heading_;
    for (int k = 1; k <= n; ++k) {
      const double h = h0 + sign * angle * k / n;
      const Vec2 r{-std::sin(h), std::cos(h)};
      points_.push_back(center - (sign * radius) * r);
    }
    heading_ = h0 + sign * angle;
    pos_ = points_.back();
  }

  const std::vector<Vec2>& points() const { return points_; }

 private:
  double arc_step_;
  double heading_ = 0.0;
  Vec2 pos_{};
  std::vector<Vec2> points_;
};

}  // namespace

TrackSpec make_track(const TrackParams& p) {
  if (!(p.lane_width > 0.0) || !(p.turn_radius > 0.0) ||
      !(p.leg_length > 0.0) || !(p.turn_angle > 0.0) ||
      !(p.waypoint_spacing > 0.0) || !(p.arc_step > 0.0) || p.runout < 0.0) {
    throw std::invalid_argument("make_track: geometry must be positive");
  }
  if (p.turn_sign != 1 && p.turn_sign != -1) {
    throw std::invalid_argument("make_track: turn_sign must be +1 or -1");
  }
  if (p.lane_count < 1 || p.lane_index < 0 || p.lane_index >= p.lane_count) {
    throw std::invalid_argument("make_track: invalid lane index");
  }

  PathBuilder path(p.arc_step);
  path.leg(p.leg_length);
  if (p.task != TaskLabel::straight) {
    path.arc(p.turn_radius, p.turn_angle, p.turn_sign);
    path.leg(p.leg_length);
  }
  if (p.task == TaskLabel::two_turns) {
    path.arc(p.turn_radius, p.turn_angle, -p.turn_sign);
    path.leg(p.leg_length);
  }
  const std::vector<Vec2> route = path.points();
  if (p.runout > 0.0) path.leg(p.runout);

  TrackSpec track;
  track.centerline = path.points();
  track.lane_width = p.lane_width;
  track.task = p.task;
  track.road_left = (p.lane_index + 0.5) * p.lane_width;
  track.road_right = (p.lane_count - p.lane_index - 0.5) * p.lane_width;

  const double length = polyline_length(route);
  const auto n = static_cast<std::size_t>(
      std::floor(length / p.waypoint_spacing + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) {
    track.waypoints.push_back(
        point_at_arc(route, static_cast<double>(k) * p.waypoint_spacing));
  }
  if (norm(track.waypoints.back() - route.back()) > 1e-9) {
    track.waypoints.push_back(route.back());
  }
  track.goal_index = track.waypoints.size() - 1;
  track.validate();
  return track;
}

TrackSpec make_track(TaskLabel task, double lane_width, double turn_radius,
                     double leg_length) {
  TrackParams p;
  p.task = task;
  p.lane_width = lane_width;
  p.turn_radius = turn_radius;
  p.leg_length = leg_length;
  return make_track(p);
}

double segment_heading(const TrackSpec& track, std::size_t i) {
  const Vec2 d = track.centerline.at(i + 1) - track.centerline.at(i);
  return std::atan2(d.y, d.x);
}

double lateral_offset(const TrackSpec& track, Vec2 p) {
  return project_onto_polyline(p, track.centerline).signed_offset;
}

VehicleState start_pose(const TrackSpec& track, double speed, double lateral,
                        double heading_offset) {
  const double h = segment_heading(track, 0);
  const Vec2 right{-std::sin(h), std::cos(h)};
  const Vec2 p = track.waypoints.front() + lateral * right;
  return VehicleState{p.x, p.y, wrap_angle(h + heading_offset), speed};
}

}  // namespace pml::sim
