#include "pml/agent/expert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pml/core/steering.hpp"
#include "pml/simworld/geometry.hpp"

namespace pml::agent {

double scripted_expert(const VehicleState& state, const sim::TrackSpec& track,
                       const RunConfig& config, const ExpertParams& params) {
  if (!(params.lookahead > 0.0)) {
    throw std::invalid_argument("scripted_expert: lookahead must be > 0");
  }
  const sim::Vec2 pos{state.x, state.y};
  const auto proj = sim::project_onto_polyline(pos, track.centerline);
  if (proj.distance > params.max_offset) {
    throw std::runtime_error("scripted_expert: vehicle is off the map");
  }
  const double total = sim::polyline_length(track.centerline);
  const sim::Vec2 target =
      sim::point_at_arc(track.centerline, std::min(total, proj.arc + params.lookahead));
  const sim::Vec2 d = target - pos;
  const double ld = std::max(sim::norm(d), 1e-6);
  const double alpha = wrap_angle(std::atan2(d.y, d.x) - state.heading);
  const double curvature = 2.0 * std::sin(alpha) / ld;
  const double wheel = std::atan(config.wheelbase * curvature);
  return clamp_action(wheel / config.max_wheel_angle).value();
}

}  // namespace pml::agent
