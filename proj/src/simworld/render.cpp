#include "pml/simworld/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pml::sim {

void CameraModel::validate() const {
  if (!(height > 0.0)) throw std::invalid_argument("camera height must be > 0");
  if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi)) {
    throw std::invalid_argument("camera fov must be in (0, pi)");
  }
  if (image_size < 2) throw std::invalid_argument("camera image_size < 2");
  if (!(range > 0.0)) throw std::invalid_argument("camera range must be > 0");
}

CameraModel camera_from_config(const RunConfig& cfg) {
  return CameraModel{cfg.camera_height, cfg.camera_pitch, cfg.camera_fov,
                     cfg.image_size, cfg.camera_range};
}

Renderer::Renderer(const CameraModel& camera, double offroad_horizon)
    : camera_(camera), offroad_horizon_(offroad_horizon) {
  camera_.validate();
  const int n = camera_.image_size;
  const double half = n / 2.0;
  const double tan_half = std::tan(camera_.horizontal_fov / 2.0);
  const double sp = std::sin(camera_.pitch);
  const double cp = std::cos(camera_.pitch);
  hits_.resize(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    // Image-plane coordinates; u to the right, v downward. The column term
    // is exactly antisymmetric under c -> n-1-c.
    const double v = (r + 0.5 - half) / half * tan_half;
    const double down = sp + v * cp;
    const double ahead = cp - v * sp;
    for (int c = 0; c < n; ++c) {
      GroundHit& hit = hits_[static_cast<std::size_t>(r) * n + c];
      if (down <= 0.0) continue;
      const double u = (c + 0.5 - half) / half * tan_half;
      const double t = camera_.height / down;
      hit.forward = t * ahead;
      hit.right = t * u;
      hit.valid = hit.forward > 0.0 && hit.forward <= camera_.range;
      if (hit.valid) {
        max_ground_distance_ =
            std::max(max_ground_distance_, std::hypot(hit.forward, hit.right));
      }
    }
  }
}

GrayImage Renderer::render(const VehicleState& state,
                           const TrackSpec& track) const {
  const int n = camera_.image_size;
  std::vector<double> pixels(static_cast<std::size_t>(n) * n, 0.0);
  const Vec2 origin{state.x, state.y};
  const auto& line = track.centerline;

  if (project_onto_polyline(origin, line).distance > offroad_horizon_) {
    return GrayImage(n, n, std::move(pixels));
  }

  // Only segments that can contain a visible road point matter.
  struct Segment {
    Vec2 a;
    Vec2 d;
    double inv_len2;
  };
  const double reach = max_ground_distance_ +
                       std::max(track.road_left, track.road_right);
  std::vector<Segment> nearby;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 seg[2] = {line[i], line[i + 1]};
    if (project_onto_polyline(origin, seg).distance <= reach) {
      const Vec2 d = line[i + 1] - line[i];
      nearby.push_back({line[i], d, 1.0 / dot(d, d)});
    }
  }
  if (nearby.empty()) return GrayImage(n, n, std::move(pixels));

  const double ch = std::cos(state.heading);
  const double sh = std::sin(state.heading);
  for (std::size_t k = 0; k < hits_.size(); ++k) {
    const GroundHit& hit = hits_[k];
    if (!hit.valid) continue;
    const Vec2 p{state.x + hit.forward * ch - hit.right * sh,
                 state.y + hit.forward * sh + hit.right * ch};
    // Same arithmetic as project_onto_polyline, unrolled for speed.
    double best2 = std::numeric_limits<double>::infinity();
    double side = 0.0;
    for (const Segment& s : nearby) {
      const Vec2 ap = p - s.a;
      const double t = std::clamp(dot(ap, s.d) * s.inv_len2, 0.0, 1.0);
      const Vec2 delta = p - (s.a + t * s.d);
      const double dist2 = dot(delta, delta);
      if (dist2 < best2) {
        best2 = dist2;
        side = -s.d.y * ap.x + s.d.x * ap.y;
      }
    }
    const double dist = std::sqrt(best2);
    const double offset = side < 0.0 ? -dist : dist;
    if (offset >= -track.road_left && offset <= track.road_right) {
      pixels[k] = 1.0;
    }
  }
  return GrayImage(n, n, std::move(pixels));
}

GrayImage render_observation(const VehicleState& state, const TrackSpec& track,
                             const CameraModel& camera,
                             double offroad_horizon) {
  return Renderer(camera, offroad_horizon).render(state, track);
}

}  // namespace pml::sim
