#pragma once

#include <vector>

#include "pml/core/gray_image.hpp"
#include "pml/core/run_config.hpp"
#include "pml/core/vehicle_state.hpp"
#include "pml/simworld/track.hpp"

namespace pml::sim {

// Pinhole camera rigidly mounted at the vehicle reference point.
struct CameraModel {
  double height = 1.6;           // m above ground
  double pitch = 0.50;           // rad, positive tilts the axis down
  double horizontal_fov = 1.40;  // rad; vertical fov is equal (square frames)
  int image_size = 64;
  double range = 30.0;           // m, farther ground renders as background

  void validate() const;
};

CameraModel camera_from_config(const RunConfig& cfg);

// Road-only segmentation renderer: a pixel is 1 when its ground ray hits the
// road strip, 0 otherwise. The per-pixel ground intersections depend only on
// the camera and are computed once.
class Renderer {
 public:
  explicit Renderer(const CameraModel& camera, double offroad_horizon = 25.0);

  GrayImage render(const VehicleState& state, const TrackSpec& track) const;

  const CameraModel& camera() const { return camera_; }

 private:
  struct GroundHit {
    bool valid = false;
    double forward = 0.0;  // m ahead of the camera
    double right = 0.0;    // m to the right
  };

  CameraModel camera_;
  double offroad_horizon_;
  double max_ground_distance_ = 0.0;
  std::vector<GroundHit> hits_;
};

// One-shot convenience wrapper around Renderer.
GrayImage render_observation(const VehicleState& state, const TrackSpec& track,
                             const CameraModel& camera,
                             double offroad_horizon = 25.0);

}  // namespace pml::sim
