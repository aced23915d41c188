#pragma once

#include <vector>

#include "pml/core/gray_image.hpp"
#include "pml/core/run_config.hpp"
#include "pml/core/steering.hpp"
#include "pml/core/vehicle_state.hpp"
#include "pml/simworld/render.hpp"
#include "pml/simworld/track.hpp"

namespace pml::wm {

// Action-conditioned predictor of the observation `horizon` steps ahead with
// the action held constant.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual GrayImage predict(const GrayImage& obs, SteeringAction action,
                            int horizon) = 0;

  // One prediction per action, all from the same observation.
  virtual std::vector<GrayImage> predict_all(
      const GrayImage& obs, const std::vector<SteeringAction>& actions,
      int horizon);
};

// Ground-truth transition: steps the simulator `horizon` times from the
// hidden state and renders.
GrayImage oracle_predict(const VehicleState& state, SteeringAction action,
                         int horizon, const sim::TrackSpec& track,
                         const sim::CameraModel& camera,
                         const RunConfig& config);

// ForwardModel backed by the simulator. It must be told the hidden state
// that produced the current observation (see sim::EpisodeHooks); the
// observation argument itself is ignored.
class OracleForwardModel : public ForwardModel {
 public:
  OracleForwardModel(sim::TrackSpec track, const RunConfig& config);

  void set_state(const VehicleState& state) { state_ = state; }

  GrayImage predict(const GrayImage& obs, SteeringAction action,
                    int horizon) override;

 private:
  sim::TrackSpec track_;
  RunConfig config_;
  sim::Renderer renderer_;
  VehicleState state_;
};

}  // namespace pml::wm
