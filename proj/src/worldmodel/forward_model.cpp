#include "pml/worldmodel/forward_model.hpp"

#include <stdexcept>

#include "pml/simworld/dynamics.hpp"

namespace pml::wm {

std::vector<GrayImage> ForwardModel::predict_all(
    const GrayImage& obs, const std::vector<SteeringAction>& actions,
    int horizon) {
  std::vector<GrayImage> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(predict(obs, a, horizon));
  return out;
}

namespace {

VehicleState roll_state(VehicleState s, SteeringAction action, int horizon,
                        const RunConfig& config) {
  if (horizon < 1) throw std::invalid_argument("oracle: horizon must be >= 1");
  for (int i = 0; i < horizon; ++i) {
    s = sim::step_dynamics(s, action, config.sim_dt, config.wheelbase,
                           config.max_wheel_angle);
  }
  return s;
}

}  // namespace

GrayImage oracle_predict(const VehicleState& state, SteeringAction action,
                         int horizon, const sim::TrackSpec& track,
                         const sim::CameraModel& camera,
                         const RunConfig& config) {
  return sim::render_observation(roll_state(state, action, horizon, config),
                                 track, camera, config.offroad_horizon);
}

OracleForwardModel::OracleForwardModel(sim::TrackSpec track,
                                       const RunConfig& config)
    : track_(std::move(track)),
      config_(config),
      renderer_(sim::camera_from_config(config), config.offroad_horizon) {}

GrayImage OracleForwardModel::predict(const GrayImage&, SteeringAction action,
                                      int horizon) {
  return renderer_.render(roll_state(state_, action, horizon, config_), track_);
}

}  // namespace pml::wm
