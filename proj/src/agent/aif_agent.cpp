#include "pml/agent/aif_agent.hpp"

#include <cmath>
#include <stdexcept>

#include "pml/simworld/episode.hpp"
#include "pml/simworld/render.hpp"

namespace pml::agent {

std::size_t pick_action(const std::vector<SteeringAction>& actions,
                        const std::vector<double>& dissimilarities) {
  if (actions.empty() || actions.size() != dissimilarities.size()) {
    throw std::invalid_argument("pick_action: need one score per action");
  }
  double best = dissimilarities[0];
  for (double d : dissimilarities) best = std::min(best, d);

  std::size_t pick = actions.size();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (dissimilarities[i] > best + kTieTolerance) continue;
    if (pick == actions.size()) {
      pick = i;
      continue;
    }
    const double a = std::fabs(actions[i].value());
    const double b = std::fabs(actions[pick].value());
    if (a < b || (a == b && actions[i].value() < actions[pick].value())) {
      pick = i;
    }
  }
  return pick;
}

Selection select_action(const GrayImage& obs, wm::ForwardModel& model,
                        const Preference& pref,
                        const std::vector<SteeringAction>& grid, int horizon,
                        const vision::SsimParams& ssim_params) {
  if (grid.empty()) throw std::invalid_argument("select_action: empty grid");
  if (pref.image.width() != obs.width() || pref.image.height() != obs.height()) {
    throw std::invalid_argument(
        "select_action: preference size does not match the observation");
  }
  std::vector<GrayImage> predictions;
  try {
    predictions = model.predict_all(obs, grid, horizon);
  } catch (const std::exception& e) {
    throw sim::PolicyFault(std::string("forward model failed: ") + e.what());
  }
  if (predictions.size() != grid.size()) {
    throw sim::PolicyFault("forward model returned the wrong number of predictions");
  }

  Selection sel;
  std::vector<double> dissimilarities;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = vision::distance(predictions[i], pref.image, ssim_params);
    if (!std::isfinite(d)) throw sim::PolicyFault("non-finite dissimilarity");
    dissimilarities.push_back(d);
    sel.scores.push_back(ActionScore{grid[i], std::move(predictions[i]), d});
  }
  sel.action = grid[pick_action(grid, dissimilarities)];
  return sel;
}

AifAgent::AifAgent(wm::ForwardModel& model, Preference pref,
                   std::vector<SteeringAction> grid, int horizon,
                   vision::SsimParams ssim_params)
    : model_(&model),
      pref_(std::move(pref)),
      grid_(std::move(grid)),
      horizon_(horizon),
      ssim_params_(ssim_params) {}

double AifAgent::operator()(const GrayImage& obs) {
  last_ = select_action(obs, *model_, pref_, grid_, horizon_, ssim_params_);
  return last_.action.value();
}

const std::vector<RoadFamily>& road_families() {
  static const std::vector<RoadFamily> families = {
      {"town01", 4.0, 1},
      {"town04", 3.5, 1},
      {"town06", 3.5, 3},
  };
  return families;
}

const RoadFamily& road_family(const std::string& name) {
  for (const auto& f : road_families()) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown road family: " + name);
}

Preference make_preference(const RoadFamily& family, int lane_index,
                           const RunConfig& config) {
  if (lane_index < 0 || lane_index >= family.lane_count) {
    throw std::invalid_argument("make_preference: lane index " +
                                std::to_string(lane_index) + " not in family " +
                                family.name);
  }
  sim::TrackParams p;
  p.task = sim::TaskLabel::straight;
  p.lane_width = family.lane_width;
  p.lane_count = family.lane_count;
  p.lane_index = lane_index;
  p.leg_length = 100.0;
  p.waypoint_spacing = config.waypoint_spacing;
  const sim::TrackSpec track = sim::make_track(p);
  const GrayImage image = sim::render_observation(
      sim::start_pose(track, config.speed), track,
      sim::camera_from_config(config), config.offroad_horizon);
  return Preference{image, family.name + "/lane" + std::to_string(lane_index)};
}

}  // namespace pml::agent
