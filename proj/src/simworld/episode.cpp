#include "pml/simworld/episode.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "pml/simworld/dynamics.hpp"
#include "pml/simworld/render.hpp"

namespace pml::sim {

std::string to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::running: return "running";
    case EpisodeStatus::success: return "success";
    case EpisodeStatus::off_lane: return "off_lane";
    case EpisodeStatus::timeout: return "timeout";
    case EpisodeStatus::policy_fault: return "policy_fault";
  }
  return "unknown";
}

void Episode::advance(const VehicleState& next) {
  if (!running()) throw std::logic_error("Episode::advance on finished episode");
  state_ = next;
  ++elapsed_steps_;
}

void Episode::finish(EpisodeStatus terminal) {
  if (!running()) throw std::logic_error("Episode already finished");
  if (terminal == EpisodeStatus::running) {
    throw std::invalid_argument("Episode::finish needs a terminal status");
  }
  status_ = terminal;
}

EpisodeResult run_episode(const TrackSpec& track, const Policy& policy,
                          const RunConfig& config, int max_steps,
                          std::optional<VehicleState> start,
                          const EpisodeHooks& hooks) {
  if (max_steps < 1) throw std::invalid_argument("run_episode: max_steps < 1");
  const Renderer renderer(camera_from_config(config), config.offroad_horizon);
  EpisodeResult result{
      Episode(track, start.value_or(start_pose(track, config.speed))), {}, {}};
  Episode& ep = result.episode;
  const Vec2 goal = track.goal();

  while (ep.running()) {
    const GrayImage obs = renderer.render(ep.state(), track);
    if (hooks.before_policy) hooks.before_policy(ep.state());
    double command = 0.0;
    try {
      command = policy(obs);
    } catch (const PolicyFault& e) {
      result.fault = e.what();
      ep.finish(EpisodeStatus::policy_fault);
      break;
    }
    if (!std::isfinite(command)) {
      result.fault = "policy returned a non-finite steering command";
      ep.finish(EpisodeStatus::policy_fault);
      break;
    }
    const SteeringAction action = clamp_action(command);
    ep.advance(step_dynamics(ep.state(), action, config.sim_dt,
                             config.wheelbase, config.max_wheel_angle));

    const Vec2 pos{ep.state().x, ep.state().y};
    const double deviation =
        project_onto_polyline(pos, track.centerline).distance;
    result.log.push_back(
        StepRecord{ep.elapsed_steps(), ep.state(), action.value(), deviation});

    if (deviation > track.lane_width / 2.0) {
      ep.finish(EpisodeStatus::off_lane);
    } else if (norm(pos - goal) <= config.capture_radius) {
      ep.finish(EpisodeStatus::success);
    } else if (ep.elapsed_steps() >= max_steps) {
      ep.finish(EpisodeStatus::timeout);
    }
  }
  return result;
}

void write_trajectory_log(std::ostream& out,
                          const std::vector<StepRecord>& log) {
  out << "step\tx\ty\theading\taction\tdeviation\n";
  for (const auto& r : log) {
    out << fmt::format("{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\n",
                       r.step, r.state.x, r.state.y, r.state.heading, r.action,
                       r.deviation);
  }
}

std::vector<StepRecord> read_trajectory_log(std::istream& in) {
  std::vector<StepRecord> log;
  std::string line;
  if (!std::getline(in, line) ||
      line != "step\tx\ty\theading\taction\tdeviation") {
    throw std::runtime_error("trajectory log: missing or unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    StepRecord r;
    if (!(fields >> r.step >> r.state.x >> r.state.y >> r.state.heading >>
          r.action >> r.deviation)) {
      throw std::runtime_error("malformed trajectory log line: " + line);
    }
    log.push_back(r);
  }
  return log;
}

}  // namespace pml::sim
