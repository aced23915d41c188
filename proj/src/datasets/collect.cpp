#include "pml/datasets/collect.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "pml/agent/expert.hpp"
#include "pml/core/rng.hpp"
#include "pml/simworld/dynamics.hpp"
#include "pml/simworld/geometry.hpp"
#include "pml/simworld/render.hpp"

namespace pml::data {

void ZigzagParams::validate() const {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("ZigzagParams: amplitude < 0");
  if (period < 2) throw std::invalid_argument("ZigzagParams: period < 2");
  if (!(release_bound >= 0.0 && release_bound <= recenter_bound)) {
    throw std::invalid_argument("ZigzagParams: need 0 <= release_bound <= recenter_bound");
  }
  if (!(reset_lateral >= 0.0 && reset_heading >= 0.0)) {
    throw std::invalid_argument("ZigzagParams: reset ranges must be >= 0");
  }
}

double triangle_wave(double phase) {
  const double p = phase - std::floor(phase);
  return p < 0.5 ? 4.0 * p - 1.0 : 3.0 - 4.0 * p;
}

namespace {

using Sink = std::function<void(const GrayImage& obs, SteeringAction applied,
                                SteeringAction expert, const GrayImage& next)>;

struct Run {
  const sim::TrackSpec* track = nullptr;
  VehicleState state;
  double goal_arc = 0.0;
  double phase = 0.0;
  bool recentering = false;
};

Run reset_run(std::span<const sim::TrackSpec> tracks, const RunConfig& config,
              const ZigzagParams& params, Rng& rng) {
  Run run;
  run.track = &tracks[rng.below(tracks.size())];
  const sim::TrackSpec& t = *run.track;
  run.goal_arc = sim::project_onto_polyline(t.goal(), t.centerline).arc;
  // Start anywhere along the first 80% of the route.
  const double arc = rng.uniform(0.0, 0.8 * run.goal_arc);
  const sim::Vec2 base = sim::point_at_arc(t.centerline, arc);
  const auto proj = sim::project_onto_polyline(base, t.centerline);
  const double h = sim::segment_heading(t, proj.segment);
  const sim::Vec2 right{-std::sin(h), std::cos(h)};
  const sim::Vec2 p =
      base + rng.uniform(-params.reset_lateral, params.reset_lateral) * right;
  run.state = VehicleState{
      p.x, p.y,
      wrap_angle(h + rng.uniform(-params.reset_heading, params.reset_heading)),
      config.speed};
  run.phase = rng.uniform();
  return run;
}

double heading_error(const Run& run) {
  const auto proj = sim::project_onto_polyline({run.state.x, run.state.y},
                                               run.track->centerline);
  return wrap_angle(run.state.heading - sim::segment_heading(*run.track, proj.segment));
}

void drive(std::span<const sim::TrackSpec> tracks, const RunConfig& config,
           int n_steps, const ZigzagParams& params, std::uint64_t seed,
           CollectStats* stats, const Sink& sink) {
  if (tracks.empty()) throw std::invalid_argument("collect: no tracks");
  if (n_steps < 1) throw std::invalid_argument("collect: n_steps must be >= 1");
  params.validate();
  config.validate();
  for (const auto& t : tracks) t.validate();

  const sim::Renderer renderer(sim::camera_from_config(config), config.offroad_horizon);
  Rng rng(seed);
  CollectStats local;
  Run run = reset_run(tracks, config, params, rng);
  GrayImage obs = renderer.render(run.state, *run.track);

  for (int step = 0; step < n_steps; ++step) {
    const double expert = agent::scripted_expert(run.state, *run.track, config);
    const double dev = std::fabs(sim::lateral_offset(*run.track, {run.state.x, run.state.y}));
    if (!run.recentering && dev > params.recenter_bound) {
      run.recentering = true;
    } else if (run.recentering && dev < params.release_bound &&
               std::fabs(heading_error(run)) < params.release_heading) {
      run.recentering = false;
    }
    double applied = expert;
    if (run.recentering) {
      ++local.recenter_steps;
    } else {
      applied = expert + params.amplitude * triangle_wave(run.phase);
      run.phase += 1.0 / params.period;
    }
    const SteeringAction action = clamp_action(applied);
    const VehicleState next = sim::step_dynamics(run.state, action, config.sim_dt,
                                                 config.wheelbase, config.max_wheel_angle);
    GrayImage next_obs = renderer.render(next, *run.track);
    sink(obs, action, clamp_action(expert), next_obs);
    ++local.samples;

    run.state = next;
    obs = std::move(next_obs);
    const sim::Vec2 pos{next.x, next.y};
    const bool off = std::fabs(sim::lateral_offset(*run.track, pos)) >
                     run.track->lane_width / 2.0;
    const bool done =
        sim::project_onto_polyline(pos, run.track->centerline).arc >= run.goal_arc;
    if (off || done) {
      ++local.resets;
      run = reset_run(tracks, config, params, rng);
      obs = renderer.render(run.state, *run.track);
    }
  }
  if (stats != nullptr) *stats = local;
}

}  // namespace

std::vector<TransitionSample> collect_zigzag(std::span<const sim::TrackSpec> tracks,
                                             const RunConfig& config, int n_steps,
                                             const ZigzagParams& params,
                                             std::uint64_t seed, CollectStats* stats) {
  std::vector<TransitionSample> out;
  out.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
  drive(tracks, config, n_steps, params, seed, stats,
        [&](const GrayImage& obs, SteeringAction applied, SteeringAction,
            const GrayImage& next) { out.push_back({obs, applied, next}); });
  return out;
}

std::vector<LabeledFrame> collect_expert(std::span<const sim::TrackSpec> tracks,
                                         const RunConfig& config, int n_steps,
                                         const ZigzagParams& perturbation,
                                         std::uint64_t seed, CollectStats* stats) {
  std::vector<LabeledFrame> out;
  out.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
  drive(tracks, config, n_steps, perturbation, seed, stats,
        [&](const GrayImage& obs, SteeringAction, SteeringAction expert,
            const GrayImage&) { out.push_back({obs, expert}); });
  return out;
}

std::vector<sim::TrackSpec> collection_tracks(const RunConfig& config) {
  std::vector<sim::TrackSpec> out;
  for (double width : {4.0, 3.5}) {
    for (auto task : {sim::TaskLabel::straight, sim::TaskLabel::one_turn,
                      sim::TaskLabel::two_turns}) {
      for (int sign : {1, -1}) {
        if (task == sim::TaskLabel::straight && sign < 0) continue;
        sim::TrackParams p;
        p.task = task;
        p.lane_width = width;
        p.turn_sign = sign;
        p.waypoint_spacing = config.waypoint_spacing;
        out.push_back(sim::make_track(p));
      }
    }
  }
  return out;
}

}  // namespace pml::data
