#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pml/core/rng.hpp"
#include "pml/simworld/dynamics.hpp"
#include "pml/simworld/episode.hpp"
#include "pml/simworld/geometry.hpp"
#include "pml/simworld/render.hpp"
#include "pml/simworld/track.hpp"

using namespace pml;
using namespace pml::sim;

namespace {

TrackSpec track_for(TaskLabel task, int sign = 1, double width = 4.0) {
  TrackParams p;
  p.task = task;
  p.turn_sign = sign;
  p.lane_width = width;
  p.waypoint_spacing = 0.25;
  return make_track(p);
}

double brute_nearest(Vec2 p, const std::vector<Vec2>& line) {
  // Every segment, clamped orthogonal foot point.
  double best = 1e300;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 d = line[i + 1] - line[i];
    const double t = std::clamp(dot(p - line[i], d) / dot(d, d), 0.0, 1.0);
    best = std::min(best, norm(p - (line[i] + t * d)));
  }
  return best;
}

}  // namespace

TEST_CASE("constant steering traces the closed-form chord polygon") {
  const double dt = 0.1, v = 5.0, L = 2.5, max_angle = 0.5;
  for (double a : {0.3, -0.7, 1.0}) {
    const double dh = v / L * std::tan(a * max_angle) * dt;
    VehicleState s{0.0, 0.0, 0.0, v};
    for (int n = 1; n <= 40; ++n) {
      s = step_dynamics(s, SteeringAction(a), dt, L, max_angle);
      // Sum of n chords of length v*dt at headings dh, 2dh, ..., n dh.
      const double scale = v * dt * std::sin(n * dh / 2) / std::sin(dh / 2);
      CHECK(s.x == doctest::Approx(scale * std::cos((n + 1) * dh / 2)).epsilon(1e-12));
      CHECK(s.y == doctest::Approx(scale * std::sin((n + 1) * dh / 2)).epsilon(1e-12));
      CHECK(s.heading == doctest::Approx(wrap_angle(n * dh)));
    }
  }
}

TEST_CASE("positive steering turns right, zero steering goes straight") {
  VehicleState s{0.0, 0.0, 0.0, 5.0};
  const VehicleState r = step_dynamics(s, SteeringAction(0.5), 0.1, 2.5, 0.5);
  CHECK(r.heading > 0.0);
  CHECK(r.y > 0.0);
  const VehicleState z = step_dynamics(s, SteeringAction(0.0), 0.1, 2.5, 0.5);
  CHECK(z.x == doctest::Approx(0.5));
  CHECK(z.y == 0.0);
}

TEST_CASE("dynamics commute with mirroring") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const VehicleState s{rng.uniform(-10, 10), rng.uniform(-10, 10),
                         rng.uniform(-3, 3), 5.0};
    const SteeringAction a(rng.uniform(-1, 1));
    const VehicleState lhs = mirror_state(step_dynamics(s, a, 0.1, 2.5, 0.5));
    const VehicleState rhs =
        step_dynamics(mirror_state(s), SteeringAction(-a.value()), 0.1, 2.5, 0.5);
    CHECK(lhs.x == doctest::Approx(rhs.x).epsilon(1e-12));
    CHECK(lhs.y == doctest::Approx(rhs.y).epsilon(1e-12));
    CHECK(lhs.heading == doctest::Approx(rhs.heading).epsilon(1e-12));
  }
}

TEST_CASE("polyline projection agrees with dense brute force") {
  const TrackSpec t = track_for(TaskLabel::two_turns);
  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const Vec2 p{rng.uniform(-5, 120), rng.uniform(-5, 80)};
    const auto proj = project_onto_polyline(p, t.centerline);
    CHECK(proj.distance == doctest::Approx(brute_nearest(p, t.centerline)).epsilon(1e-12));
  }
  const std::vector<Vec2> line{{0, 0}, {10, 0}};
  const auto right = project_onto_polyline({4, 2}, line);
  CHECK(right.signed_offset == doctest::Approx(2.0));
  CHECK(right.arc == doctest::Approx(4.0));
  CHECK(project_onto_polyline({4, -2}, line).signed_offset == doctest::Approx(-2.0));
}

TEST_CASE("track geometry: lengths, waypoint spacing, goal") {
  const TrackSpec s = track_for(TaskLabel::straight);
  CHECK(s.goal().x == doctest::Approx(40.0));
  CHECK(s.goal().y == doctest::Approx(0.0));
  CHECK(s.waypoints.size() == 161);

  const TrackSpec one = track_for(TaskLabel::one_turn);
  // leg, quarter circle of radius 20 turning right, leg.
  CHECK(one.goal().x == doctest::Approx(60.0).epsilon(1e-9));
  CHECK(one.goal().y == doctest::Approx(60.0).epsilon(1e-9));
  const TrackSpec left = track_for(TaskLabel::one_turn, -1);
  CHECK(left.goal().y == doctest::Approx(-60.0).epsilon(1e-9));

  const TrackSpec two = track_for(TaskLabel::two_turns);
  CHECK(two.goal().x == doctest::Approx(120.0).epsilon(1e-9));
  CHECK(two.goal().y == doctest::Approx(80.0).epsilon(1e-9));
  for (std::size_t i = 0; i + 1 < two.waypoints.size(); ++i) {
    CHECK(norm(two.waypoints[i + 1] - two.waypoints[i]) <= 0.25 + 1e-9);
  }
  // Runout continues past the goal.
  CHECK(polyline_length(two.centerline) >
        project_onto_polyline(two.goal(), two.centerline).arc + 39.0);
}

TEST_CASE("track validation rejects bad parameters") {
  TrackParams p;
  p.lane_width = 0.0;
  CHECK_THROWS_AS(make_track(p), std::invalid_argument);
  p = TrackParams{};
  p.lane_count = 2;
  p.lane_index = 2;
  CHECK_THROWS_AS(make_track(p), std::invalid_argument);
  CHECK_THROWS_AS(parse_task_label("loop"), std::invalid_argument);
  CHECK(parse_task_label(to_string(TaskLabel::two_turns)) == TaskLabel::two_turns);
}

TEST_CASE("start pose applies lateral and heading offsets") {
  const TrackSpec t = track_for(TaskLabel::straight);
  const VehicleState s = start_pose(t, 5.0, 0.3, 0.05);
  CHECK(s.x == doctest::Approx(0.0));
  CHECK(s.y == doctest::Approx(0.3));
  CHECK(s.heading == doctest::Approx(0.05));
  CHECK(lateral_offset(t, {s.x, s.y}) == doctest::Approx(0.3));
}

TEST_CASE("renderer output is binary and centered view is symmetric") {
  const TrackSpec t = track_for(TaskLabel::straight);
  const Renderer r(CameraModel{});
  const GrayImage img = r.render(start_pose(t, 5.0), t);
  CHECK(img.width() == 64);
  int road = 0;
  for (double v : img.pixels()) {
    CHECK((v == 0.0 || v == 1.0));
    road += v == 1.0;
  }
  CHECK(road > 200);
  CHECK(road < 64 * 64);
  CHECK(mirror_image(img) == img);
  // The bottom row center looks at the road just ahead.
  CHECK(img.at(63, 32) == 1.0);
  CHECK(img.at(0, 0) == 0.0);
}

TEST_CASE("render is mirror equivariant pixel for pixel") {
  Rng rng(5);
  const Renderer r(CameraModel{});
  for (auto task : {TaskLabel::straight, TaskLabel::one_turn, TaskLabel::two_turns}) {
    const TrackSpec t = track_for(task, 1);
    const TrackSpec m = track_for(task, -1);
    for (int i = 0; i < 10; ++i) {
      const VehicleState s{rng.uniform(0, 50), rng.uniform(-1.5, 1.5),
                           rng.uniform(-0.3, 0.3), 5.0};
      CHECK(r.render(mirror_state(s), m) == mirror_image(r.render(s, t)));
    }
  }
}

TEST_CASE("leftward offset shifts the road right in the image") {
  const TrackSpec t = track_for(TaskLabel::straight);
  const Renderer r(CameraModel{});
  const GrayImage img = r.render(start_pose(t, 5.0, -1.0), t);
  double left = 0.0, right = 0.0;
  for (int row = 32; row < 64; ++row) {
    for (int c = 0; c < 32; ++c) left += img.at(row, c);
    for (int c = 32; c < 64; ++c) right += img.at(row, c);
  }
  CHECK(right > left);
}

TEST_CASE("far off the road everything is background") {
  const TrackSpec t = track_for(TaskLabel::straight);
  const GrayImage img =
      render_observation({20.0, 60.0, 0.0, 5.0}, t, CameraModel{});
  for (double v : img.pixels()) CHECK(v == 0.0);
}

TEST_CASE("camera validation") {
  CameraModel c;
  c.horizontal_fov = 3.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = CameraModel{};
  c.image_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("episode outcomes") {
  const TrackSpec t = track_for(TaskLabel::straight);
  RunConfig cfg;
  SUBCASE("straight driving succeeds") {
    const auto res = run_episode(t, [](const GrayImage&) { return 0.0; }, cfg, 200);
    CHECK(res.episode.status() == EpisodeStatus::success);
    // 38 m to come within 2 m of the goal at 0.5 m per step.
    CHECK(res.episode.elapsed_steps() == 76);
    for (const auto& rec : res.log) CHECK(rec.deviation == doctest::Approx(0.0));
  }
  SUBCASE("hard right leaves the lane") {
    const auto res = run_episode(t, [](const GrayImage&) { return 1.0; }, cfg, 200);
    CHECK(res.episode.status() == EpisodeStatus::off_lane);
    CHECK(res.log.back().deviation > 2.0);
  }
  SUBCASE("step budget exhausted") {
    const auto res = run_episode(t, [](const GrayImage&) { return 0.0; }, cfg, 10);
    CHECK(res.episode.status() == EpisodeStatus::timeout);
    CHECK(res.log.size() == 10);
  }
  SUBCASE("non-finite command is a policy fault") {
    const auto res =
        run_episode(t, [](const GrayImage&) { return std::nan(""); }, cfg, 10);
    CHECK(res.episode.status() == EpisodeStatus::policy_fault);
    CHECK(res.log.empty());
  }
  SUBCASE("thrown fault is recorded") {
    const auto res = run_episode(
        t, [](const GrayImage&) -> double { throw PolicyFault("model broke"); }, cfg, 10);
    CHECK(res.episode.status() == EpisodeStatus::policy_fault);
    CHECK(res.fault == "model broke");
  }
  SUBCASE("out-of-range commands are clamped") {
    const auto res = run_episode(t, [](const GrayImage&) { return 5.0; }, cfg, 3);
    for (const auto& rec : res.log) CHECK(rec.action == 1.0);
  }
}

TEST_CASE("terminal episode states are absorbing") {
  Episode ep(track_for(TaskLabel::straight), VehicleState{});
  ep.finish(EpisodeStatus::success);
  CHECK_THROWS_AS(ep.finish(EpisodeStatus::off_lane), std::logic_error);
  CHECK_THROWS_AS(ep.advance(VehicleState{}), std::logic_error);
  Episode e2(track_for(TaskLabel::straight), VehicleState{});
  CHECK_THROWS_AS(e2.finish(EpisodeStatus::running), std::invalid_argument);
}

TEST_CASE("trajectory log round trips exactly") {
  const TrackSpec t = track_for(TaskLabel::one_turn);
  RunConfig cfg;
  const auto res = run_episode(t, [](const GrayImage&) { return 0.13; }, cfg, 25);
  std::stringstream ss;
  write_trajectory_log(ss, res.log);
  CHECK(ss.str().rfind("step\tx\ty\theading\taction\tdeviation\n", 0) == 0);
  const auto back = read_trajectory_log(ss);
  REQUIRE(back.size() == res.log.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    // Speed is constant per run and not logged.
    CHECK(back[i].step == res.log[i].step);
    CHECK(back[i].state.x == res.log[i].state.x);
    CHECK(back[i].state.y == res.log[i].state.y);
    CHECK(back[i].state.heading == res.log[i].state.heading);
    CHECK(back[i].action == res.log[i].action);
    CHECK(back[i].deviation == res.log[i].deviation);
  }
  std::stringstream bad("nope\n");
  CHECK_THROWS(read_trajectory_log(bad));
}
