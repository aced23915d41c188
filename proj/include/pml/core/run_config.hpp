#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pml/core/steering.hpp"

namespace pml {

// Every knob of a run. Serialized one-to-one as a JSON object whose keys are
// the member names below; the CLI exposes each key as a flag of the same name.
struct RunConfig {
  int image_size = 64;
  std::vector<SteeringAction> steering_grid = make_steering_grid(21);
  int prediction_horizon = 4;

  double sim_dt = 0.1;            // s
  double speed = 5.0;             // m/s
  double wheelbase = 2.5;         // m
  double max_wheel_angle = 0.5;   // rad

  double camera_height = 1.6;     // m
  double camera_pitch = 0.50;     // rad, positive looks down
  double camera_fov = 1.40;       // rad, horizontal (= vertical, square frames)
  double camera_range = 30.0;     // m, ground points farther away render as 0

  double capture_radius = 2.0;    // m, success radius around the goal
  double waypoint_spacing = 0.25; // m
  double offroad_horizon = 25.0;  // m, beyond this the render is all zero

  std::uint64_t rng_seed = 0;

  bool operator==(const RunConfig&) const = default;

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

// Applies a single `key=value` override, with the same key names and value
// syntax as the JSON file. steering_grid accepts a comma list or `odd:<n>`.
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

// Names of every RunConfig field, in serialization order.
const std::vector<std::string>& run_config_keys();

}  // namespace pml
