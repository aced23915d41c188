#include "pml/core/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace pml {

namespace {

using Json = nlohmann::ordered_json;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("RunConfig: ") + what);
}

Json to_json_value(const RunConfig& c) {
  Json grid = Json::array();
  for (const auto& a : c.steering_grid) grid.push_back(a.value());
  Json j;
  j["image_size"] = c.image_size;
  j["steering_grid"] = grid;
  j["prediction_horizon"] = c.prediction_horizon;
  j["sim_dt"] = c.sim_dt;
  j["speed"] = c.speed;
  j["wheelbase"] = c.wheelbase;
  j["max_wheel_angle"] = c.max_wheel_angle;
  j["camera_height"] = c.camera_height;
  j["camera_pitch"] = c.camera_pitch;
  j["camera_fov"] = c.camera_fov;
  j["camera_range"] = c.camera_range;
  j["capture_radius"] = c.capture_radius;
  j["waypoint_spacing"] = c.waypoint_spacing;
  j["offroad_horizon"] = c.offroad_horizon;
  j["rng_seed"] = c.rng_seed;
  return j;
}

std::vector<SteeringAction> grid_from_json(const Json& j) {
  std::vector<SteeringAction> grid;
  for (const auto& v : j) grid.emplace_back(v.get<double>());
  return grid;
}

// Applies a parsed JSON value to the named field.
void set_field(RunConfig& c, const std::string& key, const Json& v) {
  if (key == "image_size") c.image_size = v.get<int>();
  else if (key == "steering_grid") c.steering_grid = grid_from_json(v);
  else if (key == "prediction_horizon") c.prediction_horizon = v.get<int>();
  else if (key == "sim_dt") c.sim_dt = v.get<double>();
  else if (key == "speed") c.speed = v.get<double>();
  else if (key == "wheelbase") c.wheelbase = v.get<double>();
  else if (key == "max_wheel_angle") c.max_wheel_angle = v.get<double>();
  else if (key == "camera_height") c.camera_height = v.get<double>();
  else if (key == "camera_pitch") c.camera_pitch = v.get<double>();
  else if (key == "camera_fov") c.camera_fov = v.get<double>();
  else if (key == "camera_range") c.camera_range = v.get<double>();
  else if (key == "capture_radius") c.capture_radius = v.get<double>();
  else if (key == "waypoint_spacing") c.waypoint_spacing = v.get<double>();
  else if (key == "offroad_horizon") c.offroad_horizon = v.get<double>();
  else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
  else throw std::invalid_argument("RunConfig: unknown key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  require(image_size >= 8, "image_size must be >= 8");
  require(is_valid_steering_grid(steering_grid),
          "steering_grid must be strictly increasing and symmetric about 0");
  require(prediction_horizon >= 1, "prediction_horizon must be >= 1");
  require(sim_dt > 0.0, "sim_dt must be positive");
  require(speed > 0.0, "speed must be positive");
  require(wheelbase > 0.0, "wheelbase must be positive");
  require(max_wheel_angle > 0.0 && max_wheel_angle < 1.5,
          "max_wheel_angle must be in (0, 1.5) rad");
  require(camera_height > 0.0, "camera_height must be positive");
  require(camera_fov > 0.0 && camera_fov < 3.14159,
          "camera_fov must be in (0, pi)");
  require(camera_range > 0.0, "camera_range must be positive");
  require(capture_radius > 0.0, "capture_radius must be positive");
  require(waypoint_spacing > 0.0, "waypoint_spacing must be positive");
  require(offroad_horizon > 0.0, "offroad_horizon must be positive");
}

std::string run_config_to_json(const RunConfig& cfg) {
  return to_json_value(cfg).dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  const Json j = Json::parse(text);
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) set_field(cfg, key, value);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str());
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << run_config_to_json(cfg) << '\n';
}

void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value) {
  RunConfig next = cfg;
  if (key == "steering_grid") {
    if (value.rfind("odd:", 0) == 0) {
      next.steering_grid = make_steering_grid(std::stoi(value.substr(4)));
    } else {
      set_field(next, key, Json::parse("[" + value + "]"));
    }
  } else {
    set_field(next, key, Json::parse(value));
  }
  next.validate();
  cfg = std::move(next);
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    const auto j = to_json_value(RunConfig{});
    for (const auto& [k, v] : j.items()) {
      out.push_back(k);
    }
    return out;
  }();
  return keys;
}

}  // namespace pml
