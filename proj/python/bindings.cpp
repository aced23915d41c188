#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pml/agent/aif_agent.hpp"
#include "pml/core/run_config.hpp"
#include "pml/datasets/collect.hpp"
#include "pml/datasets/corpus.hpp"
#include "pml/datasets/transforms.hpp"
#include "pml/evalbench/suite.hpp"
#include "pml/nn/param_store.hpp"
#include "pml/simworld/render.hpp"
#include "pml/vision/ssim.hpp"

namespace py = pybind11;
using namespace pml;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const GrayImage& img) {
  Array out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.size() * sizeof(double));
  return out;
}

// (N, S, S) stack.
Array stack(const std::vector<const GrayImage*>& images, int size) {
  Array out({static_cast<py::ssize_t>(images.size()), static_cast<py::ssize_t>(size),
             static_cast<py::ssize_t>(size)});
  double* dst = out.mutable_data();
  for (const GrayImage* img : images) {
    std::memcpy(dst, img->pixels().data(), img->size() * sizeof(double));
    dst += img->size();
  }
  return out;
}

std::vector<GrayImage> unstack(const Array& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected an (N, S, S) array");
  const auto n = a.shape(0), h = a.shape(1), w = a.shape(2);
  std::vector<GrayImage> out;
  for (py::ssize_t i = 0; i < n; ++i) {
    const double* p = a.data() + i * h * w;
    out.emplace_back(static_cast<int>(w), static_cast<int>(h), std::vector<double>(p, p + h * w));
  }
  return out;
}

py::tuple frames_to_py(const std::vector<data::LabeledFrame>& frames, int size) {
  std::vector<const GrayImage*> imgs;
  py::array_t<double> actions(static_cast<py::ssize_t>(frames.size()));
  auto a = actions.mutable_unchecked<1>();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    imgs.push_back(&frames[i].obs);
    a(i) = frames[i].action.value();
  }
  return py::make_tuple(stack(imgs, size), actions);
}

py::tuple transitions_to_py(const std::vector<data::TransitionSample>& samples, int size) {
  std::vector<const GrayImage*> obs, next;
  py::array_t<double> actions(static_cast<py::ssize_t>(samples.size()));
  auto a = actions.mutable_unchecked<1>();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    obs.push_back(&samples[i].obs);
    next.push_back(&samples[i].next_obs);
    a(i) = samples[i].action.value();
  }
  return py::make_tuple(stack(obs, size), actions, stack(next, size));
}

std::vector<double> to_actions(const py::array_t<double>& a, std::size_t n) {
  if (static_cast<std::size_t>(a.size()) != n) {
    throw std::invalid_argument("need one action per image");
  }
  return std::vector<double>(a.data(), a.data() + a.size());
}

py::dict row_to_dict(const eval::TaskResult& r) {
  py::dict d;
  d["town"] = r.family;
  d["agent"] = r.agent;
  d["task"] = r.task;
  d["runs"] = r.runs;
  d["successes"] = r.successes;
  d["avg_deviation"] = r.avg_deviation;
  d["success_rate"] = r.success_rate;
  return d;
}

eval::AgentFactory factory_for(const std::string& agent, const std::optional<std::string>& model,
                               const RunConfig& cfg) {
  if (agent == "aif-oracle") return eval::oracle_aif_factory(cfg);
  if (agent == "expert") return eval::expert_factory(cfg);
  if (!model) throw std::invalid_argument(agent + " needs a model file");
  const nn::ParamFile file = nn::load_param_file(*model);
  if (agent == "aif-learned") {
    const auto [spec, params] = wm::read_forward_params(file);
    return eval::learned_aif_factory(cfg, spec, params);
  }
  if (agent == "bc") {
    const auto [spec, params] = agent::read_bc_params(file);
    return eval::bc_factory(spec, params);
  }
  throw std::invalid_argument("unknown agent " + agent);
}

}  // namespace

PYBIND11_MODULE(pypml, m) {
  m.doc() = "Lane-keeping simulator, SSIM, corpora and evaluation harness";

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("image_size", &RunConfig::image_size)
      .def_readwrite("prediction_horizon", &RunConfig::prediction_horizon)
      .def_readwrite("sim_dt", &RunConfig::sim_dt)
      .def_readwrite("speed", &RunConfig::speed)
      .def_readwrite("wheelbase", &RunConfig::wheelbase)
      .def_readwrite("max_wheel_angle", &RunConfig::max_wheel_angle)
      .def_readwrite("camera_height", &RunConfig::camera_height)
      .def_readwrite("camera_pitch", &RunConfig::camera_pitch)
      .def_readwrite("camera_fov", &RunConfig::camera_fov)
      .def_readwrite("camera_range", &RunConfig::camera_range)
      .def_readwrite("capture_radius", &RunConfig::capture_radius)
      .def_readwrite("waypoint_spacing", &RunConfig::waypoint_spacing)
      .def_readwrite("offroad_horizon", &RunConfig::offroad_horizon)
      .def_readwrite("rng_seed", &RunConfig::rng_seed)
      .def_property_readonly("steering_grid",
                             [](const RunConfig& c) {
                               std::vector<double> out;
                               for (const auto& a : c.steering_grid) out.push_back(a.value());
                               return out;
                             })
      .def("validate", &RunConfig::validate)
      .def("override", [](RunConfig& c, const std::string& key,
                          const std::string& value) { apply_override(c, key, value); })
      .def("to_json", &run_config_to_json)
      .def_static("from_json", &run_config_from_json)
      .def_static("load", &load_run_config)
      .def("save", [](const RunConfig& c, const std::string& path) { save_run_config(path, c); })
      .def_static("keys", &run_config_keys)
      .def(py::self == py::self);

  m.def("ssim", [](const Array& a, const Array& b, int window_size) {
    vision::SsimParams p;
    p.window_size = window_size;
    return vision::ssim(to_image(a), to_image(b), p);
  }, py::arg("a"), py::arg("b"), py::arg("window_size") = 8);

  m.def("mirror_image", [](const Array& a) { return to_array(mirror_image(to_image(a))); });

  m.def("road_families", [] {
    std::vector<std::string> out;
    for (const auto& f : agent::road_families()) out.push_back(f.name);
    return out;
  });

  m.def("make_preference", [](const std::string& family, int lane, const RunConfig& cfg) {
    return to_array(agent::make_preference(agent::road_family(family), lane, cfg).image);
  }, py::arg("family") = "town01", py::arg("lane") = 0, py::arg("config") = RunConfig{});

  m.def("render_start", [](const std::string& task, double lane_width, double lateral,
                           double heading, const RunConfig& cfg) {
    sim::TrackParams p;
    p.task = sim::parse_task_label(task);
    p.lane_width = lane_width;
    p.waypoint_spacing = cfg.waypoint_spacing;
    const sim::TrackSpec track = sim::make_track(p);
    return to_array(sim::render_observation(sim::start_pose(track, cfg.speed, lateral, heading),
                                            track, sim::camera_from_config(cfg),
                                            cfg.offroad_horizon));
  }, py::arg("task") = "straight", py::arg("lane_width") = 4.0, py::arg("lateral") = 0.0,
     py::arg("heading") = 0.0, py::arg("config") = RunConfig{});

  m.def("collect", [](const std::string& mode, int steps, std::uint64_t seed,
                      const RunConfig& cfg) -> py::tuple {
    const auto tracks = data::collection_tracks(cfg);
    if (mode == "zigzag") {
      return transitions_to_py(data::collect_zigzag(tracks, cfg, steps, {}, seed), cfg.image_size);
    }
    if (mode == "expert") {
      data::ZigzagParams zp;
      zp.amplitude = 0.3;
      return frames_to_py(data::collect_expert(tracks, cfg, steps, zp, seed), cfg.image_size);
    }
    throw std::invalid_argument("mode must be zigzag or expert");
  }, py::arg("mode"), py::arg("steps"), py::arg("seed") = 0, py::arg("config") = RunConfig{},
     "zigzag -> (obs, actions, next_obs); expert -> (images, actions)");

  m.def("save_frames", [](const std::string& path, const Array& images,
                          const py::array_t<double>& actions) {
    const auto imgs = unstack(images);
    const auto acts = to_actions(actions, imgs.size());
    std::vector<data::LabeledFrame> frames;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      frames.push_back({imgs[i], SteeringAction(acts[i])});
    }
    data::save_corpus(path, frames);
  });

  m.def("save_transitions", [](const std::string& path, const Array& obs,
                               const py::array_t<double>& actions, const Array& next) {
    const auto o = unstack(obs);
    const auto n = unstack(next);
    const auto acts = to_actions(actions, o.size());
    if (n.size() != o.size()) throw std::invalid_argument("obs / next_obs count differs");
    std::vector<data::TransitionSample> samples;
    for (std::size_t i = 0; i < o.size(); ++i) {
      samples.push_back({o[i], SteeringAction(acts[i]), n[i]});
    }
    data::save_corpus(path, samples);
  });

  m.def("load_frames", [](const std::string& path) {
    const auto h = data::read_corpus_header(path);
    return frames_to_py(data::load_frames(path), h.width);
  });

  m.def("load_transitions", [](const std::string& path) {
    const auto h = data::read_corpus_header(path);
    return transitions_to_py(data::load_transitions(path), h.width);
  });

  m.def("load_image", [](const std::string& path) { return to_array(data::load_image(path)); });
  m.def("save_image", [](const std::string& path, const Array& a) {
    data::save_image(path, to_image(a));
  });

  m.def("evaluate", [](const std::string& agent, std::optional<std::string> model,
                       std::vector<std::string> families, std::vector<std::string> tasks,
                       int runs, const RunConfig& cfg, std::optional<std::string> out) {
    eval::SuiteSpec spec;
    if (!families.empty()) spec.families = families;
    if (!tasks.empty()) {
      spec.tasks.clear();
      for (const auto& t : tasks) spec.tasks.push_back(sim::parse_task_label(t));
    }
    const auto factory = factory_for(agent, model, cfg);
    eval::SuiteReport report;
    {
      py::gil_scoped_release release;
      report = eval::run_suite(agent, factory, eval::build_suite(spec, cfg), runs, cfg);
    }
    if (out) eval::write_report_dir(*out, report);
    py::list rows;
    for (const auto& r : report.tasks) rows.append(row_to_dict(r));
    for (const auto& r : report.overall) rows.append(row_to_dict(r));
    return rows;
  }, py::arg("agent"), py::arg("model") = py::none(),
     py::arg("families") = std::vector<std::string>{},
     py::arg("tasks") = std::vector<std::string>{}, py::arg("runs") = 4,
     py::arg("config") = RunConfig{}, py::arg("out") = py::none());

  m.def("report", [](const std::string& dir) {
    return eval::render_report(eval::collect_metrics(dir));
  }, "Table of every metrics file under a report directory");
}
