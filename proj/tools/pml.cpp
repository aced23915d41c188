#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pml/agent/aif_agent.hpp"
#include "pml/agent/bc_net.hpp"
#include "pml/core/run_config.hpp"
#include "pml/datasets/collect.hpp"
#include "pml/datasets/corpus.hpp"
#include "pml/datasets/transforms.hpp"
#include "pml/evalbench/suite.hpp"
#include "pml/nn/param_store.hpp"
#include "pml/simworld/episode.hpp"
#include "pml/vision/ssim.hpp"
#include "pml/worldmodel/trainer.hpp"
#include "pml/worldmodel/unet.hpp"

using namespace pml;

namespace {

// --config plus one flag per RunConfig key, applied in that order.
struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "RunConfig JSON file");
    for (const auto& key : run_config_keys()) {
      app->add_option("--" + key, overrides[key], "override " + key);
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) apply_override(cfg, key, value);
    }
    cfg.validate();
    return cfg;
  }
};

std::vector<sim::TrackSpec> tracks_for(const std::string& label, const RunConfig& cfg) {
  const auto all = data::collection_tracks(cfg);
  if (label == "all") return all;
  const sim::TaskLabel task = sim::parse_task_label(label);
  std::vector<sim::TrackSpec> out;
  for (const auto& t : all) {
    if (t.task == task) out.push_back(t);
  }
  return out;
}

eval::SuiteTrack single_track(const std::string& family, const std::string& label,
                              int lane, const RunConfig& cfg) {
  eval::SuiteSpec s;
  s.families = {family};
  s.tasks = {sim::parse_task_label(label)};
  s.lane_index = lane;
  return eval::build_suite(s, cfg).front();
}

data::BinSpec bin_spec(int cap) {
  data::BinSpec b;
  if (cap > 0) {
    b.cap_mode = data::CapMode::fixed_cap;
    b.cap = cap;
  }
  return b;
}

void print_histogram(const std::vector<int>& h) {
  std::cout << "bins";
  for (int c : h) std::cout << ' ' << c;
  std::cout << '\n';
}

int cmd_collect(const std::string& mode, const std::string& track, const std::string& out,
                int steps, std::uint64_t seed, double amplitude, const RunConfig& cfg) {
  const auto tracks = tracks_for(track, cfg);
  data::ZigzagParams zp;
  data::CollectStats stats;
  if (mode == "zigzag") {
    if (amplitude >= 0.0) zp.amplitude = amplitude;
    const auto samples = data::collect_zigzag(tracks, cfg, steps, zp, seed, &stats);
    data::save_corpus(out, samples);
    print_histogram(data::bin_histogram(samples, {}));
  } else {
    zp.amplitude = amplitude >= 0.0 ? amplitude : 0.3;
    const auto frames = data::collect_expert(tracks, cfg, steps, zp, seed, &stats);
    data::save_corpus(out, frames);
    print_histogram(data::bin_histogram(frames, {}));
  }
  std::cout << fmt::format("wrote {} samples to {} ({} resets)\n", stats.samples, out,
                           stats.resets);
  return 0;
}

int cmd_prepare(const std::string& in, const std::string& out, bool flip, int cap,
                std::uint64_t seed) {
  const data::CorpusHeader h = data::read_corpus_header(in);
  const data::BinSpec bins = bin_spec(cap);
  auto run = [&](auto records) {
    if (flip) records = data::augment_flip(records);
    data::NormalizeReport rep;
    if (cap >= 0) records = data::normalize_bins(records, bins, seed, &rep);
    data::save_corpus(out, records);
    print_histogram(data::bin_histogram(records, bins));
    std::cout << fmt::format("wrote {} records to {} (cap {})\n", records.size(), out,
                             rep.cap);
  };
  if (h.kind == data::RecordKind::labeled_frame) {
    run(data::load_frames(in));
  } else {
    run(data::load_transitions(in));
  }
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& out,
              const std::string& metrics, const wm::TrainConfig& tc, const RunConfig& cfg) {
  const auto samples = data::load_transitions(data_path);
  wm::NetSpec spec;
  spec.image_size = cfg.image_size;
  const auto result = wm::train_forward_model(samples, spec, tc, &std::cout);
  nn::save_param_file(out, wm::make_param_file(spec, result.params));
  if (!metrics.empty()) {
    std::ofstream f(metrics, std::ios::binary);
    wm::write_metrics(f, result.report);
  }
  std::cout << fmt::format("saved {} (checksum {:016x})\n", out, result.params.checksum());
  return 0;
}

int cmd_train_bc(const std::string& data_path, const std::string& out,
                 const std::string& metrics, const agent::BcTrainConfig& tc,
                 const RunConfig& cfg) {
  const auto frames = data::load_frames(data_path);
  agent::BcNetSpec spec;
  spec.image_size = cfg.image_size;
  const auto result = agent::bc_train(frames, spec, tc, &std::cout);
  nn::save_param_file(out, agent::make_bc_param_file(spec, result.params));
  if (!metrics.empty()) {
    std::ofstream f(metrics, std::ios::binary);
    agent::write_bc_metrics(f, result.report);
  }
  std::cout << fmt::format("saved {} (checksum {:016x})\n", out, result.params.checksum());
  return 0;
}

int cmd_drive(const std::string& agent_kind, const std::string& model_path,
              const std::string& pref_path, const std::string& family,
              const std::string& track, int lane, const std::string& log_path,
              const RunConfig& cfg) {
  const eval::SuiteTrack st = single_track(family, track, lane, cfg);
  const nn::ParamFile file = nn::load_param_file(model_path);

  sim::Policy policy;
  std::unique_ptr<wm::NetForwardModel> model;
  if (agent_kind == "aif") {
    const auto [spec, params] = wm::read_forward_params(file);
    model = std::make_unique<wm::NetForwardModel>(params, spec);
    agent::Preference pref = pref_path.empty()
                                 ? agent::make_preference(st.family, lane, cfg)
                                 : agent::Preference{data::load_image(pref_path), pref_path};
    policy = agent::AifAgent(*model, std::move(pref), cfg.steering_grid,
                             cfg.prediction_horizon);
  } else {
    const auto [spec, params] = agent::read_bc_params(file);
    auto bc = std::make_shared<agent::BcAgent>(spec, params);
    policy = [bc](const GrayImage& obs) { return (*bc)(obs); };
  }

  const auto result = sim::run_episode(st.track, policy, cfg, st.max_steps);
  if (!log_path.empty()) {
    std::ofstream f(log_path, std::ios::binary);
    sim::write_trajectory_log(f, result.log);
  }
  std::cout << fmt::format("{} {} {}: {} after {} steps\n", agent_kind, family, track,
                           sim::to_string(result.episode.status()),
                           result.episode.elapsed_steps());
  if (!result.fault.empty()) std::cout << "fault: " << result.fault << '\n';
  return result.episode.status() == sim::EpisodeStatus::success ? 0 : 2;
}

int cmd_eval(const std::string& agent_kind, const std::string& model_path,
             const std::string& suite_path, int runs, const std::string& out,
             const RunConfig& cfg) {
  const eval::SuiteSpec suite = suite_path.empty() ? eval::SuiteSpec{}
                                                   : eval::load_suite(suite_path);
  const auto tracks = eval::build_suite(suite, cfg);
  eval::AgentFactory factory;
  std::string label = agent_kind;
  if (agent_kind == "aif-oracle") {
    factory = eval::oracle_aif_factory(cfg);
    label = "pml-oracle";
  } else if (agent_kind == "expert") {
    factory = eval::expert_factory(cfg);
  } else {
    if (model_path.empty()) throw std::invalid_argument(agent_kind + " needs --model");
    const nn::ParamFile file = nn::load_param_file(model_path);
    if (agent_kind == "aif-learned") {
      const auto [spec, params] = wm::read_forward_params(file);
      factory = eval::learned_aif_factory(cfg, spec, params);
      label = "pml";
    } else {
      const auto [spec, params] = agent::read_bc_params(file);
      factory = eval::bc_factory(spec, params);
      label = "bc";
    }
  }
  const auto report = eval::run_suite(label, factory, tracks, runs, cfg, &std::cout);
  if (!out.empty()) eval::write_report_dir(out, report);
  std::vector<eval::TaskResult> rows = report.tasks;
  rows.insert(rows.end(), report.overall.begin(), report.overall.end());
  std::cout << eval::render_report(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptual motor learning lane-keeping toolkit"};
  app.require_subcommand(1);
  ConfigFlags flags;

  std::string mode = "zigzag", track = "all", out, in, model, pref, suite, metrics, log;
  std::string family = "town01", agent_kind;
  int steps = 10000, runs = 4, lane = 0, cap = 0, index = 0;
  double amplitude = -1.0;
  std::uint64_t seed = 0;
  bool flip = false, next = false;

  auto* collect = app.add_subcommand("collect", "record a zigzag or expert corpus");
  collect->add_option("--mode", mode)->check(CLI::IsMember({"zigzag", "expert"}));
  collect->add_option("--track", track, "straight, one_turn, two_turns or all");
  collect->add_option("--out", out)->required();
  collect->add_option("--steps", steps);
  collect->add_option("--seed", seed);
  collect->add_option("--amplitude", amplitude, "steering perturbation amplitude");
  flags.attach(collect);

  auto* prepare = app.add_subcommand("prepare", "flip-augment and bin-normalize a corpus");
  prepare->add_option("--in", in)->required();
  prepare->add_option("--out", out)->required();
  prepare->add_flag("--flip", flip);
  prepare->add_option("--cap", cap, "per-bin cap; 0 = smallest non-empty bin, -1 = off");
  prepare->add_option("--seed", seed);

  wm::TrainConfig tc;
  auto* train = app.add_subcommand("train", "train the forward model on transitions");
  train->add_option("--data", in)->required();
  train->add_option("--out", out)->required();
  train->add_option("--metrics", metrics);
  train->add_option("--epochs", tc.epochs);
  train->add_option("--lr", tc.learning_rate);
  train->add_option("--batch", tc.batch_size);
  train->add_option("--val", tc.validation_fraction);
  train->add_option("--seed", tc.seed);
  flags.attach(train);

  agent::BcTrainConfig bc;
  auto* train_bc = app.add_subcommand("train-bc", "train the behavioral cloning baseline");
  train_bc->add_option("--data", in)->required();
  train_bc->add_option("--out", out)->required();
  train_bc->add_option("--metrics", metrics);
  train_bc->add_option("--epochs", bc.epochs);
  train_bc->add_option("--lr", bc.learning_rate);
  train_bc->add_option("--batch", bc.batch_size);
  train_bc->add_option("--val", bc.validation_fraction);
  train_bc->add_option("--seed", bc.seed);
  flags.attach(train_bc);

  auto* drive = app.add_subcommand("drive", "drive one episode");
  drive->add_option("--agent", agent_kind)->required()->check(CLI::IsMember({"aif", "bc"}));
  drive->add_option("--model", model)->required();
  drive->add_option("--pref", pref, "preference image; default renders one");
  drive->add_option("--track", track)->required();
  drive->add_option("--family", family);
  drive->add_option("--lane", lane);
  drive->add_option("--log", log, "trajectory log output");
  flags.attach(drive);

  auto* evaluate = app.add_subcommand("eval", "run an agent over a track suite");
  evaluate->add_option("--agent", agent_kind)
      ->required()
      ->check(CLI::IsMember({"aif-oracle", "aif-learned", "bc", "expert"}));
  evaluate->add_option("--model", model);
  evaluate->add_option("--suite", suite, "suite JSON; default is the desk suite");
  evaluate->add_option("--runs", runs);
  evaluate->add_option("--out", out);
  flags.attach(evaluate);

  auto* report = app.add_subcommand("report", "tabulate metrics under a directory");
  report->add_option("dir", in)->required();

  std::string a, b;
  auto* ssim_cmd = app.add_subcommand("ssim", "SSIM between two image files");
  ssim_cmd->add_option("a", a)->required();
  ssim_cmd->add_option("b", b)->required();

  auto* make_pref = app.add_subcommand("make-pref", "render a preference image");
  make_pref->add_option("--family", family);
  make_pref->add_option("--lane", lane);
  make_pref->add_option("--out", out)->required();
  flags.attach(make_pref);

  auto* export_pgm = app.add_subcommand("export-pgm", "write one image as PGM");
  export_pgm->add_option("input", in, "image or corpus file")->required();
  export_pgm->add_option("--index", index);
  export_pgm->add_flag("--next", next, "export the next observation of a transition");
  export_pgm->add_option("--out", out)->required();

  auto* show_config = app.add_subcommand("config", "print the resolved RunConfig");
  flags.attach(show_config);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) {
      return cmd_collect(mode, track, out, steps, seed, amplitude, flags.resolve());
    }
    if (*prepare) return cmd_prepare(in, out, flip, cap, seed);
    if (*train) return cmd_train(in, out, metrics, tc, flags.resolve());
    if (*train_bc) return cmd_train_bc(in, out, metrics, bc, flags.resolve());
    if (*drive) {
      return cmd_drive(agent_kind, model, pref, family, track, lane, log, flags.resolve());
    }
    if (*evaluate) return cmd_eval(agent_kind, model, suite, runs, out, flags.resolve());
    if (*report) {
      std::cout << eval::render_report(eval::collect_metrics(in));
      return 0;
    }
    if (*ssim_cmd) {
      std::cout << fmt::format("{:.9f}\n",
                               vision::ssim(data::load_image(a), data::load_image(b)));
      return 0;
    }
    if (*make_pref) {
      const RunConfig cfg = flags.resolve();
      data::save_image(out, agent::make_preference(agent::road_family(family), lane, cfg).image);
      return 0;
    }
    if (*export_pgm) {
      const data::CorpusHeader h = data::read_corpus_header(in);
      GrayImage img;
      if (h.kind == data::RecordKind::labeled_frame) {
        img = data::load_frames(in).at(index).obs;
      } else {
        const auto t = data::load_transitions(in).at(index);
        img = next ? t.next_obs : t.obs;
      }
      data::write_pgm(out, img);
      return 0;
    }
    if (*show_config) {
      std::cout << run_config_to_json(flags.resolve()) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
