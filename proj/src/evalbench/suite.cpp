#include "pml/evalbench/suite.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "pml/agent/expert.hpp"
#include "pml/core/rng.hpp"
#include "pml/worldmodel/forward_model.hpp"

namespace pml::eval {

std::vector<double> deviation_series(std::span<const sim::Vec2> trajectory,
                                     std::span<const sim::Vec2> waypoints,
                                     std::vector<std::size_t>* matched) {
  if (waypoints.empty()) throw std::invalid_argument("deviation_series: no waypoints");
  std::vector<double> out;
  out.reserve(trajectory.size());
  if (matched != nullptr) matched->clear();
  std::size_t prev = 0;
  for (const sim::Vec2& p : trajectory) {
    std::size_t best = prev;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = prev; j < waypoints.size(); ++j) {
      const double d = sim::norm(p - waypoints[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    prev = best;
    out.push_back(best_d);
    if (matched != nullptr) matched->push_back(best);
  }
  return out;
}

void SuiteSpec::validate() const {
  if (families.empty()) throw std::invalid_argument("suite: no road families");
  if (tasks.empty()) throw std::invalid_argument("suite: no tasks");
  for (const auto& f : families) {
    const auto& family = agent::road_family(f);
    if (lane_index < 0 || lane_index >= family.lane_count) {
      throw std::invalid_argument("suite: lane_index not valid for " + f);
    }
  }
  if (!(turn_radius > 0.0 && leg_length > 0.0)) {
    throw std::invalid_argument("suite: turn_radius and leg_length must be > 0");
  }
  if (turn_sign != 1 && turn_sign != -1) {
    throw std::invalid_argument("suite: turn_sign must be +1 or -1");
  }
  if (!(timeout_factor >= 1.0)) throw std::invalid_argument("suite: timeout_factor < 1");
}

SuiteSpec suite_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("suite: expected a JSON object");
  SuiteSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "name") {
      s.name = value.get<std::string>();
    } else if (key == "families") {
      s.families = value.get<std::vector<std::string>>();
    } else if (key == "tasks") {
      s.tasks.clear();
      for (const auto& t : value) s.tasks.push_back(sim::parse_task_label(t.get<std::string>()));
    } else if (key == "lane_index") {
      s.lane_index = value.get<int>();
    } else if (key == "turn_radius") {
      s.turn_radius = value.get<double>();
    } else if (key == "leg_length") {
      s.leg_length = value.get<double>();
    } else if (key == "turn_sign") {
      s.turn_sign = value.get<int>();
    } else if (key == "timeout_factor") {
      s.timeout_factor = value.get<double>();
    } else {
      throw std::invalid_argument("suite: unknown key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

std::string suite_to_json(const SuiteSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["families"] = s.families;
  std::vector<std::string> tasks;
  for (auto t : s.tasks) tasks.push_back(sim::to_string(t));
  j["tasks"] = tasks;
  j["lane_index"] = s.lane_index;
  j["turn_radius"] = s.turn_radius;
  j["leg_length"] = s.leg_length;
  j["turn_sign"] = s.turn_sign;
  j["timeout_factor"] = s.timeout_factor;
  return j.dump(2) + "\n";
}

SuiteSpec load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open suite file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return suite_from_json(ss.str());
}

std::vector<SuiteTrack> build_suite(const SuiteSpec& suite, const RunConfig& config) {
  suite.validate();
  config.validate();
  std::vector<SuiteTrack> out;
  for (const auto& name : suite.families) {
    const auto& family = agent::road_family(name);
    for (auto task : suite.tasks) {
      sim::TrackParams p;
      p.task = task;
      p.lane_width = family.lane_width;
      p.lane_count = family.lane_count;
      p.lane_index = suite.lane_index;
      p.turn_radius = suite.turn_radius;
      p.leg_length = suite.leg_length;
      p.turn_sign = suite.turn_sign;
      p.waypoint_spacing = config.waypoint_spacing;
      SuiteTrack st{family, suite.lane_index, sim::make_track(p), 0};
      const double route =
          sim::project_onto_polyline(st.track.goal(), st.track.centerline).arc;
      st.max_steps = static_cast<int>(
          std::ceil(suite.timeout_factor * route / (config.speed * config.sim_dt)));
      out.push_back(std::move(st));
    }
  }
  return out;
}

StartPerturbation start_perturbation(int run, std::uint64_t seed) {
  constexpr double kLateral = 0.3;
  constexpr double kHeading = 3.0 * std::numbers::pi / 180.0;
  switch (run) {
    case 0: return {0.0, 0.0};
    case 1: return {kLateral, 0.0};
    case 2: return {-kLateral, 0.0};
    case 3: return {0.0, kHeading};
    default: break;
  }
  Rng rng(seed ^ (0xA5A5A5A5ULL + static_cast<std::uint64_t>(run)));
  const double lateral = rng.uniform(-kLateral, kLateral);
  return {lateral, rng.uniform(-kHeading, kHeading)};
}

AgentFactory oracle_aif_factory(const RunConfig& config) {
  return [config](const SuiteTrack& st) {
    auto model = std::make_shared<wm::OracleForwardModel>(st.track, config);
    auto aif = std::make_shared<agent::AifAgent>(
        *model, agent::make_preference(st.family, st.lane_index, config),
        config.steering_grid, config.prediction_horizon);
    DriveAgent d;
    d.policy = [model, aif](const GrayImage& obs) { return (*aif)(obs); };
    d.hooks.before_policy = [model](const VehicleState& s) { model->set_state(s); };
    return d;
  };
}

AgentFactory learned_aif_factory(const RunConfig& config, const wm::NetSpec& spec,
                                 const nn::ParamStore& params) {
  auto model = std::make_shared<wm::NetForwardModel>(params, spec);
  return [config, model](const SuiteTrack& st) {
    auto aif = std::make_shared<agent::AifAgent>(
        *model, agent::make_preference(st.family, st.lane_index, config),
        config.steering_grid, config.prediction_horizon);
    DriveAgent d;
    d.policy = [model, aif](const GrayImage& obs) { return (*aif)(obs); };
    return d;
  };
}

AgentFactory bc_factory(const agent::BcNetSpec& spec, const nn::ParamStore& params) {
  auto bc = std::make_shared<agent::BcAgent>(spec, params);
  return [bc](const SuiteTrack&) {
    DriveAgent d;
    d.policy = [bc](const GrayImage& obs) {
      try {
        return (*bc)(obs);
      } catch (const std::runtime_error& e) {
        throw sim::PolicyFault(e.what());
      }
    };
    return d;
  };
}

AgentFactory expert_factory(const RunConfig& config) {
  return [config](const SuiteTrack& st) {
    auto state = std::make_shared<VehicleState>();
    auto track = std::make_shared<sim::TrackSpec>(st.track);
    DriveAgent d;
    d.hooks.before_policy = [state](const VehicleState& s) { *state = s; };
    d.policy = [state, track, config](const GrayImage&) {
      try {
        return agent::scripted_expert(*state, *track, config);
      } catch (const std::runtime_error& e) {
        throw sim::PolicyFault(e.what());
      }
    };
    return d;
  };
}

SuiteReport run_suite(const std::string& agent_label, const AgentFactory& factory,
                      const std::vector<SuiteTrack>& tracks, int runs_per_track,
                      const RunConfig& config, std::ostream* progress) {
  if (tracks.empty()) throw std::invalid_argument("run_suite: empty suite");
  if (runs_per_track < 1) throw std::invalid_argument("run_suite: runs_per_track < 1");
  SuiteReport report;
  std::map<std::string, std::vector<const TaskResult*>> by_family;
  std::vector<std::string> family_order;

  for (const auto& st : tracks) {
    const std::span<const sim::Vec2> waypoints(st.track.waypoints.data(),
                                               st.track.goal_index + 1);
    TaskResult row{st.family.name, agent_label, sim::to_string(st.track.task),
                   runs_per_track, 0, 0.0, 0.0};
    double dev_sum = 0.0;
    std::size_t dev_count = 0;
    for (int run = 0; run < runs_per_track; ++run) {
      const StartPerturbation sp = start_perturbation(run, config.rng_seed);
      const VehicleState start =
          sim::start_pose(st.track, config.speed, sp.lateral, sp.heading);
      const DriveAgent agent = factory(st);
      sim::EpisodeResult res =
          sim::run_episode(st.track, agent.policy, config, st.max_steps, start, agent.hooks);

      std::vector<sim::Vec2> traj;
      for (const auto& rec : res.log) traj.push_back({rec.state.x, rec.state.y});
      const std::vector<double> devs = deviation_series(traj, waypoints);
      double run_sum = 0.0;
      for (double d : devs) run_sum += d;
      dev_sum += run_sum;
      dev_count += devs.size();

      RunRecord rr;
      rr.family = st.family.name;
      rr.task = st.track.task;
      rr.run = run;
      rr.status = res.episode.status();
      rr.steps = res.episode.elapsed_steps();
      rr.avg_deviation = devs.empty() ? 0.0 : run_sum / static_cast<double>(devs.size());
      rr.fault = res.fault;
      rr.log = std::move(res.log);
      if (rr.status == sim::EpisodeStatus::success) ++row.successes;
      if (progress != nullptr) {
        *progress << fmt::format("{} {} {:<10} run {}  {:<12} steps {:4d}  dev {:.4f}\n",
                                 agent_label, rr.family, sim::to_string(rr.task), run,
                                 sim::to_string(rr.status), rr.steps, rr.avg_deviation);
        progress->flush();
      }
      report.runs.push_back(std::move(rr));
    }
    row.avg_deviation = dev_count == 0 ? 0.0 : dev_sum / static_cast<double>(dev_count);
    row.success_rate = 100.0 * row.successes / row.runs;
    report.tasks.push_back(row);
  }

  for (const auto& row : report.tasks) {
    if (!by_family.contains(row.family)) family_order.push_back(row.family);
    by_family[row.family].push_back(&row);
  }
  for (const auto& family : family_order) {
    const auto& rows = by_family[family];
    TaskResult o{family, agent_label, "overall", 0, 0, 0.0, 0.0};
    for (const TaskResult* r : rows) {
      o.runs += r->runs;
      o.successes += r->successes;
      o.avg_deviation += r->avg_deviation;
      o.success_rate += r->success_rate;
    }
    o.avg_deviation /= static_cast<double>(rows.size());
    o.success_rate /= static_cast<double>(rows.size());
    report.overall.push_back(o);
  }
  return report;
}

std::string render_report(const std::vector<TaskResult>& rows) {
  if (rows.empty()) throw std::invalid_argument("render_report: no results");
  std::string out = fmt::format("{:<8} {:<12} {:<10} {:>12} {:>12}\n", "Town", "Agent",
                                "Task", "Avg. Dev.", "Success (%)");
  out += std::string(58, '-') + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:<8} {:<12} {:<10} {:>12.4f} {:>12.2f}\n", r.family, r.agent,
                       r.task, r.avg_deviation, r.success_rate);
  }
  return out;
}

void write_metrics(std::ostream& out, const std::vector<TaskResult>& rows) {
  out << "town\tagent\ttask\truns\tsuccesses\tavg_deviation\tsuccess_rate\n";
  for (const auto& r : rows) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{:.17g}\t{:.17g}\n", r.family, r.agent, r.task,
                       r.runs, r.successes, r.avg_deviation, r.success_rate);
  }
}

std::vector<TaskResult> read_metrics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "town\tagent\ttask\truns\tsuccesses\tavg_deviation\tsuccess_rate") {
    throw std::runtime_error("metrics file: bad header");
  }
  std::vector<TaskResult> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    if (f.size() != 7) throw std::runtime_error("metrics file: expected 7 fields");
    TaskResult r;
    r.family = f[0];
    r.agent = f[1];
    r.task = f[2];
    r.runs = std::stoi(f[3]);
    r.successes = std::stoi(f[4]);
    r.avg_deviation = std::stod(f[5]);
    r.success_rate = std::stod(f[6]);
    rows.push_back(r);
  }
  return rows;
}

void write_runs(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "town\ttask\trun\tstatus\tsteps\tavg_deviation\n";
  for (const auto& r : runs) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\t{:.17g}\n", r.family, sim::to_string(r.task),
                       r.run, sim::to_string(r.status), r.steps, r.avg_deviation);
  }
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

void write_report_dir(const std::string& dir, const SuiteReport& report) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root / "trajectories");
  std::vector<TaskResult> rows = report.tasks;
  rows.insert(rows.end(), report.overall.begin(), report.overall.end());

  std::ostringstream metrics, runs;
  write_metrics(metrics, rows);
  write_runs(runs, report.runs);
  write_text(root / "metrics.tsv", metrics.str());
  write_text(root / "runs.tsv", runs.str());
  write_text(root / "report.txt", render_report(rows));
  for (const auto& r : report.runs) {
    std::ostringstream log;
    sim::write_trajectory_log(log, r.log);
    write_text(root / "trajectories" /
                   fmt::format("{}_{}_{}.tsv", r.family, sim::to_string(r.task), r.run),
               log.str());
  }
}

std::vector<TaskResult> collect_metrics(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.tsv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<TaskResult> rows;
  for (const auto& f : files) {
    std::ifstream in(f);
    auto part = read_metrics(in);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw std::runtime_error("no metrics.tsv found under " + dir);
  return rows;
}

}  // namespace pml::eval
