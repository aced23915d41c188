#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pml/agent/aif_agent.hpp"
#include "pml/agent/bc_net.hpp"
#include "pml/core/run_config.hpp"
#include "pml/simworld/episode.hpp"
#include "pml/simworld/geometry.hpp"
#include "pml/simworld/track.hpp"
#include "pml/worldmodel/unet.hpp"

namespace pml::eval {

// Distance from each trajectory point to its corresponding waypoint: the
// nearest waypoint at or after the previous match, so the matched index
// never decreases.
std::vector<double> deviation_series(std::span<const sim::Vec2> trajectory,
                                     std::span<const sim::Vec2> waypoints,
                                     std::vector<std::size_t>* matched = nullptr);

struct SuiteSpec {
  std::string name = "desk";
  std::vector<std::string> families{"town01", "town04"};
  std::vector<sim::TaskLabel> tasks{sim::TaskLabel::straight, sim::TaskLabel::one_turn,
                                    sim::TaskLabel::two_turns};
  int lane_index = 0;
  double turn_radius = 20.0;
  double leg_length = 40.0;
  int turn_sign = 1;
  // Episode step budget as a multiple of the steps needed to cover the route.
  double timeout_factor = 1.5;

  void validate() const;
};

SuiteSpec suite_from_json(const std::string& text);
std::string suite_to_json(const SuiteSpec& suite);
SuiteSpec load_suite(const std::string& path);

struct SuiteTrack {
  agent::RoadFamily family;
  int lane_index = 0;
  sim::TrackSpec track;
  int max_steps = 0;
};

std::vector<SuiteTrack> build_suite(const SuiteSpec& suite, const RunConfig& config);

struct StartPerturbation {
  double lateral = 0.0;  // m, positive to the right
  double heading = 0.0;  // rad
};

// (0, 0), (+0.3 m, 0), (-0.3 m, 0), (0, +3 deg); runs past the fourth draw
// seeded offsets from the same ranges.
StartPerturbation start_perturbation(int run, std::uint64_t seed);

// A policy prepared for one track. Hooks let privileged agents see the
// hidden state.
struct DriveAgent {
  sim::Policy policy;
  sim::EpisodeHooks hooks;
};

using AgentFactory = std::function<DriveAgent(const SuiteTrack&)>;

AgentFactory oracle_aif_factory(const RunConfig& config);
AgentFactory learned_aif_factory(const RunConfig& config, const wm::NetSpec& spec,
                                 const nn::ParamStore& params);
AgentFactory bc_factory(const agent::BcNetSpec& spec, const nn::ParamStore& params);
AgentFactory expert_factory(const RunConfig& config);

struct RunRecord {
  std::string family;
  sim::TaskLabel task = sim::TaskLabel::straight;
  int run = 0;
  sim::EpisodeStatus status = sim::EpisodeStatus::running;
  int steps = 0;
  double avg_deviation = 0.0;
  std::string fault;
  std::vector<sim::StepRecord> log;
};

struct TaskResult {
  std::string family;
  std::string agent;
  std::string task;  // task label, or "overall"
  int runs = 0;
  int successes = 0;
  double avg_deviation = 0.0;  // m
  double success_rate = 0.0;   // percent
};

struct SuiteReport {
  std::vector<TaskResult> tasks;    // per (family, task)
  std::vector<TaskResult> overall;  // per family
  std::vector<RunRecord> runs;
};

// Runs every suite track `runs_per_track` times. Deviation is averaged over
// all steps of all runs of a task; an overall row per family averages the
// task rows.
SuiteReport run_suite(const std::string& agent_label, const AgentFactory& factory,
                      const std::vector<SuiteTrack>& tracks, int runs_per_track,
                      const RunConfig& config, std::ostream* progress = nullptr);

// Fixed-width table, deviations to 4 decimals and success to 2.
std::string render_report(const std::vector<TaskResult>& rows);

// Tab-separated with header
// `town agent task runs successes avg_deviation success_rate`.
void write_metrics(std::ostream& out, const std::vector<TaskResult>& rows);
std::vector<TaskResult> read_metrics(std::istream& in);

// Tab-separated: town task run status steps avg_deviation.
void write_runs(std::ostream& out, const std::vector<RunRecord>& runs);

// Writes metrics.tsv, runs.tsv, report.txt and one trajectory log per run.
void write_report_dir(const std::string& dir, const SuiteReport& report);

// All rows of every metrics.tsv directly under `dir` or its subdirectories.
std::vector<TaskResult> collect_metrics(const std::string& dir);

}  // namespace pml::eval
