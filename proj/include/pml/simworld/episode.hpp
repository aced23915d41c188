#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pml/core/gray_image.hpp"
#include "pml/core/run_config.hpp"
#include "pml/core/vehicle_state.hpp"
#include "pml/simworld/track.hpp"

namespace pml::sim {

enum class EpisodeStatus { running, success, off_lane, timeout, policy_fault };

std::string to_string(EpisodeStatus status);

// A policy sees only the rendered observation and returns a raw steering
// command; non-finite commands abort the episode with policy_fault.
using Policy = std::function<double(const GrayImage&)>;

// Thrown by policies (or the models they call) to report a fault.
struct PolicyFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Terminal states are absorbing: finish() on a finished episode throws.
class Episode {
 public:
  Episode(TrackSpec track, VehicleState state)
      : track_(std::move(track)), state_(state) {}

  const TrackSpec& track() const { return track_; }
  const VehicleState& state() const { return state_; }
  int elapsed_steps() const { return elapsed_steps_; }
  EpisodeStatus status() const { return status_; }
  bool running() const { return status_ == EpisodeStatus::running; }

  void advance(const VehicleState& next);
  void finish(EpisodeStatus terminal);

 private:
  TrackSpec track_;
  VehicleState state_;
  int elapsed_steps_ = 0;
  EpisodeStatus status_ = EpisodeStatus::running;
};

struct StepRecord {
  int step = 0;
  VehicleState state;      // after the step
  double action = 0.0;     // applied (clamped) steering
  double deviation = 0.0;  // m from the lane center, after the step

  bool operator==(const StepRecord&) const = default;
};

struct EpisodeResult {
  Episode episode;
  std::vector<StepRecord> log;
  std::string fault;  // policy diagnostic when status is policy_fault
};

struct EpisodeHooks {
  // Called with the hidden state right before each policy query. Lets an
  // oracle forward model track ground truth; agents themselves never see it.
  std::function<void(const VehicleState&)> before_policy;
};

// Renders, queries the policy, steps dynamics, and classifies the outcome:
// off_lane when the deviation exceeds lane_width / 2, success within
// capture_radius of the goal, timeout after max_steps.
EpisodeResult run_episode(const TrackSpec& track, const Policy& policy,
                          const RunConfig& config, int max_steps,
                          std::optional<VehicleState> start = std::nullopt,
                          const EpisodeHooks& hooks = {});

// Tab-separated: step, x, y, heading, action, deviation.
void write_trajectory_log(std::ostream& out,
                          const std::vector<StepRecord>& log);
std::vector<StepRecord> read_trajectory_log(std::istream& in);

}  // namespace pml::sim
