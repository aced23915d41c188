#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pml/core/run_config.hpp"
#include "pml/datasets/records.hpp"
#include "pml/simworld/track.hpp"

namespace pml::data {

// Steering schedule for data collection: the expert command plus a triangle
// wave of the given amplitude. When the vehicle drifts past `recenter_bound`
// the wave is suspended and the expert alone drives until the vehicle is
// back within `release_bound` and roughly aligned.
struct ZigzagParams {
  double amplitude = 1.0;
  int period = 20;                // steps per triangle cycle
  double recenter_bound = 0.8;    // m
  double release_bound = 0.2;     // m
  double release_heading = 0.05;  // rad
  double reset_lateral = 0.3;     // max |lateral offset| of a reset pose, m
  double reset_heading = 0.05;    // max |heading offset| of a reset pose, rad

  void validate() const;
};

// Triangle wave with period 1: -1 at 0, +1 at 0.5.
double triangle_wave(double phase);

struct CollectStats {
  int samples = 0;
  int resets = 0;          // off-road or end-of-track restarts
  int recenter_steps = 0;  // steps driven by the expert alone
};

// Records every (o_t, a_t, o_t+1) while driving the schedule. A run that
// leaves the lane or reaches the goal restarts from a seeded random pose on a
// seeded random track of `tracks`.
std::vector<TransitionSample> collect_zigzag(std::span<const sim::TrackSpec> tracks,
                                             const RunConfig& config, int n_steps,
                                             const ZigzagParams& params,
                                             std::uint64_t seed,
                                             CollectStats* stats = nullptr);

// Same driving loop, but each frame is labeled with the expert's command at
// that state rather than the applied one: demonstrations that include
// recovery from perturbed states.
std::vector<LabeledFrame> collect_expert(std::span<const sim::TrackSpec> tracks,
                                         const RunConfig& config, int n_steps,
                                         const ZigzagParams& perturbation,
                                         std::uint64_t seed,
                                         CollectStats* stats = nullptr);

// Default mixed suite for collection: every task in both turn directions on
// the 4.0 m and 3.5 m single-lane roads.
std::vector<sim::TrackSpec> collection_tracks(const RunConfig& config);

}  // namespace pml::data
