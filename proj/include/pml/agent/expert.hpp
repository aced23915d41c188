#pragma once

#include "pml/core/run_config.hpp"
#include "pml/core/vehicle_state.hpp"
#include "pml/simworld/track.hpp"

namespace pml::agent {

struct ExpertParams {
  double lookahead = 5.0;      // m along the centerline
  double max_offset = 10.0;    // beyond this the expert refuses to drive
};

// Pure-pursuit steering toward the centerline point `lookahead` meters ahead
// of the vehicle's projection. Reads the hidden state, so it is only usable
// for data collection and as a reference driver. Throws std::runtime_error
// when the vehicle is too far from the road to recover.
double scripted_expert(const VehicleState& state, const sim::TrackSpec& track,
                       const RunConfig& config, const ExpertParams& params = {});

}  // namespace pml::agent
