#pragma once

#include <string>
#include <vector>

#include "pml/core/gray_image.hpp"
#include "pml/core/run_config.hpp"
#include "pml/core/steering.hpp"
#include "pml/vision/ssim.hpp"
#include "pml/worldmodel/forward_model.hpp"

namespace pml::agent {

// The goal observation o_pref and the lane / road family it depicts.
struct Preference {
  GrayImage image;
  std::string label;
};

struct ActionScore {
  SteeringAction action;
  GrayImage predicted;
  double dissimilarity = 0.0;  // 1 - SSIM(predicted, preference)
};

struct Selection {
  SteeringAction action;
  std::vector<ActionScore> scores;  // one per grid entry, grid order
};

// Dissimilarities within this of the minimum count as tied.
inline constexpr double kTieTolerance = 1e-12;

// Index of the winning candidate: lowest dissimilarity; ties go to the
// smallest |action|, then to the negative action.
std::size_t pick_action(const std::vector<SteeringAction>& actions,
                        const std::vector<double>& dissimilarities);

// Covert-action sweep: imagines the observation `horizon` steps ahead for
// every candidate and returns the one whose prediction is closest to the
// preference. Only the goal-alignment part of expected free energy is scored.
// Model exceptions are rethrown as sim::PolicyFault.
Selection select_action(const GrayImage& obs, wm::ForwardModel& model,
                        const Preference& pref,
                        const std::vector<SteeringAction>& grid, int horizon,
                        const vision::SsimParams& ssim_params = {});

// Observation -> steering policy over a fixed model and preference.
class AifAgent {
 public:
  AifAgent(wm::ForwardModel& model, Preference pref,
           std::vector<SteeringAction> grid, int horizon,
           vision::SsimParams ssim_params = {});

  double operator()(const GrayImage& obs);

  const Selection& last_selection() const { return last_; }

 private:
  wm::ForwardModel* model_;
  Preference pref_;
  std::vector<SteeringAction> grid_;
  int horizon_;
  vision::SsimParams ssim_params_;
  Selection last_;
};

// Lane-width / lane-count presets standing in for the evaluation towns.
struct RoadFamily {
  std::string name;
  double lane_width = 4.0;
  int lane_count = 1;
};

const std::vector<RoadFamily>& road_families();
const RoadFamily& road_family(const std::string& name);

// Renders the canonical view (lane-centered, aligned) of a straight road of
// the family's geometry. Throws std::invalid_argument for a bad lane index.
Preference make_preference(const RoadFamily& family, int lane_index,
                           const RunConfig& config);

}  // namespace pml::agent
