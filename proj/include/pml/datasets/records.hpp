#pragma once

#include "pml/core/gray_image.hpp"
#include "pml/core/steering.hpp"

namespace pml::data {

// One (o_t, a_t, o_t+1) transition of the world-model corpus.
struct TransitionSample {
  GrayImage obs;
  SteeringAction action;
  GrayImage next_obs;

  bool operator==(const TransitionSample&) const = default;
};

// An image-steering pair for behavioral cloning.
struct LabeledFrame {
  GrayImage obs;
  SteeringAction action;

  bool operator==(const LabeledFrame&) const = default;
};

}  // namespace pml::data
