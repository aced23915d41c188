#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pml/nn/layers.hpp"
#include "pml/nn/param_store.hpp"
#include "pml/worldmodel/forward_model.hpp"

namespace pml::wm {

// Action-conditioned U-Net.
//
//   encoder: stride-2 conv + relu per stage, each halving the resolution
//   action:  dense + elu stages ending in one unit per bottleneck pixel,
//            reshaped to a 1-channel map and concatenated at the bottleneck
//   decoder: stride-2 transposed conv + relu per stage, each output
//            concatenated with the encoder feature map of equal resolution
//            (the last stage with the input image)
//   output:  stride-1 conv to one channel + sigmoid
struct NetSpec {
  int image_size = 64;
  int kernel = 3;
  std::vector<int> encoder_filters = {16, 32, 64};
  std::vector<int> action_units = {16};
  std::vector<int> decoder_filters = {32, 16, 8};

  int stages() const { return static_cast<int>(encoder_filters.size()); }
  int bottleneck_size() const { return image_size >> stages(); }

  // Throws std::invalid_argument when the stage counts differ or the image
  // does not halve cleanly through every stage.
  void validate() const;

  std::vector<std::int32_t> encode() const;
  static NetSpec decode(std::span<const std::int32_t> fields);

  bool operator==(const NetSpec&) const = default;
};

class ForwardNet {
 public:
  ForwardNet(NetSpec spec, std::uint64_t seed);

  const NetSpec& spec() const { return spec_; }

  // obs (N, 1, S, S), actions (N, 1) -> prediction (N, 1, S, S).
  nn::Tensor forward(const nn::Tensor& obs, const nn::Tensor& actions,
                     const nn::Context& ctx);

  struct InputGrads {
    nn::Tensor obs;
    nn::Tensor actions;
  };
  // Accumulates parameter gradients for the last forward call.
  InputGrads backward(const nn::Tensor& grad_out);

  std::vector<nn::Parameter*> parameters();
  nn::ParamStore params();
  void load(const nn::ParamStore& store);

 private:
  NetSpec spec_;
  std::vector<std::unique_ptr<nn::Conv2d>> encoders_;
  std::vector<nn::Relu> encoder_acts_;
  std::vector<std::unique_ptr<nn::Dense>> action_dense_;
  std::vector<nn::Elu> action_acts_;
  std::vector<std::unique_ptr<nn::ConvTranspose2d>> decoders_;
  std::vector<nn::Relu> decoder_acts_;
  std::unique_ptr<nn::Conv2d> head_;
  nn::Sigmoid head_act_;
  // Channel counts of the first operand of each decoder-side concatenation.
  int bottleneck_channels_ = 0;
  std::vector<int> decoder_out_channels_;
};

// Packs images / actions into batch tensors.
nn::Tensor images_to_tensor(std::span<const GrayImage> images);
nn::Tensor actions_to_tensor(std::span<const SteeringAction> actions);
// Throws std::runtime_error if any value is non-finite (diverged parameters).
std::vector<GrayImage> tensor_to_images(const nn::Tensor& t);

// Deterministic single-step inference from a parameter set.
GrayImage net_predict(const nn::ParamStore& params, const NetSpec& spec,
                      const GrayImage& obs, SteeringAction action);

// net_predict applied `horizon` times, each prediction fed back as the next
// observation.
GrayImage net_rollout(const nn::ParamStore& params, const NetSpec& spec,
                      const GrayImage& obs, SteeringAction action,
                      int horizon);

// ForwardModel over a trained network; batches all candidate actions through
// one forward pass per rollout step. Not thread-safe: give each worker its
// own instance built from the shared ParamStore.
class NetForwardModel : public ForwardModel {
 public:
  NetForwardModel(const nn::ParamStore& params, const NetSpec& spec);

  GrayImage predict(const GrayImage& obs, SteeringAction action,
                    int horizon) override;
  std::vector<GrayImage> predict_all(const GrayImage& obs,
                                     const std::vector<SteeringAction>& actions,
                                     int horizon) override;

 private:
  ForwardNet net_;
};

nn::ParamFile make_param_file(const NetSpec& spec, const nn::ParamStore& store);
// Throws std::runtime_error when the file holds a different network kind.
std::pair<NetSpec, nn::ParamStore> read_forward_params(const nn::ParamFile& file);

}  // namespace pml::wm
