#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "pml/core/gray_image.hpp"
#include "pml/datasets/records.hpp"
#include "pml/nn/layers.hpp"
#include "pml/nn/param_store.hpp"

namespace pml::agent {

// Convolutional regressor from a single frame to a steering command.
struct BcNetSpec {
  int image_size = 64;
  std::vector<int> conv_filters{32, 64, 128, 256};
  std::vector<int> conv_kernels{5, 3, 3, 3};
  std::vector<int> dense_units{512, 128, 64};
  double dropout = 0.2;

  void validate() const;
  int stages() const { return static_cast<int>(conv_filters.size()); }
  int feature_size() const { return image_size >> stages(); }
  std::vector<std::int32_t> encode() const;
  static BcNetSpec decode(std::span<const std::int32_t> fields);
};

class BcNet {
 public:
  BcNet(BcNetSpec spec, std::uint64_t seed);

  const BcNetSpec& spec() const { return spec_; }
  // (N, 1, S, S) -> (N, 1), unbounded.
  nn::Tensor forward(const nn::Tensor& obs, const nn::Context& ctx);
  nn::Tensor backward(const nn::Tensor& grad_out);
  std::vector<nn::Parameter*> parameters() { return seq_.parameters(); }
  std::vector<nn::Buffer*> buffers() { return seq_.buffers(); }
  nn::ParamStore params();
  void load(const nn::ParamStore& store);

 private:
  BcNetSpec spec_;
  nn::Sequential seq_;
};

// Inference-mode prediction clamped to [-1, 1].
double bc_predict(BcNet& net, const GrayImage& obs);

struct BcTrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 10;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;

  void validate() const;
};

struct BcEpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mae = 0.0;  // mean |clamped prediction - label|
};

struct BcTrainResult {
  nn::ParamStore params;
  std::vector<BcEpochMetrics> report;
};

BcTrainResult bc_train(std::span<const data::LabeledFrame> dataset,
                       const BcNetSpec& spec, const BcTrainConfig& config,
                       std::ostream* progress = nullptr);

// Mean absolute error of clamped predictions.
double bc_mae(BcNet& net, std::span<const data::LabeledFrame> frames);

void write_bc_metrics(std::ostream& out, const std::vector<BcEpochMetrics>& report);

nn::ParamFile make_bc_param_file(const BcNetSpec& spec, const nn::ParamStore& store);
std::pair<BcNetSpec, nn::ParamStore> read_bc_params(const nn::ParamFile& file);

// Policy functor; one instance per thread.
class BcAgent {
 public:
  BcAgent(const BcNetSpec& spec, const nn::ParamStore& params);
  double operator()(const GrayImage& obs) { return bc_predict(net_, obs); }

 private:
  BcNet net_;
};

}  // namespace pml::agent
