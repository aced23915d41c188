#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "pml/datasets/records.hpp"
#include "pml/nn/adam.hpp"
#include "pml/nn/loss.hpp"
#include "pml/worldmodel/unet.hpp"

namespace pml::wm {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 128;
  int epochs = 10;
  nn::LossKind loss = nn::LossKind::mse;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;

  void validate() const;
};

// Raised when a batch produces a non-finite loss or gradient; the parameters
// are left untouched.
struct DivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Owns a network and its optimizer state.
class ForwardTrainer {
 public:
  ForwardTrainer(const NetSpec& spec, const TrainConfig& config);
  ForwardTrainer(const NetSpec& spec, const nn::ParamStore& init,
                 const TrainConfig& config);

  // One optimizer update on the batch; returns the batch loss measured
  // before the update.
  double step(std::span<const data::TransitionSample> batch);

  ForwardNet& net() { return net_; }
  nn::ParamStore params() { return net_.params(); }

 private:
  TrainConfig config_;
  ForwardNet net_;
  nn::Adam optimizer_;
};

// Stateless form: fresh optimizer state, one update.
std::pair<nn::ParamStore, double> backprop_step(
    const nn::ParamStore& params, const NetSpec& spec,
    std::span<const data::TransitionSample> batch, const TrainConfig& config);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_ssim = 0.0;  // mean SSIM of 1-step predictions vs o_t+1
};

struct TrainResult {
  nn::ParamStore params;
  std::vector<EpochMetrics> report;
};

// Seeded split into training / validation, then shuffled mini-batch epochs.
// Throws std::invalid_argument on an empty dataset.
TrainResult train_forward_model(std::span<const data::TransitionSample> dataset,
                                const NetSpec& spec, const TrainConfig& config,
                                std::ostream* progress = nullptr);

// Tab-separated, header `epoch train_loss val_loss val_ssim`.
void write_metrics(std::ostream& out, const std::vector<EpochMetrics>& report);

// Mean SSIM of 1-step predictions against the recorded next observations.
double mean_prediction_ssim(const nn::ParamStore& params, const NetSpec& spec,
                            std::span<const data::TransitionSample> samples);

}  // namespace pml::wm
