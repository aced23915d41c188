#include "pml/worldmodel/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "pml/core/rng.hpp"
#include "pml/vision/ssim.hpp"

namespace pml::wm {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size < 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs < 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("TrainConfig: validation_fraction not in [0,1)");
  }
}

namespace {

nn::AdamConfig adam_config(const TrainConfig& c) {
  nn::AdamConfig a;
  a.learning_rate = c.learning_rate;
  return a;
}

struct BatchTensors {
  nn::Tensor obs, actions, target;
};

BatchTensors pack(std::span<const data::TransitionSample> batch) {
  std::vector<GrayImage> obs, next;
  std::vector<SteeringAction> actions;
  for (const auto& s : batch) {
    obs.push_back(s.obs);
    next.push_back(s.next_obs);
    actions.push_back(s.action);
  }
  return {images_to_tensor(obs), actions_to_tensor(actions),
          images_to_tensor(next)};
}

}  // namespace

ForwardTrainer::ForwardTrainer(const NetSpec& spec, const TrainConfig& config)
    : config_(config),
      net_(spec, config.seed),
      optimizer_(net_.parameters(), adam_config(config)) {
  config_.validate();
}

ForwardTrainer::ForwardTrainer(const NetSpec& spec, const nn::ParamStore& init,
                               const TrainConfig& config)
    : ForwardTrainer(spec, config) {
  net_.load(init);
}

double ForwardTrainer::step(std::span<const data::TransitionSample> batch) {
  if (batch.empty()) throw std::invalid_argument("backprop_step: empty batch");
  const BatchTensors t = pack(batch);
  const nn::Context ctx{true, nullptr};
  const nn::Tensor pred = net_.forward(t.obs, t.actions, ctx);
  const nn::LossResult loss = nn::compute_loss(config_.loss, pred, t.target);
  if (!std::isfinite(loss.value)) {
    throw DivergedError("non-finite training loss");
  }
  optimizer_.zero_grad();
  net_.backward(loss.grad);
  if (!nn::gradients_finite(net_.parameters())) {
    throw DivergedError("non-finite gradient");
  }
  optimizer_.step();
  return loss.value;
}

std::pair<nn::ParamStore, double> backprop_step(
    const nn::ParamStore& params, const NetSpec& spec,
    std::span<const data::TransitionSample> batch, const TrainConfig& config) {
  ForwardTrainer trainer(spec, params, config);
  const double loss = trainer.step(batch);
  return {trainer.params(), loss};
}

double mean_prediction_ssim(const nn::ParamStore& params, const NetSpec& spec,
                            std::span<const data::TransitionSample> samples) {
  if (samples.empty()) return 0.0;
  NetForwardModel model(params, spec);
  double total = 0.0;
  for (const auto& s : samples) {
    total += vision::ssim(model.predict(s.obs, s.action, 1), s.next_obs);
  }
  return total / static_cast<double>(samples.size());
}

TrainResult train_forward_model(std::span<const data::TransitionSample> dataset,
                                const NetSpec& spec, const TrainConfig& config,
                                std::ostream* progress) {
  if (dataset.empty()) {
    throw std::invalid_argument("train_forward_model: empty dataset");
  }
  config.validate();
  for (const auto& s : dataset) {
    if (s.obs.width() != spec.image_size) {
      throw std::invalid_argument(
          "train_forward_model: sample size does not match the network");
    }
  }

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(dataset.size())));
  std::vector<data::TransitionSample> val;
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(dataset[order[i]]);
  std::vector<std::size_t> train(order.begin() + static_cast<long>(n_val), order.end());
  if (train.empty()) {
    throw std::invalid_argument("train_forward_model: no training samples left");
  }

  ForwardTrainer trainer(spec, config);
  TrainResult result;
  std::vector<data::TransitionSample> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(train));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
      const std::size_t end =
          std::min(train.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[train[i]]);
      loss_sum += trainer.step(batch) * static_cast<double>(batch.size());
      seen += batch.size();
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(seen);
    const nn::ParamStore params = trainer.params();
    if (!val.empty()) {
      NetForwardModel model(params, spec);
      double vloss = 0.0;
      double vssim = 0.0;
      for (const auto& s : val) {
        const GrayImage pred = model.predict(s.obs, s.action, 1);
        const GrayImage target[] = {s.next_obs};
        const GrayImage predicted[] = {pred};
        vloss += nn::compute_loss(config.loss, images_to_tensor(predicted),
                                  images_to_tensor(target)).value;
        vssim += vision::ssim(pred, s.next_obs);
      }
      m.val_loss = vloss / static_cast<double>(val.size());
      m.val_ssim = vssim / static_cast<double>(val.size());
    }
    result.report.push_back(m);
    if (progress != nullptr) {
      *progress << fmt::format("epoch {:3d}  train {:.6f}  val {:.6f}  ssim {:.4f}\n",
                               m.epoch, m.train_loss, m.val_loss, m.val_ssim);
      progress->flush();
    }
  }
  result.params = trainer.params();
  return result;
}

void write_metrics(std::ostream& out, const std::vector<EpochMetrics>& report) {
  out << "epoch\ttrain_loss\tval_loss\tval_ssim\n";
  for (const auto& m : report) {
    out << fmt::format("{}\t{:.9g}\t{:.9g}\t{:.9g}\n", m.epoch, m.train_loss,
                       m.val_loss, m.val_ssim);
  }
}

}  // namespace pml::wm
