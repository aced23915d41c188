#include "pml/agent/bc_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "pml/core/rng.hpp"
#include "pml/nn/adam.hpp"
#include "pml/nn/loss.hpp"

namespace pml::agent {

using nn::Tensor;

void BcNetSpec::validate() const {
  if (conv_filters.empty() || conv_filters.size() != conv_kernels.size()) {
    throw std::invalid_argument("BcNetSpec: filters and kernels must pair up");
  }
  for (int k : conv_kernels) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("BcNetSpec: kernel must be odd");
  }
  for (int f : conv_filters) {
    if (f < 1) throw std::invalid_argument("BcNetSpec: filters must be >= 1");
  }
  for (int u : dense_units) {
    if (u < 1) throw std::invalid_argument("BcNetSpec: units must be >= 1");
  }
  if (image_size < 2 || image_size % (1 << stages()) != 0) {
    throw std::invalid_argument("BcNetSpec: image_size must be divisible by 2^stages");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("BcNetSpec: dropout not in [0, 1)");
  }
}

std::vector<std::int32_t> BcNetSpec::encode() const {
  std::vector<std::int32_t> out{image_size,
                                static_cast<std::int32_t>(std::lround(dropout * 1e6))};
  for (const auto* list : {&conv_filters, &conv_kernels, &dense_units}) {
    out.push_back(static_cast<std::int32_t>(list->size()));
    out.insert(out.end(), list->begin(), list->end());
  }
  return out;
}

BcNetSpec BcNetSpec::decode(std::span<const std::int32_t> f) {
  std::size_t pos = 0;
  auto next = [&]() -> std::int32_t {
    if (pos >= f.size()) throw std::runtime_error("BcNetSpec: truncated descriptor");
    return f[pos++];
  };
  BcNetSpec spec;
  spec.image_size = next();
  spec.dropout = next() / 1e6;
  for (auto* list : {&spec.conv_filters, &spec.conv_kernels, &spec.dense_units}) {
    list->clear();
    const std::int32_t n = next();
    for (std::int32_t i = 0; i < n; ++i) list->push_back(next());
  }
  spec.validate();
  return spec;
}

BcNet::BcNet(BcNetSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  int channels = 1;
  for (int i = 0; i < spec_.stages(); ++i) {
    const std::string name = "conv" + std::to_string(i);
    const int k = spec_.conv_kernels[i];
    seq_.add(std::make_unique<nn::Conv2d>(name, channels, spec_.conv_filters[i], k,
                                          2, (k - 1) / 2, rng));
    seq_.add(std::make_unique<nn::BatchNorm2d>(name + ".bn", spec_.conv_filters[i]));
    seq_.add(std::make_unique<nn::Relu>());
    if (i == 2 && spec_.dropout > 0.0) {
      seq_.add(std::make_unique<nn::Dropout>(spec_.dropout));
    }
    channels = spec_.conv_filters[i];
  }
  seq_.add(std::make_unique<nn::Flatten>());
  int features = channels * spec_.feature_size() * spec_.feature_size();
  for (std::size_t j = 0; j < spec_.dense_units.size(); ++j) {
    seq_.add(std::make_unique<nn::Dense>("fc" + std::to_string(j), features,
                                         spec_.dense_units[j], rng));
    seq_.add(std::make_unique<nn::Relu>());
    if (j < 2 && spec_.dropout > 0.0) {
      seq_.add(std::make_unique<nn::Dropout>(spec_.dropout));
    }
    features = spec_.dense_units[j];
  }
  seq_.add(std::make_unique<nn::Dense>("out", features, 1, rng));
}

Tensor BcNet::forward(const Tensor& obs, const nn::Context& ctx) {
  const int s = spec_.image_size;
  if (obs.rank() != 4 || obs.dim(1) != 1 || obs.dim(2) != s || obs.dim(3) != s) {
    throw std::invalid_argument("BcNet: unexpected input shape " +
                                nn::shape_string(obs.shape()));
  }
  return seq_.forward(obs, ctx);
}

Tensor BcNet::backward(const Tensor& grad_out) { return seq_.backward(grad_out); }

nn::ParamStore BcNet::params() { return nn::snapshot(parameters(), buffers()); }

void BcNet::load(const nn::ParamStore& store) {
  nn::restore(store, parameters(), buffers());
}

namespace {

Tensor frames_to_tensor(std::span<const data::LabeledFrame> frames,
                        std::span<const std::size_t> index, Tensor* labels) {
  const int size = frames[index.front()].obs.width();
  const int n = static_cast<int>(index.size());
  Tensor x({n, 1, size, size});
  if (labels != nullptr) *labels = Tensor({n, 1});
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    const auto& f = frames[index[i]];
    if (f.obs.width() != size) throw std::invalid_argument("mixed frame sizes");
    for (double v : f.obs.pixels()) x[k++] = v;
    if (labels != nullptr) (*labels)[i] = f.action.value();
  }
  return x;
}

}  // namespace

double bc_predict(BcNet& net, const GrayImage& obs) {
  const data::LabeledFrame frame{obs, SteeringAction(0.0)};
  const std::size_t idx = 0;
  const Tensor y = net.forward(frames_to_tensor({&frame, 1}, {&idx, 1}, nullptr),
                               nn::Context{});
  if (!std::isfinite(y[0])) throw std::runtime_error("BC network produced a non-finite output");
  return std::clamp(y[0], -1.0, 1.0);
}

double bc_mae(BcNet& net, std::span<const data::LabeledFrame> frames) {
  if (frames.empty()) return 0.0;
  constexpr std::size_t kChunk = 64;
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < frames.size(); start += kChunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(frames.size(), start + kChunk); ++i) {
      idx.push_back(i);
    }
    Tensor labels;
    const Tensor y = net.forward(frames_to_tensor(frames, idx, &labels), nn::Context{});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      total += std::fabs(std::clamp(y[i], -1.0, 1.0) - labels[i]);
    }
  }
  return total / static_cast<double>(frames.size());
}

void BcTrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("BcTrainConfig: learning_rate < 0");
  if (batch_size < 1) throw std::invalid_argument("BcTrainConfig: batch_size < 1");
  if (epochs < 0) throw std::invalid_argument("BcTrainConfig: epochs < 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("BcTrainConfig: validation_fraction not in [0,1)");
  }
}

BcTrainResult bc_train(std::span<const data::LabeledFrame> dataset,
                       const BcNetSpec& spec, const BcTrainConfig& config,
                       std::ostream* progress) {
  if (dataset.empty()) throw std::invalid_argument("bc_train: empty dataset");
  config.validate();

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(dataset.size())));
  std::vector<data::LabeledFrame> val;
  for (std::size_t i = 0; i < n_val; ++i) val.push_back(dataset[order[i]]);
  std::vector<std::size_t> train(order.begin() + static_cast<long>(n_val), order.end());
  if (train.empty()) throw std::invalid_argument("bc_train: no training samples left");

  BcNet net(spec, config.seed);
  nn::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  nn::Adam adam(net.parameters(), ac);
  Rng dropout_rng = rng.fork();

  BcTrainResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(train));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(train.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> idx(train.data() + start, end - start);
      Tensor labels;
      const Tensor x = frames_to_tensor(dataset, idx, &labels);
      const nn::Context ctx{true, &dropout_rng};
      const Tensor y = net.forward(x, ctx);
      const nn::LossResult loss = nn::compute_loss(nn::LossKind::mse, y, labels);
      if (!std::isfinite(loss.value)) throw std::runtime_error("bc_train: non-finite loss");
      adam.zero_grad();
      net.backward(loss.grad);
      if (!nn::gradients_finite(net.parameters())) {
        throw std::runtime_error("bc_train: non-finite gradient");
      }
      adam.step();
      loss_sum += loss.value * static_cast<double>(idx.size());
    }

    BcEpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(train.size());
    if (!val.empty()) {
      std::vector<std::size_t> all(val.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      double sq = 0.0;
      for (std::size_t start = 0; start < all.size(); start += 64) {
        const std::size_t end = std::min(all.size(), start + 64);
        Tensor labels;
        const Tensor y = net.forward(
            frames_to_tensor(val, {all.data() + start, end - start}, &labels),
            nn::Context{});
        for (std::size_t i = 0; i < end - start; ++i) {
          sq += (y[i] - labels[i]) * (y[i] - labels[i]);
        }
      }
      m.val_loss = sq / static_cast<double>(val.size());
      m.val_mae = bc_mae(net, val);
    }
    result.report.push_back(m);
    if (progress != nullptr) {
      *progress << fmt::format("epoch {:3d}  train {:.6f}  val {:.6f}  mae {:.4f}\n",
                               m.epoch, m.train_loss, m.val_loss, m.val_mae);
      progress->flush();
    }
  }
  result.params = net.params();
  return result;
}

void write_bc_metrics(std::ostream& out, const std::vector<BcEpochMetrics>& report) {
  out << "epoch\ttrain_loss\tval_loss\tval_mae\n";
  for (const auto& m : report) {
    out << fmt::format("{}\t{:.9g}\t{:.9g}\t{:.9g}\n", m.epoch, m.train_loss,
                       m.val_loss, m.val_mae);
  }
}

nn::ParamFile make_bc_param_file(const BcNetSpec& spec, const nn::ParamStore& store) {
  return nn::ParamFile{nn::NetKind::bc_regressor, spec.encode(), store};
}

std::pair<BcNetSpec, nn::ParamStore> read_bc_params(const nn::ParamFile& file) {
  if (file.kind != nn::NetKind::bc_regressor) {
    throw std::runtime_error("param file does not hold a BC regressor");
  }
  return {BcNetSpec::decode(file.descriptor), file.store};
}

BcAgent::BcAgent(const BcNetSpec& spec, const nn::ParamStore& params) : net_(spec, 0) {
  net_.load(params);
}

}  // namespace pml::agent
