#include "pml/worldmodel/unet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "pml/core/rng.hpp"

namespace pml::wm {

using nn::Tensor;

void NetSpec::validate() const {
  if (encoder_filters.empty()) {
    throw std::invalid_argument("NetSpec: need at least one encoder stage");
  }
  if (encoder_filters.size() != decoder_filters.size()) {
    throw std::invalid_argument("NetSpec: encoder/decoder stage counts differ");
  }
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument("NetSpec: kernel must be odd");
  }
  if (image_size < 2 || image_size % (1 << stages()) != 0) {
    throw std::invalid_argument(
        "NetSpec: image_size must be divisible by 2^stages");
  }
  for (int f : encoder_filters) {
    if (f < 1) throw std::invalid_argument("NetSpec: filters must be >= 1");
  }
  for (int f : decoder_filters) {
    if (f < 1) throw std::invalid_argument("NetSpec: filters must be >= 1");
  }
  for (int u : action_units) {
    if (u < 1) throw std::invalid_argument("NetSpec: units must be >= 1");
  }
}

std::vector<std::int32_t> NetSpec::encode() const {
  std::vector<std::int32_t> out{image_size, kernel};
  for (const auto* list : {&encoder_filters, &action_units, &decoder_filters}) {
    out.push_back(static_cast<std::int32_t>(list->size()));
    out.insert(out.end(), list->begin(), list->end());
  }
  return out;
}

NetSpec NetSpec::decode(std::span<const std::int32_t> f) {
  std::size_t pos = 0;
  auto next = [&]() -> std::int32_t {
    if (pos >= f.size()) throw std::runtime_error("NetSpec: truncated descriptor");
    return f[pos++];
  };
  NetSpec spec;
  spec.image_size = next();
  spec.kernel = next();
  for (auto* list : {&spec.encoder_filters, &spec.action_units,
                     &spec.decoder_filters}) {
    list->clear();
    const std::int32_t n = next();
    for (std::int32_t i = 0; i < n; ++i) list->push_back(next());
  }
  spec.validate();
  return spec;
}

namespace {

void add_into(Tensor& acc, const Tensor& g) {
  if (acc.size() == 0) {
    acc = g;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

}  // namespace

ForwardNet::ForwardNet(NetSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  const int s = spec_.stages();
  const int k = spec_.kernel;
  const int pad = (k - 1) / 2;

  int channels = 1;
  for (int i = 0; i < s; ++i) {
    encoders_.push_back(std::make_unique<nn::Conv2d>(
        "enc" + std::to_string(i), channels, spec_.encoder_filters[i], k, 2,
        pad, rng));
    channels = spec_.encoder_filters[i];
  }
  encoder_acts_.resize(s);

  int features = 1;
  std::vector<int> units = spec_.action_units;
  const int area = spec_.bottleneck_size() * spec_.bottleneck_size();
  units.push_back(area);
  for (std::size_t j = 0; j < units.size(); ++j) {
    action_dense_.push_back(std::make_unique<nn::Dense>(
        "act" + std::to_string(j), features, units[j], rng));
    features = units[j];
  }
  action_acts_.resize(units.size());

  bottleneck_channels_ = spec_.encoder_filters.back();
  channels = bottleneck_channels_ + 1;
  for (int j = 0; j < s; ++j) {
    const int out = spec_.decoder_filters[j];
    decoders_.push_back(std::make_unique<nn::ConvTranspose2d>(
        "dec" + std::to_string(j), channels, out, k, 2, pad, 1, rng));
    decoder_out_channels_.push_back(out);
    const int skip = j < s - 1 ? spec_.encoder_filters[s - 2 - j] : 1;
    channels = out + skip;
  }
  decoder_acts_.resize(s);
  head_ = std::make_unique<nn::Conv2d>("head", channels, 1, k, 1, pad, rng);
}

Tensor ForwardNet::forward(const Tensor& obs, const Tensor& actions,
                           const nn::Context& ctx) {
  const int size = spec_.image_size;
  if (obs.rank() != 4 || obs.dim(1) != 1 || obs.dim(2) != size ||
      obs.dim(3) != size) {
    throw std::invalid_argument("ForwardNet: expected (N, 1, " +
                                std::to_string(size) + ", " +
                                std::to_string(size) + ") input, got " +
                                nn::shape_string(obs.shape()));
  }
  if (actions.rank() != 2 || actions.dim(0) != obs.dim(0) || actions.dim(1) != 1) {
    throw std::invalid_argument("ForwardNet: actions must be (N, 1)");
  }
  const int n = obs.dim(0);
  const int s = spec_.stages();

  std::vector<Tensor> skips;
  Tensor h = obs;
  for (int i = 0; i < s; ++i) {
    h = encoder_acts_[i].forward(encoders_[i]->forward(h, ctx), ctx);
    skips.push_back(h);
  }

  Tensor a = actions;
  for (std::size_t j = 0; j < action_dense_.size(); ++j) {
    a = action_acts_[j].forward(action_dense_[j]->forward(a, ctx), ctx);
  }
  const int b = spec_.bottleneck_size();
  Tensor z = nn::concat_channels(skips.back(), a.reshaped({n, 1, b, b}));

  for (int j = 0; j < s; ++j) {
    const Tensor d = decoder_acts_[j].forward(decoders_[j]->forward(z, ctx), ctx);
    z = nn::concat_channels(d, j < s - 1 ? skips[s - 2 - j] : obs);
  }
  return head_act_.forward(head_->forward(z, ctx), ctx);
}

ForwardNet::InputGrads ForwardNet::backward(const Tensor& grad_out) {
  const int s = spec_.stages();
  InputGrads grads;
  std::vector<Tensor> skip_grads(s);

  Tensor g = head_->backward(head_act_.backward(grad_out));
  for (int j = s - 1; j >= 0; --j) {
    Tensor gd, gskip;
    nn::split_channels(g, decoder_out_channels_[j], gd, gskip);
    add_into(j < s - 1 ? skip_grads[s - 2 - j] : grads.obs, gskip);
    g = decoders_[j]->backward(decoder_acts_[j].backward(gd));
  }

  Tensor genc, gmap;
  nn::split_channels(g, bottleneck_channels_, genc, gmap);
  add_into(skip_grads[s - 1], genc);

  Tensor ga = gmap.reshaped({gmap.dim(0), static_cast<int>(gmap.sample_size())});
  for (int j = static_cast<int>(action_dense_.size()) - 1; j >= 0; --j) {
    ga = action_dense_[j]->backward(action_acts_[j].backward(ga));
  }
  grads.actions = ga;

  for (int i = s - 1; i >= 0; --i) {
    Tensor gi = encoders_[i]->backward(encoder_acts_[i].backward(skip_grads[i]));
    add_into(i > 0 ? skip_grads[i - 1] : grads.obs, gi);
  }
  return grads;
}

std::vector<nn::Parameter*> ForwardNet::parameters() {
  std::vector<nn::Parameter*> out;
  auto take = [&](nn::Layer& layer) {
    for (nn::Parameter* p : layer.parameters()) out.push_back(p);
  };
  for (auto& l : encoders_) take(*l);
  for (auto& l : action_dense_) take(*l);
  for (auto& l : decoders_) take(*l);
  take(*head_);
  return out;
}

nn::ParamStore ForwardNet::params() { return nn::snapshot(parameters(), {}); }

void ForwardNet::load(const nn::ParamStore& store) {
  nn::restore(store, parameters(), {});
}

Tensor images_to_tensor(std::span<const GrayImage> images) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor: empty batch");
  const int size = images.front().width();
  Tensor t({static_cast<int>(images.size()), 1, size, size});
  std::size_t k = 0;
  for (const GrayImage& img : images) {
    if (img.width() != size) {
      throw std::invalid_argument("images_to_tensor: mixed image sizes");
    }
    for (double v : img.pixels()) t[k++] = v;
  }
  return t;
}

Tensor actions_to_tensor(std::span<const SteeringAction> actions) {
  Tensor t({static_cast<int>(actions.size()), 1});
  for (std::size_t i = 0; i < actions.size(); ++i) t[i] = actions[i].value();
  return t;
}

std::vector<GrayImage> tensor_to_images(const Tensor& t) {
  const int n = t.dim(0);
  const int size = t.dim(2);
  std::vector<GrayImage> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double* p = t.data() + i * t.sample_size();
    std::vector<double> px(p, p + t.sample_size());
    for (double v : px) {
      if (!std::isfinite(v)) {
        throw std::runtime_error(
            "forward model produced a non-finite activation; parameters "
            "have diverged");
      }
    }
    out.emplace_back(size, size, std::move(px));
  }
  return out;
}

GrayImage net_predict(const nn::ParamStore& params, const NetSpec& spec,
                      const GrayImage& obs, SteeringAction action) {
  return net_rollout(params, spec, obs, action, 1);
}

GrayImage net_rollout(const nn::ParamStore& params, const NetSpec& spec,
                      const GrayImage& obs, SteeringAction action,
                      int horizon) {
  NetForwardModel model(params, spec);
  return model.predict(obs, action, horizon);
}

NetForwardModel::NetForwardModel(const nn::ParamStore& params,
                                 const NetSpec& spec)
    : net_(spec, 0) {
  net_.load(params);
}

GrayImage NetForwardModel::predict(const GrayImage& obs, SteeringAction action,
                                   int horizon) {
  return predict_all(obs, {action}, horizon).front();
}

std::vector<GrayImage> NetForwardModel::predict_all(
    const GrayImage& obs, const std::vector<SteeringAction>& actions,
    int horizon) {
  if (horizon < 1) throw std::invalid_argument("rollout horizon must be >= 1");
  if (actions.empty()) return {};
  const std::vector<GrayImage> start(actions.size(), obs);
  Tensor x = images_to_tensor(start);
  const Tensor a = actions_to_tensor(actions);
  const nn::Context inference;
  for (int step = 0; step < horizon; ++step) x = net_.forward(x, a, inference);
  return tensor_to_images(x);
}

nn::ParamFile make_param_file(const NetSpec& spec, const nn::ParamStore& store) {
  return nn::ParamFile{nn::NetKind::forward_unet, spec.encode(), store};
}

std::pair<NetSpec, nn::ParamStore> read_forward_params(
    const nn::ParamFile& file) {
  if (file.kind != nn::NetKind::forward_unet) {
    throw std::runtime_error("param file does not hold a forward model");
  }
  return {NetSpec::decode(file.descriptor), file.store};
}

}  // namespace pml::wm
