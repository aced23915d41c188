#include "pml/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace pml::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Parameter make_param(std::string name, std::vector<int> shape) {
  Tensor value(shape);
  Tensor grad(std::move(shape));
  return Parameter{std::move(name), std::move(value), std::move(grad)};
}

void expect_rank(const Tensor& x, int rank, const char* who) {
  if (x.rank() != rank) {
    throw std::invalid_argument(std::string(who) + ": expected rank " +
                                std::to_string(rank) + " input, got " +
                                shape_string(x.shape()));
  }
}

}  // namespace

void he_uniform(Tensor& weights, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (double& w : weights.values()) w = rng.uniform(-limit, limit);
}

void im2col(const double* image, const ConvGeometry& g, double* cols) {
  const int positions = g.out_height * g.out_width;
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  for (int c = 0; c < g.channels; ++c) {
    const double* src = image + c * plane;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        double* row =
            cols + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) *
                       positions;
        for (int oy = 0; oy < g.out_height; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          double* dst = row + oy * g.out_width;
          if (iy < 0 || iy >= g.height) {
            std::fill_n(dst, g.out_width, 0.0);
            continue;
          }
          for (int ox = 0; ox < g.out_width; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            dst[ox] = (ix >= 0 && ix < g.width) ? src[iy * g.width + ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, const ConvGeometry& g, double* image) {
  const int positions = g.out_height * g.out_width;
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  for (int c = 0; c < g.channels; ++c) {
    double* dst = image + c * plane;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const double* row =
            cols + static_cast<std::size_t>((c * g.kernel + ky) * g.kernel + kx) *
                       positions;
        for (int oy = 0; oy < g.out_height; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.height) continue;
          const double* src = row + oy * g.out_width;
          for (int ox = 0; ox < g.out_width; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.width) dst[iy * g.width + ix] += src[ox];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, int in_channels, int out_channels, int kernel,
               int stride, int pad, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(make_param(name + ".weight",
                         {out_channels, in_channels, kernel, kernel})),
      bias_(make_param(name + ".bias", {out_channels})) {
  he_uniform(weight_.value, in_channels * kernel * kernel, rng);
}

ConvGeometry Conv2d::geometry(const Tensor& x) const {
  expect_rank(x, 4, "Conv2d");
  if (x.dim(1) != in_channels_) {
    throw std::invalid_argument("Conv2d: channel mismatch, got " +
                                shape_string(x.shape()));
  }
  ConvGeometry g{in_channels_, x.dim(2), x.dim(3), kernel_, stride_, pad_, 0, 0};
  g.out_height = output_size(g.height, kernel_, stride_, pad_);
  g.out_width = output_size(g.width, kernel_, stride_, pad_);
  return g;
}

Tensor Conv2d::forward(const Tensor& x, const Context&) {
  const ConvGeometry g = geometry(x);
  const int n = x.dim(0);
  const int k = in_channels_ * kernel_ * kernel_;
  const int p = g.out_height * g.out_width;
  Tensor out({n, out_channels_, g.out_height, g.out_width});
  std::vector<double> cols(static_cast<std::size_t>(k) * p);
  const ConstMatMap w(weight_.value.data(), out_channels_, k);
  const ConstVecMap b(bias_.value.data(), out_channels_);
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + i * x.sample_size(), g, cols.data());
    MatMap o(out.data() + i * out.sample_size(), out_channels_, p);
    o.noalias() = w * ConstMatMap(cols.data(), k, p);
    o.colwise() += b;
  }
  input_ = x;
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const ConvGeometry g = geometry(input_);
  const int n = input_.dim(0);
  const int k = in_channels_ * kernel_ * kernel_;
  const int p = g.out_height * g.out_width;
  Tensor grad_in(input_.shape());
  std::vector<double> cols(static_cast<std::size_t>(k) * p);
  std::vector<double> dcols(static_cast<std::size_t>(k) * p);
  const ConstMatMap w(weight_.value.data(), out_channels_, k);
  MatMap dw(weight_.grad.data(), out_channels_, k);
  for (int i = 0; i < n; ++i) {
    im2col(input_.data() + i * input_.sample_size(), g, cols.data());
    const double* gp = grad_out.data() + i * grad_out.sample_size();
    const ConstMatMap go(gp, out_channels_, p);
    dw.noalias() += go * ConstMatMap(cols.data(), k, p).transpose();
    for (int c = 0; c < out_channels_; ++c) {
      double s = 0.0;
      for (int j = 0; j < p; ++j) s += gp[c * p + j];
      bias_.grad[c] += s;
    }
    MatMap(dcols.data(), k, p).noalias() = w.transpose() * go;
    col2im(dcols.data(), g, grad_in.data() + i * grad_in.sample_size());
  }
  return grad_in;
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::string name, int in_channels,
                                 int out_channels, int kernel, int stride,
                                 int pad, int output_padding, Rng& rng)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      output_padding_(output_padding),
      weight_(make_param(name + ".weight",
                         {in_channels, out_channels, kernel, kernel})),
      bias_(make_param(name + ".bias", {out_channels})) {
  if (output_padding < 0 || output_padding >= stride) {
    throw std::invalid_argument("ConvTranspose2d: need 0 <= output_padding < stride");
  }
  he_uniform(weight_.value, in_channels * kernel * kernel, rng);
}

// The im2col geometry of the equivalent forward convolution: the layer
// output is the "image" and the layer input is the convolution grid.
ConvGeometry ConvTranspose2d::geometry(const Tensor& x) const {
  expect_rank(x, 4, "ConvTranspose2d");
  if (x.dim(1) != in_channels_) {
    throw std::invalid_argument("ConvTranspose2d: channel mismatch, got " +
                                shape_string(x.shape()));
  }
  ConvGeometry g;
  g.channels = out_channels_;
  g.height = output_size(x.dim(2), kernel_, stride_, pad_, output_padding_);
  g.width = output_size(x.dim(3), kernel_, stride_, pad_, output_padding_);
  g.kernel = kernel_;
  g.stride = stride_;
  g.pad = pad_;
  g.out_height = x.dim(2);
  g.out_width = x.dim(3);
  return g;
}

Tensor ConvTranspose2d::forward(const Tensor& x, const Context&) {
  const ConvGeometry g = geometry(x);
  const int n = x.dim(0);
  const int k = out_channels_ * kernel_ * kernel_;
  const int p = g.out_height * g.out_width;
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  Tensor out({n, out_channels_, g.height, g.width});
  std::vector<double> cols(static_cast<std::size_t>(k) * p);
  const ConstMatMap w(weight_.value.data(), in_channels_, k);
  for (int i = 0; i < n; ++i) {
    const ConstMatMap xi(x.data() + i * x.sample_size(), in_channels_, p);
    MatMap(cols.data(), k, p).noalias() = w.transpose() * xi;
    double* o = out.data() + i * out.sample_size();
    col2im(cols.data(), g, o);
    for (int c = 0; c < out_channels_; ++c) {
      const double b = bias_.value[c];
      for (std::size_t j = 0; j < plane; ++j) o[c * plane + j] += b;
    }
  }
  input_ = x;
  return out;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out) {
  const ConvGeometry g = geometry(input_);
  const int n = input_.dim(0);
  const int k = out_channels_ * kernel_ * kernel_;
  const int p = g.out_height * g.out_width;
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  Tensor grad_in(input_.shape());
  std::vector<double> dcols(static_cast<std::size_t>(k) * p);
  const ConstMatMap w(weight_.value.data(), in_channels_, k);
  MatMap dw(weight_.grad.data(), in_channels_, k);
  for (int i = 0; i < n; ++i) {
    const double* go = grad_out.data() + i * grad_out.sample_size();
    for (int c = 0; c < out_channels_; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < plane; ++j) s += go[c * plane + j];
      bias_.grad[c] += s;
    }
    im2col(go, g, dcols.data());
    const ConstMatMap dc(dcols.data(), k, p);
    const ConstMatMap xi(input_.data() + i * input_.sample_size(), in_channels_, p);
    dw.noalias() += xi * dc.transpose();
    MatMap(grad_in.data() + i * grad_in.sample_size(), in_channels_, p)
        .noalias() = w * dc;
  }
  return grad_in;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(std::string name, int in_features, int out_features, Rng& rng)
    : in_(in_features),
      out_(out_features),
      weight_(make_param(name + ".weight", {out_features, in_features})),
      bias_(make_param(name + ".bias", {out_features})) {
  he_uniform(weight_.value, in_features, rng);
}

Tensor Dense::forward(const Tensor& x, const Context&) {
  expect_rank(x, 2, "Dense");
  if (x.dim(1) != in_) {
    throw std::invalid_argument("Dense: feature mismatch, got " +
                                shape_string(x.shape()));
  }
  const int n = x.dim(0);
  Tensor out({n, out_});
  MatMap o(out.data(), n, out_);
  o.noalias() = ConstMatMap(x.data(), n, in_) *
                ConstMatMap(weight_.value.data(), out_, in_).transpose();
  o.rowwise() += ConstVecMap(bias_.value.data(), out_).transpose();
  input_ = x;
  return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
  const int n = input_.dim(0);
  const ConstMatMap go(grad_out.data(), n, out_);
  MatMap(weight_.grad.data(), out_, in_).noalias() +=
      go.transpose() * ConstMatMap(input_.data(), n, in_);
  for (int o = 0; o < out_; ++o) {
    double s = 0.0;
    for (int r = 0; r < n; ++r) s += grad_out[r * out_ + o];
    bias_.grad[o] += s;
  }
  Tensor grad_in(input_.shape());
  MatMap(grad_in.data(), n, in_).noalias() =
      go * ConstMatMap(weight_.value.data(), out_, in_);
  return grad_in;
}

// ----------------------------------------------------------- activations

Tensor Relu::forward(const Tensor& x, const Context&) {
  output_ = x;
  for (double& v : output_.values()) v = v < 0.0 ? 0.0 : v;
  return output_;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(output_[i] > 0.0)) g[i] = 0.0;
  }
  return g;
}

Tensor Elu::forward(const Tensor& x, const Context&) {
  input_ = x;
  output_ = x;
  for (double& v : output_.values()) v = v > 0.0 ? v : std::expm1(v);
  return output_;
}

Tensor Elu::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(input_[i] > 0.0)) g[i] *= output_[i] + 1.0;
  }
  return g;
}

Tensor Sigmoid::forward(const Tensor& x, const Context&) {
  output_ = x;
  for (double& v : output_.values()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return output_;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] *= output_[i] * (1.0 - output_[i]);
  }
  return g;
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(std::string name, int channels, double momentum,
                         double epsilon)
    : channels_(channels),
      momentum_(momentum),
      epsilon_(epsilon),
      gamma_(make_param(name + ".gamma", {channels})),
      beta_(make_param(name + ".beta", {channels})),
      running_mean_{name + ".running_mean", Tensor({channels}, 0.0)},
      running_var_{name + ".running_var", Tensor({channels}, 1.0)} {
  gamma_.value.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, const Context& ctx) {
  expect_rank(x, 4, "BatchNorm2d");
  if (x.dim(1) != channels_) {
    throw std::invalid_argument("BatchNorm2d: channel mismatch");
  }
  const int n = x.dim(0);
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  const double count = static_cast<double>(n) * plane;
  Tensor out(x.shape());
  normalized_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  trained_forward_ = ctx.training;

  for (int c = 0; c < channels_; ++c) {
    double mean = running_mean_.value[c];
    double var = running_var_.value[c];
    if (ctx.training) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double* p = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
        for (std::size_t j = 0; j < plane; ++j) s += p[j];
      }
      mean = s / count;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double* p = x.data() + (static_cast<std::size_t>(i) * channels_ + c) * plane;
        for (std::size_t j = 0; j < plane; ++j) ss += (p[j] - mean) * (p[j] - mean);
      }
      var = ss / count;
      running_mean_.value[c] =
          momentum_ * running_mean_.value[c] + (1.0 - momentum_) * mean;
      running_var_.value[c] =
          momentum_ * running_var_.value[c] + (1.0 - momentum_) * var;
    }
    const double inv_std = 1.0 / std::sqrt(var + epsilon_);
    inv_std_[c] = inv_std;
    for (int i = 0; i < n; ++i) {
      const std::size_t base = (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        const double xh = (x[base + j] - mean) * inv_std;
        normalized_[base + j] = xh;
        out[base + j] = gamma_.value[c] * xh + beta_.value[c];
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  const int n = grad_out.dim(0);
  const std::size_t plane =
      static_cast<std::size_t>(grad_out.dim(2)) * grad_out.dim(3);
  const double count = static_cast<double>(n) * plane;
  Tensor grad_in(grad_out.shape());
  for (int c = 0; c < channels_; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t base = (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        sum_g += grad_out[base + j];
        sum_gx += grad_out[base + j] * normalized_[base + j];
      }
    }
    gamma_.grad[c] += sum_gx;
    beta_.grad[c] += sum_g;
    const double scale = gamma_.value[c] * inv_std_[c];
    for (int i = 0; i < n; ++i) {
      const std::size_t base = (static_cast<std::size_t>(i) * channels_ + c) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        if (trained_forward_) {
          grad_in[base + j] =
              scale * (grad_out[base + j] - sum_g / count -
                       normalized_[base + j] * sum_gx / count);
        } else {
          grad_in[base + j] = scale * grad_out[base + j];
        }
      }
    }
  }
  return grad_in;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double rate) : rate_(rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("Dropout: rate must be in [0, 1)");
  }
}

Tensor Dropout::forward(const Tensor& x, const Context& ctx) {
  if (!ctx.training || rate_ == 0.0) {
    mask_ = Tensor();
    return x;
  }
  if (ctx.rng == nullptr) {
    throw std::invalid_argument("Dropout: training requires an Rng");
  }
  const double keep_scale = 1.0 / (1.0 - rate_);
  mask_ = Tensor(x.shape());
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask_[i] = ctx.rng->uniform() >= rate_ ? keep_scale : 0.0;
    out[i] *= mask_[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (mask_.size() == 0) return grad_out;
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
  return g;
}

// --------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, const Context&) {
  input_shape_ = x.shape();
  return x.reshaped({x.dim(0), static_cast<int>(x.sample_size())});
}

Tensor Flatten::backward(const Tensor& grad_out) {
  return grad_out.reshaped(input_shape_);
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::forward(const Tensor& x, const Context& ctx) {
  Tensor h = x;
  for (auto& layer : layers_) h = layer->forward(h, ctx);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (Parameter* p : layer->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Buffer*> Sequential::buffers() {
  std::vector<Buffer*> out;
  for (auto& layer : layers_) {
    for (Buffer* b : layer->buffers()) out.push_back(b);
  }
  return out;
}

}  // namespace pml::nn
