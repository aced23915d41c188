#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pml/core/rng.hpp"
#include "pml/nn/tensor.hpp"

namespace pml::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Non-trainable state saved with the model (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor value;
};

struct Context {
  bool training = false;
  Rng* rng = nullptr;  // dropout masks; required when training
};

// A layer caches whatever its backward pass needs during forward. backward
// must follow the matching forward, accumulates into Parameter::grad, and
// returns the gradient with respect to the layer input.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, const Context& ctx) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  virtual std::vector<Buffer*> buffers() { return {}; }
};

// Uniform He initialization: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)).
void he_uniform(Tensor& weights, int fan_in, Rng& rng);

struct ConvGeometry {
  int channels = 0;
  int height = 0;
  int width = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  int out_height = 0;
  int out_width = 0;
};

// Rows are (channel, ky, kx), columns output positions. Out-of-image taps
// read as zero.
void im2col(const double* image, const ConvGeometry& g, double* cols);
// Adjoint of im2col: accumulates columns back into the image.
void col2im(const double* cols, const ConvGeometry& g, double* image);

// 2-D convolution, weights (out, in, k, k), zero padding.
class Conv2d : public Layer {
 public:
  Conv2d(std::string name, int in_channels, int out_channels, int kernel,
         int stride, int pad, Rng& rng);

  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

  static int output_size(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
  }

 private:
  ConvGeometry geometry(const Tensor& x) const;

  int in_channels_, out_channels_, kernel_, stride_, pad_;
  Parameter weight_, bias_;
  Tensor input_;
};

// Transposed convolution (the adjoint of Conv2d on the output grid), weights
// (in, out, k, k). Output size = (in - 1) * stride - 2 * pad + kernel +
// output_padding.
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(std::string name, int in_channels, int out_channels,
                  int kernel, int stride, int pad, int output_padding,
                  Rng& rng);

  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

  static int output_size(int in, int kernel, int stride, int pad,
                         int output_padding) {
    return (in - 1) * stride - 2 * pad + kernel + output_padding;
  }

 private:
  ConvGeometry geometry(const Tensor& x) const;

  int in_channels_, out_channels_, kernel_, stride_, pad_, output_padding_;
  Parameter weight_, bias_;
  Tensor input_;
};

// Fully connected on (N, F) inputs; weights (out, in).
class Dense : public Layer {
 public:
  Dense(std::string name, int in_features, int out_features, Rng& rng);

  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }

 private:
  int in_, out_;
  Parameter weight_, bias_;
  Tensor input_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

// alpha = 1.
class Elu : public Layer {
 public:
  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor input_, output_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

// Per-channel batch normalization over (N, H, W). Training normalizes with
// batch statistics and updates running averages; inference uses the running
// averages.
class BatchNorm2d : public Layer {
 public:
  BatchNorm2d(std::string name, int channels, double momentum = 0.99,
              double epsilon = 1e-3);

  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Buffer*> buffers() override {
    return {&running_mean_, &running_var_};
  }

 private:
  int channels_;
  double momentum_, epsilon_;
  Parameter gamma_, beta_;
  Buffer running_mean_, running_var_;
  Tensor normalized_;
  std::vector<double> inv_std_;
  bool trained_forward_ = false;
};

// Inverted dropout: identity at inference.
class Dropout : public Layer {
 public:
  explicit Dropout(double rate);

  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  double rate_;
  Tensor mask_;
};

// (N, ...) -> (N, F).
class Flatten : public Layer {
 public:
  Tensor forward(const Tensor& x, const Context& ctx) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  std::vector<int> input_shape_;
};

class Sequential {
 public:
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& x, const Context& ctx);
  Tensor backward(const Tensor& grad_out);
  std::vector<Parameter*> parameters();
  std::vector<Buffer*> buffers();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace pml::nn
