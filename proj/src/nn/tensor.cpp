#include "pml/nn/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace pml::nn {

namespace {

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != element_count(shape_)) {
    throw std::invalid_argument("Tensor: value count does not match shape " +
                                shape_string(shape_));
  }
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(0) != b.dim(0) ||
      a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw std::invalid_argument("concat_channels: incompatible shapes " +
                                shape_string(a.shape()) + " and " +
                                shape_string(b.shape()));
  }
  const int n = a.dim(0);
  const std::size_t sa = a.sample_size();
  const std::size_t sb = b.sample_size();
  Tensor out({n, a.dim(1) + b.dim(1), a.dim(2), a.dim(3)});
  for (int i = 0; i < n; ++i) {
    std::copy_n(a.data() + i * sa, sa, out.data() + i * (sa + sb));
    std::copy_n(b.data() + i * sb, sb, out.data() + i * (sa + sb) + sa);
  }
  return out;
}

void split_channels(const Tensor& joined, int first_channels, Tensor& a,
                    Tensor& b) {
  const int n = joined.dim(0);
  const int h = joined.dim(2);
  const int w = joined.dim(3);
  a = Tensor({n, first_channels, h, w});
  b = Tensor({n, joined.dim(1) - first_channels, h, w});
  const std::size_t sa = a.sample_size();
  const std::size_t sb = b.sample_size();
  for (int i = 0; i < n; ++i) {
    std::copy_n(joined.data() + i * (sa + sb), sa, a.data() + i * sa);
    std::copy_n(joined.data() + i * (sa + sb) + sa, sb, b.data() + i * sb);
  }
}

}  // namespace pml::nn
