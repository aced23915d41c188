#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pml::nn {

// Dense row-major float64 tensor. Images are NCHW, feature batches (N, F).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Same data, new shape with equal element count.
  Tensor reshaped(std::vector<int> shape) const;

  // Elements per leading-dimension entry.
  std::size_t sample_size() const { return shape_.empty() ? 0 : size() / shape_[0]; }

  void fill(double v);

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<int>& shape);

// Concatenates two NCHW tensors along channels; split is its adjoint.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void split_channels(const Tensor& joined, int first_channels, Tensor& a,
                    Tensor& b);

}  // namespace pml::nn
