#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pml {

// Square single-channel image, row-major, intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;

  // Throws std::invalid_argument on non-square shape, size mismatch, or any
  // intensity that is non-finite or outside [0, 1].
  GrayImage(int width, int height, std::vector<double> data);

  static GrayImage filled(int size, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double at(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  std::span<const double> pixels() const { return data_; }

  bool operator==(const GrayImage& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Horizontal flip: out(r, c) = in(r, width - 1 - c).
GrayImage mirror_image(const GrayImage& img);

}  // namespace pml
