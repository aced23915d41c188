#include "pml/core/gray_image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pml {

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("GrayImage: dimensions must be positive");
  }
  if (width != height) {
    throw std::invalid_argument("GrayImage: image must be square, got " +
                                std::to_string(width) + "x" +
                                std::to_string(height));
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("GrayImage: data length " +
                                std::to_string(data_.size()) +
                                " does not match width*height");
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("GrayImage: intensity out of [0,1]");
    }
  }
}

GrayImage GrayImage::filled(int size, double value) {
  return GrayImage(size, size,
                   std::vector<double>(static_cast<std::size_t>(size) * size,
                                       value));
}

GrayImage mirror_image(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<double> out(img.size());
  auto src = img.pixels();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      out[static_cast<std::size_t>(r) * w + c] =
          src[static_cast<std::size_t>(r) * w + (w - 1 - c)];
    }
  }
  return GrayImage(w, h, std::move(out));
}

}  // namespace pml
