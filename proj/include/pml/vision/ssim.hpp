#pragma once

#include "pml/core/gray_image.hpp"

namespace pml::vision {

// Box-window SSIM parameters. Windows lie fully inside the image (no
// padding) and are visited with the given stride.
struct SsimParams {
  int window_size = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
  int stride = 1;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Mean over all windows of
//   ((2 mu_a mu_b + C1)(2 cov_ab + C2)) / ((mu_a^2 + mu_b^2 + C1)(var_a + var_b + C2))
// with population (biased) variances. Window statistics come from summed-area
// tables; per-window values are summed in row-major window order.
//
// Throws std::invalid_argument on a size mismatch or a window that does not
// fit the image.
double ssim(const GrayImage& a, const GrayImage& b,
            const SsimParams& params = {});

// The distance model: 1 - ssim, in [0, 2].
double distance(const GrayImage& a, const GrayImage& b,
                const SsimParams& params = {});

}  // namespace pml::vision
