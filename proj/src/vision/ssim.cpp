#include "pml/vision/ssim.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace pml::vision {

namespace {

// (n+1) x (n+1) summed-area table of f(a[i], b[i]).
template <typename F>
std::vector<double> integral(const GrayImage& a, const GrayImage& b, F f) {
  const int n = a.width();
  const int m = n + 1;
  std::vector<double> table(static_cast<std::size_t>(m) * m, 0.0);
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (int r = 0; r < n; ++r) {
    double row = 0.0;
    for (int c = 0; c < n; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * n + c;
      row += f(pa[i], pb[i]);
      table[static_cast<std::size_t>(r + 1) * m + (c + 1)] =
          table[static_cast<std::size_t>(r) * m + (c + 1)] + row;
    }
  }
  return table;
}

double box(const std::vector<double>& t, int m, int r, int c, int w) {
  const auto at = [&](int rr, int cc) {
    return t[static_cast<std::size_t>(rr) * m + cc];
  };
  return at(r + w, c + w) - at(r, c + w) - at(r + w, c) + at(r, c);
}

}  // namespace

double ssim(const GrayImage& a, const GrayImage& b, const SsimParams& params) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("ssim: image dimensions differ");
  }
  const int n = a.width();
  const int w = params.window_size;
  if (w < 2 || w > n) {
    throw std::invalid_argument("ssim: window must satisfy 2 <= w <= size");
  }
  if (params.stride < 1 || !(params.k1 > 0.0) || !(params.k2 > 0.0)) {
    throw std::invalid_argument("ssim: stride >= 1 and k1, k2 > 0 required");
  }

  const auto sa = integral(a, b, [](double x, double) { return x; });
  const auto sb = integral(a, b, [](double, double y) { return y; });
  const auto saa = integral(a, b, [](double x, double) { return x * x; });
  const auto sbb = integral(a, b, [](double, double y) { return y * y; });
  const auto sab = integral(a, b, [](double x, double y) { return x * y; });

  const int m = n + 1;
  const double inv_count = 1.0 / (static_cast<double>(w) * w);
  const double c1 = params.c1();
  const double c2 = params.c2();

  double total = 0.0;
  long windows = 0;
  for (int r = 0; r + w <= n; r += params.stride) {
    for (int c = 0; c + w <= n; c += params.stride) {
      const double mu_a = box(sa, m, r, c, w) * inv_count;
      const double mu_b = box(sb, m, r, c, w) * inv_count;
      const double var_a = box(saa, m, r, c, w) * inv_count - mu_a * mu_a;
      const double var_b = box(sbb, m, r, c, w) * inv_count - mu_b * mu_b;
      const double cov = box(sab, m, r, c, w) * inv_count - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den =
          (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      total += std::clamp(num / den, -1.0, 1.0);
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

double distance(const GrayImage& a, const GrayImage& b,
                const SsimParams& params) {
  return 1.0 - ssim(a, b, params);
}

}  // namespace pml::vision
