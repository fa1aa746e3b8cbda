#include "kpnp/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace kpnp {
namespace {

constexpr int kRadius = 5;
constexpr int kSide = 2 * kRadius + 1;

std::array<double, kSide> gaussian_taps() {
  std::array<double, kSide> g{};
  double sum = 0.0;
  for (int i = 0; i < kSide; ++i) {
    const double d = i - kRadius;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable Gaussian filter with symmetric padding.
Vec filter(std::span<const double> src, std::size_t rows, std::size_t cols) {
  static const auto g = gaussian_taps();
  const auto R = static_cast<std::ptrdiff_t>(rows);
  const auto C = static_cast<std::ptrdiff_t>(cols);
  Vec tmp(src.size()), out(src.size());
  for (std::ptrdiff_t r = 0; r < R; ++r)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      double s = 0.0;
      for (int k = -kRadius; k <= kRadius; ++k) s += g[k + kRadius] * src[r * C + reflect_index(c + k, C)];
      tmp[r * C + c] = s;
    }
  for (std::ptrdiff_t r = 0; r < R; ++r)
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      double s = 0.0;
      for (int k = -kRadius; k <= kRadius; ++k) s += g[k + kRadius] * tmp[reflect_index(r + k, R) * C + c];
      out[r * C + c] = s;
    }
  return out;
}

void require_same_shape(const Image& x, const Image& ref, const char* what) {
  if (!x.same_shape(ref)) {
    throw DimensionError(std::string(what) + ": image shapes differ (" + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs " + std::to_string(ref.rows()) + "x" +
                         std::to_string(ref.cols()) + ")");
  }
}

}  // namespace

double psnr(const Image& x, const Image& ref) {
  require_same_shape(x, ref, "psnr");
  const double mse = std::pow(dist2(x.data(), ref.data()), 2) / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& x, const Image& ref) {
  require_same_shape(x, ref, "ssim");
  if (std::min(x.rows(), x.cols()) < static_cast<std::size_t>(kSide))
    throw DimensionError("ssim: image smaller than the 11x11 window");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  const std::size_t n = x.size();
  Vec xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x.data()[i] * x.data()[i];
    yy[i] = ref.data()[i] * ref.data()[i];
    xy[i] = x.data()[i] * ref.data()[i];
  }
  const Vec mx = filter(x.data(), x.rows(), x.cols());
  const Vec my = filter(ref.data(), x.rows(), x.cols());
  const Vec sxx = filter(xx, x.rows(), x.cols());
  const Vec syy = filter(yy, x.rows(), x.cols());
  const Vec sxy = filter(xy, x.rows(), x.cols());

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(n);
}

}  // namespace kpnp
