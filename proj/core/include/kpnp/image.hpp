#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kpnp/vec.hpp"

namespace kpnp {

/// Row-major grayscale image. Intensities are nominally in [0, 1] but are
/// never clamped here; only save_pgm clamps.
class Image {
 public:
  Image() = default;
  /// Zero image.
  Image(std::size_t rows, std::size_t cols);
  /// Throws DimensionError if data.size() != rows*cols, ParameterError on a
  /// zero dimension or a non-finite entry.
  Image(std::size_t rows, std::size_t cols, Vec data);

  static Image constant(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const Vec& vec() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

/// Central crop of the given size (clipped to the image).
Image center_crop(const Image& img, std::size_t rows, std::size_t cols);

/// Deterministic piecewise-smooth test scene: a shaded background, a bright
/// disk, a dark rectangle and a striped patch. Used when no image file is
/// supplied.
Image make_phantom(std::size_t rows, std::size_t cols);

/// Half-sample symmetric reflection of an index into [0, n):
/// -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace kpnp
