#include "kpnp/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kpnp {

Image::Image(std::size_t rows, std::size_t cols) : Image(rows, cols, Vec(rows * cols, 0.0)) {}

Image::Image(std::size_t rows, std::size_t cols, Vec data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) throw ParameterError("Image: rows and cols must be positive");
  if (data_.size() != rows * cols) {
    throw DimensionError("Image: data length " + std::to_string(data_.size()) +
                         " != rows*cols = " + std::to_string(rows * cols));
  }
  if (!all_finite(data_)) throw ParameterError("Image: non-finite pixel value");
}

Image Image::constant(std::size_t rows, std::size_t cols, double value) {
  return Image(rows, cols, Vec(rows * cols, value));
}

Image center_crop(const Image& img, std::size_t rows, std::size_t cols) {
  rows = std::min(rows, img.rows());
  cols = std::min(cols, img.cols());
  const std::size_t r0 = (img.rows() - rows) / 2;
  const std::size_t c0 = (img.cols() - cols) / 2;
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = img(r0 + r, c0 + c);
  return out;
}

Image make_phantom(std::size_t rows, std::size_t cols) {
  Image img(rows, cols);
  const double h = static_cast<double>(rows);
  const double w = static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double y = (static_cast<double>(r) + 0.5) / h;
      const double x = (static_cast<double>(c) + 0.5) / w;
      double v = 0.25 + 0.2 * x + 0.1 * y;
      const double dx = x - 0.62, dy = y - 0.38;
      if (dx * dx + dy * dy < 0.22 * 0.22) v = 0.85 - 0.15 * (dx * dx + dy * dy) / 0.0484;
      if (x > 0.12 && x < 0.42 && y > 0.55 && y < 0.88) v = 0.1;
      if (x > 0.55 && x < 0.9 && y > 0.7 && y < 0.92)
        v = 0.55 + 0.25 * std::sin(2.0 * std::numbers::pi * x * w / 6.0);
      img(r, c) = v;
    }
  }
  return img;
}

}  // namespace kpnp
