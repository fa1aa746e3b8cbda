#include "kpnp/guide.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "kpnp/errors.hpp"

namespace kpnp {
namespace {

double keys_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

const char* to_string(Task task) {
  switch (task) {
    case Task::inpaint: return "inpaint";
    case Task::deblur: return "deblur";
    case Task::superres: return "superres";
  }
  return "?";
}

Image median3x3(const Image& img) {
  const auto rows = static_cast<std::ptrdiff_t>(img.rows());
  const auto cols = static_cast<std::ptrdiff_t>(img.cols());
  Image out(img.rows(), img.cols());
  std::array<double, 9> win{};
  for (std::ptrdiff_t r = 0; r < rows; ++r)
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      std::size_t k = 0;
      for (std::ptrdiff_t dr = -1; dr <= 1; ++dr)
        for (std::ptrdiff_t dc = -1; dc <= 1; ++dc)
          win[k++] = img(static_cast<std::size_t>(reflect_index(r + dr, rows)),
                         static_cast<std::size_t>(reflect_index(c + dc, cols)));
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = win[4];
    }
  return out;
}

Image bicubic_upsample(const Image& img, std::size_t factor) {
  if (factor == 0) throw ParameterError("bicubic_upsample: factor must be positive");
  const auto rows = static_cast<std::ptrdiff_t>(img.rows());
  const auto cols = static_cast<std::ptrdiff_t>(img.cols());
  Image out(img.rows() * factor, img.cols() * factor);
  const double f = static_cast<double>(factor);
  for (std::size_t R = 0; R < out.rows(); ++R) {
    const double y = static_cast<double>(R) / f;
    const auto y0 = static_cast<std::ptrdiff_t>(std::floor(y));
    for (std::size_t C = 0; C < out.cols(); ++C) {
      const double x = static_cast<double>(C) / f;
      const auto x0 = static_cast<std::ptrdiff_t>(std::floor(x));
      double s = 0.0;
      for (std::ptrdiff_t i = -1; i <= 2; ++i) {
        const double wy = keys_weight(y - static_cast<double>(y0 + i));
        if (wy == 0.0) continue;
        const auto rr = static_cast<std::size_t>(reflect_index(y0 + i, rows));
        for (std::ptrdiff_t j = -1; j <= 2; ++j) {
          const double wx = keys_weight(x - static_cast<double>(x0 + j));
          if (wx == 0.0) continue;
          s += wy * wx * img(rr, static_cast<std::size_t>(reflect_index(x0 + j, cols)));
        }
      }
      out(R, C) = s;
    }
  }
  return out;
}

Image backprojection(std::span<const double> observed, const ForwardOp& op) {
  require_size(observed, op.m(), "backprojection observation");
  return Image(op.rows_in(), op.cols_in(), op.adjoint(observed));
}

Image make_guide(Task task, std::span<const double> observed, const ForwardOp& op) {
  require_size(observed, op.m(), "make_guide observation");
  switch (task) {
    case Task::inpaint: {
      if (op.kind() != OpKind::inpaint) throw ParameterError("make_guide: inpaint task needs an inpainting operator");
      Image filled(op.rows_in(), op.cols_in());
      for (std::size_t j = 0; j < op.m(); ++j) filled.data()[op.observed()[j]] = observed[j];
      return median3x3(filled);
    }
    case Task::deblur: {
      if (op.kind() != OpKind::blur) throw ParameterError("make_guide: deblur task needs a blur operator");
      return Image(op.rows_out(), op.cols_out(), Vec(observed.begin(), observed.end()));
    }
    case Task::superres: {
      if (op.kind() != OpKind::superres) throw ParameterError("make_guide: superres task needs a superres operator");
      const Image low(op.rows_out(), op.cols_out(), Vec(observed.begin(), observed.end()));
      return bicubic_upsample(low, op.factor());
    }
  }
  throw ParameterError("make_guide: unknown task");
}

}  // namespace kpnp
