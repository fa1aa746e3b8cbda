#include "kpnp/kernel_denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kpnp/errors.hpp"

namespace kpnp {

void KernelParams::validate() const {
  if (patch_radius < 0) throw ParameterError("kernel: patch_radius must be >= 0");
  if (window_radius < 1) throw ParameterError("kernel: window_radius must be >= 1");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ParameterError("kernel: bandwidth must be positive");
}

const char* to_string(DenoiserMode mode) { return mode == DenoiserMode::nlm ? "nlm" : "dsg"; }

SparseMatrix build_kernel(const Image& guide, const KernelParams& params) {
  params.validate();
  if (guide.rows() < 2 || guide.cols() < 2)
    throw ParameterError("kernel: guide must be at least 2x2 so the window reaches a neighbour");

  const auto rows = static_cast<std::ptrdiff_t>(guide.rows());
  const auto cols = static_cast<std::ptrdiff_t>(guide.cols());
  const std::ptrdiff_t pr = params.patch_radius;
  const std::ptrdiff_t wr = params.window_radius;

  // Guide padded by the patch radius with symmetric reflection.
  const std::ptrdiff_t pcols = cols + 2 * pr;
  Vec padded(static_cast<std::size_t>((rows + 2 * pr) * pcols));
  for (std::ptrdiff_t r = -pr; r < rows + pr; ++r)
    for (std::ptrdiff_t c = -pr; c < cols + pr; ++c)
      padded[static_cast<std::size_t>((r + pr) * pcols + (c + pr))] =
          guide(static_cast<std::size_t>(reflect_index(r, rows)), static_cast<std::size_t>(reflect_index(c, cols)));

  const double patch_pixels = static_cast<double>((2 * pr + 1) * (2 * pr + 1));
  const double scale = 1.0 / (2.0 * params.bandwidth * params.bandwidth * patch_pixels);

  std::vector<double> hat(static_cast<std::size_t>(2 * wr + 1));
  for (std::ptrdiff_t d = -wr; d <= wr; ++d)
    hat[static_cast<std::size_t>(d + wr)] =
        params.window == WindowShape::hat ? 1.0 - static_cast<double>(std::abs(d)) / static_cast<double>(wr + 1) : 1.0;

  const auto patch_distance = [&](std::ptrdiff_t r1, std::ptrdiff_t c1, std::ptrdiff_t r2, std::ptrdiff_t c2) {
    double s = 0.0;
    for (std::ptrdiff_t a = 0; a <= 2 * pr; ++a) {
      const double* p1 = &padded[static_cast<std::size_t>((r1 + a) * pcols + c1)];
      const double* p2 = &padded[static_cast<std::size_t>((r2 + a) * pcols + c2)];
      for (std::ptrdiff_t b = 0; b <= 2 * pr; ++b) {
        const double d = p1[b] - p2[b];
        s += d * d;
      }
    }
    return s;
  };

  const std::size_t n = guide.size();
  std::vector<std::size_t> row_ptr(n + 1, 0), col;
  Vec val;
  col.reserve(n * static_cast<std::size_t>((2 * wr + 1) * (2 * wr + 1)));
  val.reserve(col.capacity());
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      for (std::ptrdiff_t dr = -wr; dr <= wr; ++dr) {
        const std::ptrdiff_t r2 = r + dr;
        if (r2 < 0 || r2 >= rows) continue;
        for (std::ptrdiff_t dc = -wr; dc <= wr; ++dc) {
          const std::ptrdiff_t c2 = c + dc;
          if (c2 < 0 || c2 >= cols) continue;
          const double h = hat[static_cast<std::size_t>(dr + wr)] * hat[static_cast<std::size_t>(dc + wr)];
          col.push_back(static_cast<std::size_t>(r2 * cols + c2));
          val.push_back(std::exp(-patch_distance(r, c, r2, c2) * scale) * h);
        }
      }
      row_ptr[static_cast<std::size_t>(r * cols + c) + 1] = col.size();
    }
  }
  return SparseMatrix(n, std::move(row_ptr), std::move(col), std::move(val));
}

KernelDenoiser::KernelDenoiser(DenoiserMode mode, SparseMatrix kernel)
    : mode_(mode), kernel_(std::move(kernel)) {
  for (double v : kernel_.val())
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("denoiser: kernel entries must be finite and >= 0");
  degrees_ = kernel_.row_sums();
  inv_sqrt_degrees_.resize(degrees_.size());
  for (std::size_t i = 0; i < degrees_.size(); ++i) {
    if (!(degrees_[i] > 0.0))
      throw ParameterError("denoiser: kernel row " + std::to_string(i) + " sums to zero");
    inv_sqrt_degrees_[i] = 1.0 / std::sqrt(degrees_[i]);
  }

  const std::size_t n = kernel_.n();
  const auto ptr = kernel_.row_ptr();
  const auto col = kernel_.col();
  const auto kv = kernel_.val();
  std::vector<std::size_t> row_ptr(ptr.begin(), ptr.end());
  std::vector<std::size_t> cols(col.begin(), col.end());
  Vec w(kv.size());

  if (mode_ == DenoiserMode::nlm) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) w[p] = kv[p] / degrees_[i];
  } else {
    // inv_sqrt_i * inv_sqrt_j commutes exactly, so Ws is symmetric to the bit.
    Vec ones_hat(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) {
        w[p] = kv[p] * (inv_sqrt_degrees_[i] * inv_sqrt_degrees_[col[p]]);
        ones_hat[i] += w[p];
      }
    norm_scale_ = norm_inf(ones_hat);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) {
        w[p] /= norm_scale_;
        if (col[p] == i) w[p] += 1.0 - ones_hat[i] / norm_scale_;
      }
    for (std::size_t i = 0; i < n; ++i)
      if (kernel_.at(i, i) <= 0.0 && ones_hat[i] < norm_scale_)
        throw ParameterError("denoiser: dsg needs a stored diagonal in row " + std::to_string(i));
  }
  weights_ = SparseMatrix(n, std::move(row_ptr), std::move(cols), std::move(w));
}

KernelDenoiser KernelDenoiser::nlm(SparseMatrix kernel) { return KernelDenoiser(DenoiserMode::nlm, std::move(kernel)); }
KernelDenoiser KernelDenoiser::dsg(SparseMatrix kernel) { return KernelDenoiser(DenoiserMode::dsg, std::move(kernel)); }

void KernelDenoiser::apply(std::span<const double> x, std::span<double> y) const { weights_.multiply(x, y); }

Vec KernelDenoiser::apply(std::span<const double> x) const { return weights_.multiply(x); }

void KernelDenoiser::apply_symmetric(std::span<const double> x, std::span<double> y) const {
  require_size(x, n(), "apply_symmetric input");
  require_size(y, n(), "apply_symmetric output");
  const auto ptr = kernel_.row_ptr();
  const auto col = kernel_.col();
  const auto kv = kernel_.val();
  for (std::size_t i = 0; i < n(); ++i) {
    double s = 0.0;
    for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) s += kv[p] * inv_sqrt_degrees_[col[p]] * x[col[p]];
    y[i] = inv_sqrt_degrees_[i] * s;
  }
}

KernelDenoiser build_denoiser(const Image& guide, const KernelParams& params, DenoiserMode mode) {
  SparseMatrix k = build_kernel(guide, params);
  return mode == DenoiserMode::nlm ? KernelDenoiser::nlm(std::move(k)) : KernelDenoiser::dsg(std::move(k));
}

}  // namespace kpnp
