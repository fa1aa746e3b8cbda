#include "kpnp/forward_op.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "kpnp/errors.hpp"
#include "kpnp/pgm.hpp"

namespace kpnp {

BlurKernel BlurKernel::gaussian(std::size_t size, double sigma) {
  if (size % 2 == 0) throw ParameterError("gaussian kernel: size must be odd, got " + std::to_string(size));
  if (!(sigma > 0.0)) throw ParameterError("gaussian kernel: sigma must be positive");
  const auto half = static_cast<double>(size / 2);
  Vec taps(size * size);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      const double dy = static_cast<double>(r) - half;
      const double dx = static_cast<double>(c) - half;
      taps[r * size + c] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  return from_taps(size, size, std::move(taps));
}

BlurKernel BlurKernel::from_taps(std::size_t rows, std::size_t cols, Vec taps) {
  if (rows % 2 == 0 || cols % 2 == 0)
    throw ParameterError("blur kernel: side lengths must be odd, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  if (taps.size() != rows * cols) throw DimensionError("blur kernel: tap count does not match h*w");
  double sum = 0.0;
  for (double t : taps) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("blur kernel: taps must be finite and >= 0");
    sum += t;
  }
  if (!(sum > 0.0)) throw ParameterError("blur kernel: at least one tap must be positive");
  for (auto& t : taps) t /= sum;
  return BlurKernel(rows, cols, std::move(taps));
}

BlurKernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  long h = 0, w = 0;
  if (!(in >> h)) throw FormatError("h", "missing kernel height");
  if (!(in >> w)) throw FormatError("w", "missing kernel width");
  if (h <= 0) throw FormatError("h", "must be positive");
  if (w <= 0) throw FormatError("w", "must be positive");
  Vec taps(static_cast<std::size_t>(h * w));
  for (auto& t : taps)
    if (!(in >> t)) throw FormatError("taps", "expected " + std::to_string(h * w) + " values");
  return BlurKernel::from_taps(static_cast<std::size_t>(h), static_cast<std::size_t>(w), std::move(taps));
}

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::inpaint: return "inpaint";
    case OpKind::blur: return "blur";
    case OpKind::superres: return "superres";
  }
  return "?";
}

ForwardOp ForwardOp::inpaint(std::size_t rows, std::size_t cols, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ParameterError("inpaint: fraction must lie in (0, 1]");
  const std::size_t n = rows * cols;
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (m == 0) throw ParameterError("inpaint: mask is empty (fraction * n rounds to 0)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::uint8_t> mask(n, 0);
  for (std::size_t i = 0; i < m; ++i) mask[idx[i]] = 1;
  return inpaint_from_mask(rows, cols, std::move(mask));
}

ForwardOp ForwardOp::inpaint_from_mask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> mask) {
  if (rows == 0 || cols == 0) throw ParameterError("inpaint: empty grid");
  if (mask.size() != rows * cols) throw DimensionError("inpaint: mask length != rows*cols");
  ForwardOp op;
  op.kind_ = OpKind::inpaint;
  op.rows_ = rows;
  op.cols_ = cols;
  for (auto& v : mask) v = v ? 1 : 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) op.observed_.push_back(i);
  if (op.observed_.empty()) throw ParameterError("inpaint: mask is empty");
  op.mask_ = std::move(mask);
  op.m_ = op.observed_.size();
  return op;
}

ForwardOp ForwardOp::blur(std::size_t rows, std::size_t cols, BlurKernel kernel) {
  return superres(rows, cols, std::move(kernel), 1);
}

ForwardOp ForwardOp::superres(std::size_t rows, std::size_t cols, BlurKernel kernel, std::size_t factor) {
  if (rows == 0 || cols == 0) throw ParameterError("blur: empty grid");
  if (factor == 0) throw ParameterError("superres: factor must be positive");
  if (rows % factor != 0 || cols % factor != 0)
    throw ParameterError("superres: image " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " not divisible by factor " + std::to_string(factor));
  ForwardOp op;
  op.kind_ = factor == 1 ? OpKind::blur : OpKind::superres;
  op.rows_ = rows;
  op.cols_ = cols;
  op.factor_ = factor;
  op.m_ = (rows / factor) * (cols / factor);
  op.kernel_ = std::move(kernel);
  op.build_wrap_tables();
  return op;
}

void ForwardOp::build_wrap_tables() {
  const auto& k = *kernel_;
  const auto wrap = [](std::ptrdiff_t i, std::size_t n) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % sn) + sn) % sn);
  };
  const auto ch = static_cast<std::ptrdiff_t>(k.rows() / 2);
  const auto cw = static_cast<std::ptrdiff_t>(k.cols() / 2);
  row_wrap_.resize(k.rows() * rows_);
  col_wrap_.resize(k.cols() * cols_);
  for (std::size_t u = 0; u < k.rows(); ++u)
    for (std::size_t r = 0; r < rows_; ++r)
      row_wrap_[u * rows_ + r] = wrap(static_cast<std::ptrdiff_t>(r) + static_cast<std::ptrdiff_t>(u) - ch, rows_);
  for (std::size_t v = 0; v < k.cols(); ++v)
    for (std::size_t c = 0; c < cols_; ++c)
      col_wrap_[v * cols_ + c] = wrap(static_cast<std::ptrdiff_t>(c) + static_cast<std::ptrdiff_t>(v) - cw, cols_);
}

std::size_t ForwardOp::rows_out() const noexcept { return kind_ == OpKind::inpaint ? m_ : rows_ / factor_; }
std::size_t ForwardOp::cols_out() const noexcept { return kind_ == OpKind::inpaint ? 1 : cols_ / factor_; }

// y(r, c) = sum_{u,v} k(u, v) x(r - (u - ch), c - (v - cw)), circular.
// Scatter form: x(r, c) contributes k(u, v) to y(r + u - ch, c + v - cw).
void ForwardOp::convolve(std::span<const double> x, std::span<double> y) const {
  const auto& k = *kernel_;
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t u = 0; u < k.rows(); ++u) {
    const std::size_t* rw = &row_wrap_[u * rows_];
    for (std::size_t v = 0; v < k.cols(); ++v) {
      const double t = k(u, v);
      if (t == 0.0) continue;
      const std::size_t* cw = &col_wrap_[v * cols_];
      for (std::size_t r = 0; r < rows_; ++r) {
        const double* xr = &x[r * cols_];
        double* yr = &y[rw[r] * cols_];
        for (std::size_t c = 0; c < cols_; ++c) yr[cw[c]] += t * xr[c];
      }
    }
  }
}

// Adjoint of convolve: x(r, c) = sum_{u,v} k(u, v) y(r + u - ch, c + v - cw).
void ForwardOp::correlate(std::span<const double> y, std::span<double> x) const {
  const auto& k = *kernel_;
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t u = 0; u < k.rows(); ++u) {
    const std::size_t* rw = &row_wrap_[u * rows_];
    for (std::size_t v = 0; v < k.cols(); ++v) {
      const double t = k(u, v);
      if (t == 0.0) continue;
      const std::size_t* cw = &col_wrap_[v * cols_];
      for (std::size_t r = 0; r < rows_; ++r) {
        const double* yr = &y[rw[r] * cols_];
        double* xr = &x[r * cols_];
        for (std::size_t c = 0; c < cols_; ++c) xr[c] += t * yr[cw[c]];
      }
    }
  }
}

void ForwardOp::apply(std::span<const double> x, std::span<double> y) const {
  require_size(x, n(), "ForwardOp::apply input");
  require_size(y, m_, "ForwardOp::apply output");
  if (kind_ == OpKind::inpaint) {
    for (std::size_t j = 0; j < m_; ++j) y[j] = x[observed_[j]];
    return;
  }
  if (factor_ == 1) {
    convolve(x, y);
    return;
  }
  Vec blurred(n());
  convolve(x, blurred);
  const std::size_t co = cols_ / factor_;
  for (std::size_t r = 0; r < rows_ / factor_; ++r)
    for (std::size_t c = 0; c < co; ++c) y[r * co + c] = blurred[(r * factor_) * cols_ + c * factor_];
}

void ForwardOp::adjoint(std::span<const double> y, std::span<double> x) const {
  require_size(y, m_, "ForwardOp::adjoint input");
  require_size(x, n(), "ForwardOp::adjoint output");
  if (kind_ == OpKind::inpaint) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t j = 0; j < m_; ++j) x[observed_[j]] = y[j];
    return;
  }
  if (factor_ == 1) {
    correlate(y, x);
    return;
  }
  Vec up(n(), 0.0);
  const std::size_t co = cols_ / factor_;
  for (std::size_t r = 0; r < rows_ / factor_; ++r)
    for (std::size_t c = 0; c < co; ++c) up[(r * factor_) * cols_ + c * factor_] = y[r * co + c];
  correlate(up, x);
}

void ForwardOp::gram(std::span<const double> x, std::span<double> out) const {
  require_size(x, n(), "ForwardOp::gram input");
  require_size(out, n(), "ForwardOp::gram output");
  Vec y(m_);
  apply(x, y);
  adjoint(y, out);
}

Vec ForwardOp::apply(std::span<const double> x) const {
  Vec y(m_);
  apply(x, y);
  return y;
}

Vec ForwardOp::adjoint(std::span<const double> y) const {
  Vec x(n());
  adjoint(y, x);
  return x;
}

Vec ForwardOp::gram(std::span<const double> x) const {
  Vec out(n());
  gram(x, out);
  return out;
}

PowerEstimate lambda_max_gram(const ForwardOp& op, double tol, int max_iter, std::span<const double> scaling) {
  if (!(tol > 0.0)) throw ParameterError("lambda_max_gram: tol must be positive");
  const std::size_t n = op.n();
  if (!scaling.empty()) require_size(scaling, n, "lambda_max_gram scaling");

  Rng rng(0x6a09e667f3bcc908ULL);
  Vec x = uniform_vector(rng, n);
  for (auto& v : x) v += 0.5;
  Vec sx(n), ax(n);
  const auto scaled_gram = [&](const Vec& in, Vec& out) {
    if (scaling.empty()) {
      op.gram(in, out);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) sx[i] = scaling[i] * in[i];
    op.gram(sx, out);
    for (std::size_t i = 0; i < n; ++i) out[i] *= scaling[i];
  };

  PowerEstimate est;
  double nx = norm2(x);
  for (auto& v : x) v /= nx;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    scaled_gram(x, ax);
    const double rayleigh = dot(x, ax);
    est.value = rayleigh;
    est.iterations = it;
    const double nrm = norm2(ax);
    if (nrm == 0.0) {  // x in the null space: all eigenvalues seen so far are 0
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(rayleigh - prev) < tol * std::abs(rayleigh)) {
      est.converged = true;
      break;
    }
    prev = rayleigh;
    for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] / nrm;
  }
  return est;
}

Vec observe(const ForwardOp& op, const Image& truth, double sigma, Rng& rng) {
  if (truth.rows() != op.rows_in() || truth.cols() != op.cols_in())
    throw DimensionError("observe: truth image does not match the operator grid");
  Vec b = op.apply(truth.data());
  const Vec e = gaussian_noise(rng, b.size(), sigma);
  axpy(1.0, e, b);
  return b;
}

double ones_response(const ForwardOp& op) {
  const Vec ones(op.n(), 1.0);
  return norm2(op.apply(ones));
}

void save_mask(const ForwardOp& op, const std::filesystem::path& path) {
  if (op.kind() != OpKind::inpaint) throw ParameterError("save_mask: operator is not an inpainting mask");
  Vec px(op.n());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = op.mask()[i] ? 1.0 : 0.0;
  save_pgm(Image(op.rows_in(), op.cols_in(), std::move(px)), path);
}

std::vector<std::uint8_t> load_mask(const std::filesystem::path& path, std::size_t& rows, std::size_t& cols) {
  const Image img = load_pgm(path);
  rows = img.rows();
  cols = img.cols();
  std::vector<std::uint8_t> mask(img.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = img.data()[i] >= 0.5 ? 1 : 0;
  return mask;
}

}  // namespace kpnp
