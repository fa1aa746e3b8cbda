#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kpnp/image.hpp"
#include "kpnp/rng.hpp"
#include "kpnp/vec.hpp"

namespace kpnp {

/// Nonnegative 2-D blur taps with odd side lengths, normalized to sum 1.
class BlurKernel {
 public:
  /// Isotropic Gaussian truncated to a size x size window.
  static BlurKernel gaussian(std::size_t size, double sigma);
  /// Explicit taps (row-major). Normalized to sum 1; rejects even sides,
  /// negative taps and an all-zero kernel.
  static BlurKernel from_taps(std::size_t rows, std::size_t cols, Vec taps);
  static BlurKernel identity() { return from_taps(1, 1, {1.0}); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> taps() const noexcept { return taps_; }
  double operator()(std::size_t r, std::size_t c) const { return taps_[r * cols_ + c]; }

 private:
  BlurKernel(std::size_t rows, std::size_t cols, Vec taps)
      : rows_(rows), cols_(cols), taps_(std::move(taps)) {}
  std::size_t rows_ = 1, cols_ = 1;
  Vec taps_;
};

/// ASCII kernel file: first line "h w", then h*w taps row-major.
BlurKernel load_kernel(const std::filesystem::path& path);

enum class OpKind { inpaint, blur, superres };

const char* to_string(OpKind kind);

/// Matrix-free forward operator A : R^n -> R^m with an exact adjoint.
///
///  - inpaint: row selection of the observed pixels (in increasing index
///    order), so A^T A is the 0/1 diagonal mask.
///  - blur: circular 2-D convolution, m = n.
///  - superres: circular blur followed by keeping every `factor`-th pixel
///    starting from (0, 0); m = n / factor^2.
class ForwardOp {
 public:
  /// Samples exactly round(fraction * n) distinct pixels with a partial
  /// Fisher-Yates shuffle driven by `rng`.
  static ForwardOp inpaint(std::size_t rows, std::size_t cols, double fraction, Rng& rng);
  /// Mask entries nonzero = observed.
  static ForwardOp inpaint_from_mask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> mask);
  static ForwardOp blur(std::size_t rows, std::size_t cols, BlurKernel kernel);
  static ForwardOp superres(std::size_t rows, std::size_t cols, BlurKernel kernel, std::size_t factor);

  OpKind kind() const noexcept { return kind_; }
  std::size_t rows_in() const noexcept { return rows_; }
  std::size_t cols_in() const noexcept { return cols_; }
  std::size_t n() const noexcept { return rows_ * cols_; }
  std::size_t m() const noexcept { return m_; }
  /// Measurement grid for blur/superres; (m, 1) for inpainting.
  std::size_t rows_out() const noexcept;
  std::size_t cols_out() const noexcept;
  std::size_t factor() const noexcept { return factor_; }

  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  const std::vector<std::size_t>& observed() const noexcept { return observed_; }
  const std::optional<BlurKernel>& kernel() const noexcept { return kernel_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  void adjoint(std::span<const double> y, std::span<double> x) const;
  /// A^T A x, composed from apply and adjoint.
  void gram(std::span<const double> x, std::span<double> out) const;

  Vec apply(std::span<const double> x) const;
  Vec adjoint(std::span<const double> y) const;
  Vec gram(std::span<const double> x) const;

 private:
  ForwardOp() = default;
  void convolve(std::span<const double> x, std::span<double> y) const;
  void correlate(std::span<const double> y, std::span<double> x) const;
  void build_wrap_tables();

  OpKind kind_ = OpKind::inpaint;
  std::size_t rows_ = 0, cols_ = 0, m_ = 0, factor_ = 1;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> observed_;
  std::optional<BlurKernel> kernel_;
  // row_wrap_[u * rows_ + r] = (r + u - ch) mod rows_, likewise for columns.
  std::vector<std::size_t> row_wrap_, col_wrap_;
};

struct PowerEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  const char* method = "power";
};

/// Largest eigenvalue of S A^T A S by power iteration from a fixed seeded
/// start, where S = diag(scaling) (identity when `scaling` is empty). Stops
/// once successive Rayleigh quotients differ by < tol * estimate.
PowerEstimate lambda_max_gram(const ForwardOp& op, double tol = 1e-10, int max_iter = 10000,
                              std::span<const double> scaling = {});

/// b = A truth + N(0, sigma^2) noise.
Vec observe(const ForwardOp& op, const Image& truth, double sigma, Rng& rng);

/// ||A 1||_2.
double ones_response(const ForwardOp& op);

/// Mask as PGM: 255 = observed, 0 = missing.
void save_mask(const ForwardOp& op, const std::filesystem::path& path);
std::vector<std::uint8_t> load_mask(const std::filesystem::path& path, std::size_t& rows, std::size_t& cols);

}  // namespace kpnp
