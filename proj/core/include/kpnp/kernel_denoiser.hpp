#pragma once

#include <cstddef>
#include <span>

#include "kpnp/image.hpp"
#include "kpnp/sparse.hpp"
#include "kpnp/vec.hpp"

namespace kpnp {

enum class WindowShape { box, hat };

/// Parameters of the affinity kernel
///   K_ij = exp(-|patch_i - patch_j|^2 / (2 bandwidth^2 p)) h(i - j)
/// with p the number of pixels in a patch and h the spatial window.
struct KernelParams {
  int patch_radius = 2;    // 5x5 patches
  int window_radius = 5;   // 11x11 search window
  double bandwidth = 0.1;
  // The separable hat keeps K positive semidefinite (Schur product of two
  // PSD kernels); a box window does not.
  WindowShape window = WindowShape::hat;

  /// Throws ParameterError on patch_radius < 0, window_radius < 1 or
  /// bandwidth <= 0.
  void validate() const;
};

/// Builds the symmetric, nonnegative affinity matrix from a guide image.
/// Patches use symmetric reflection at the borders; the search window is
/// truncated there. K_ii = 1 and K_ij = K_ji bit-for-bit.
SparseMatrix build_kernel(const Image& guide, const KernelParams& params);

enum class DenoiserMode { nlm, dsg };

const char* to_string(DenoiserMode mode);

/// Linear kernel denoiser x -> W x with W derived from K.
///
///  - nlm: W = D^{-1} K, D = diag(K 1). Row-stochastic, not symmetric.
///  - dsg: W = Ws / s + diag(1 - c / s) with Ws = D^{-1/2} K D^{-1/2},
///    c = Ws 1 and s = max_i c_i. Symmetric and doubly stochastic.
class KernelDenoiser {
 public:
  /// Throws ParameterError if K has a row with nonpositive sum or a
  /// negative entry.
  static KernelDenoiser nlm(SparseMatrix kernel);
  static KernelDenoiser dsg(SparseMatrix kernel);

  DenoiserMode mode() const noexcept { return mode_; }
  std::size_t n() const noexcept { return kernel_.n(); }
  const SparseMatrix& kernel() const noexcept { return kernel_; }
  const SparseMatrix& weights() const noexcept { return weights_; }
  /// Diagonal of D.
  std::span<const double> degrees() const noexcept { return degrees_; }
  /// s = ||Ws 1||_inf for dsg; 1 for nlm.
  double norm_scale() const noexcept { return norm_scale_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  Vec apply(std::span<const double> x) const;

  /// Ws x = D^{-1/2} K D^{-1/2} x, the symmetric matrix similar to the NLM
  /// weights.
  void apply_symmetric(std::span<const double> x, std::span<double> y) const;

 private:
  KernelDenoiser(DenoiserMode mode, SparseMatrix kernel);

  DenoiserMode mode_;
  SparseMatrix kernel_;
  Vec degrees_;
  Vec inv_sqrt_degrees_;
  SparseMatrix weights_;
  double norm_scale_ = 1.0;
};

inline KernelDenoiser build_nlm(SparseMatrix kernel) { return KernelDenoiser::nlm(std::move(kernel)); }
inline KernelDenoiser build_dsg(SparseMatrix kernel) { return KernelDenoiser::dsg(std::move(kernel)); }

KernelDenoiser build_denoiser(const Image& guide, const KernelParams& params, DenoiserMode mode);

}  // namespace kpnp
