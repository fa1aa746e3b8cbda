#pragma once

#include <span>

#include "kpnp/forward_op.hpp"
#include "kpnp/kernel_denoiser.hpp"
#include "kpnp/vec.hpp"

namespace kpnp {

enum class IterKind { pnp, red, scaled_pnp };

const char* to_string(IterKind kind);

/// Linear part P of one frozen-momentum update, x -> P x + offset:
///
///   pnp        P = W (I - gamma A^T A),                 offset q = gamma W A^T b
///   red        P = (I + mu A^T A)^{-1} (theta W + (1 - theta) I),
///                                                        offset r = mu (I + mu A^T A)^{-1} A^T b
///   scaled_pnp P = W (I - gamma D^{-1} A^T A),          offset q = gamma W D^{-1} A^T b
///
/// Holds references: the operator and denoiser must outlive it.
class IterationOperator {
 public:
  static IterationOperator pnp(const ForwardOp& op, const KernelDenoiser& denoiser, double gamma);
  static IterationOperator red(const ForwardOp& op, const KernelDenoiser& denoiser, double mu, double theta,
                               double cg_tol = 1e-12, int cg_max_iter = 1000);
  static IterationOperator scaled_pnp(const ForwardOp& op, const KernelDenoiser& denoiser, double gamma);

  IterKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return op_->n(); }
  double gamma() const noexcept { return gamma_; }
  double mu() const noexcept { return mu_; }
  double theta() const noexcept { return theta_; }
  const ForwardOp& forward_op() const noexcept { return *op_; }
  const KernelDenoiser& denoiser() const noexcept { return *denoiser_; }

  void apply(std::span<const double> x, std::span<double> y) const;
  Vec apply(std::span<const double> x) const;

  /// q (pnp kinds) or r (red) for measurements b.
  Vec offset(std::span<const double> b) const;

  /// One full update with frozen momentum: P x + offset.
  Vec step(std::span<const double> x, std::span<const double> offset) const;

  /// M x for the symmetric positive definite M in which P is self-adjoint
  /// when W is symmetric PSD and the step parameters are admissible:
  ///   pnp: I - gamma A^T A,  red: I + mu A^T A,  scaled_pnp: D - gamma A^T A.
  void metric(std::span<const double> x, std::span<double> y) const;
  /// True when P is self-adjoint in `metric`: symmetric (dsg) weights, or
  /// the scaled kind with nlm weights.
  bool self_adjoint() const noexcept {
    return denoiser_->mode() == DenoiserMode::dsg || kind_ == IterKind::scaled_pnp;
  }

 private:
  IterationOperator(IterKind kind, const ForwardOp& op, const KernelDenoiser& denoiser)
      : kind_(kind), op_(&op), denoiser_(&denoiser) {}

  IterKind kind_;
  const ForwardOp* op_;
  const KernelDenoiser* denoiser_;
  double gamma_ = 0.0, mu_ = 0.0, theta_ = 1.0;
  double cg_tol_ = 1e-12;
  int cg_max_iter_ = 1000;
};

}  // namespace kpnp
