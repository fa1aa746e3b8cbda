#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kpnp/forward_op.hpp"
#include "kpnp/image.hpp"
#include "kpnp/kernel_denoiser.hpp"
#include "kpnp/momentum.hpp"
#include "kpnp/vec.hpp"

namespace kpnp {

struct SolverConfig {
  double gamma = 0.9;       // PnP step size; must lie in (0, 1/lambda_max)
  double lambda = 1.0;      // RED regularization weight
  double L = 2.0;           // RED parameter, L >= 1
  int max_iter = 20000;
  double stop_tol = 1e-9;   // on ||x_k - x_{k-1}|| / ||x_k||
  double cg_tol = 1e-10;
  int cg_max_iter = 500;
  /// pnp_fista only: cross-check the first iterations against the two-term
  /// recurrence x_k = (1 + a_{k-1}) P x_{k-1} - a_{k-1} P x_{k-2} + q.
  bool check_recurrence = false;

  double theta() const noexcept { return 1.0 / L; }
  double mu() const noexcept { return 1.0 / (lambda * L); }

  void validate_pnp() const;
  void validate_red() const;
};

struct TraceRecord {
  int k = 0;
  double alpha = 0.0;
  double step_norm = 0.0;                  // ||x_k - x_{k-1}||_2
  std::optional<double> dist_to_ref;       // ||x_k - x_ref||_2
  std::optional<double> psnr;              // against the ground truth
  std::optional<double> step_norm_d;       // ||x_k - x_{k-1}||_D (scaled solver)
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  Vec x;                  // final iterate
  bool converged = false;
  int iterations = 0;
  /// Largest relative deviation seen by the recurrence cross-check.
  std::optional<double> recurrence_defect;
};

/// Optional per-iteration diagnostics.
struct TraceOptions {
  std::optional<Vec> reference;     // enables dist_to_ref
  std::optional<Image> truth;       // enables psnr
};

/// alpha-PnP-FISTA: y_1 = x_0;
///   x_k = W (y_k - gamma A^T (A y_k - b)),
///   y_{k+1} = x_k + alpha_k (x_k - x_{k-1}).
/// Throws DivergenceError if an iterate is non-finite or its norm exceeds
/// 1e8 (1 + ||x_0||).
SolverTrace pnp_fista(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                      const SolverConfig& config, const MomentumSchedule& schedule, std::span<const double> x0,
                      const TraceOptions& options = {});

/// Solves (I + mu A^T A) x = v + mu A^T b by conjugate gradients started at
/// v; stops at relative residual <= cg_tol. Throws ConvergenceError after
/// cg_max_iter iterations.
Vec prox_quadratic(const ForwardOp& op, std::span<const double> b, double mu, std::span<const double> v,
                   double cg_tol, int cg_max_iter);

/// alpha-RED-APG with theta = 1/L, mu = 1/(lambda L):
///   x_k = prox_{mu f}(v_{k-1}),
///   y_k = x_k + alpha_k (x_k - x_{k-1})   (x_0 := x_1),
///   v_k = theta W y_k + (1 - theta) y_k.
SolverTrace red_apg(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                    const SolverConfig& config, const MomentumSchedule& schedule, std::span<const double> v0,
                    const TraceOptions& options = {});

/// PnP-FISTA in the D-weighted inner product, for the NLM denoiser:
///   x_k = W (y_k - gamma D^{-1} A^T (A y_k - b)).
/// Requires an nlm-mode denoiser.
SolverTrace scaled_pnp_fista(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                             const SolverConfig& config, const MomentumSchedule& schedule,
                             std::span<const double> x0, const TraceOptions& options = {});

/// CSV with header "k,alpha,step_norm,dist_to_ref,psnr"; missing optional
/// columns are empty fields.
void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path);

}  // namespace kpnp
