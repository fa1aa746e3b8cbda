#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpnp/dense_oracle.hpp"
#include "kpnp/forward_op.hpp"
#include "kpnp/iteration_operator.hpp"
#include "kpnp/kernel_denoiser.hpp"
#include "kpnp/rng.hpp"

namespace kpnp {

/// Power iteration for rho(P). The estimate is the Rayleigh quotient in the
/// metric of IterationOperator::metric, falling back to the Euclidean norm
/// ratio if that metric is not positive on the iterate. Converged once
/// successive estimates differ by < tol * estimate.
PowerEstimate power_iteration(const IterationOperator& p, double tol, int max_iter, Rng& rng);

/// Lanczos with full reorthogonalization in the metric inner product, with
/// explicit restarts every `krylov_dim` steps. Requires p.self_adjoint().
/// Converged once the Ritz residual bound beta_k |s_k| of the top Ritz
/// value is <= tol * value, which places an eigenvalue within that distance.
PowerEstimate lanczos_radius(const IterationOperator& p, double tol, int max_iter, Rng& rng,
                             int krylov_dim = 300);

/// rho(P): lanczos_radius when P is self-adjoint in its metric, otherwise
/// power_iteration. Power iteration stalls on the clustered eigenvalues near
/// 1 that unobserved pixels produce. iterations counts applications of P.
PowerEstimate spectral_radius(const IterationOperator& p, double tol, int max_iter, Rng& rng);

struct RhoR {
  double value = 0.0;
  bool certifying = false;  // rho_P < 1
};

/// rho(R_inf) = sqrt(rho(P)) for sigma(P) in [0, 1). Throws ParameterError
/// on negative input.
RhoR rho_R_from_rho_P(double rho_p);

/// Solves (I - P) x = q by Richardson iteration x <- P x + q, stopping when
/// ||x - (P x + q)|| <= tol ||q||. Throws ConvergenceError after
/// max_applications applications of P.
Vec fixed_point(const IterationOperator& p, std::span<const double> q, double tol,
                long max_applications = 1'000'000);

struct Verdict {
  bool ok = false;
  double value = 0.0;
  std::string method;
};

/// Checks of the denoiser / forward-operator pair:
///  stochastic    ||W 1 - 1||_inf <= 1e-10
///  ones_response ||A 1||_2 > 1e-10 sqrt(n)
///  spectrum      dense sigma(W) in [-1e-8, 1 + 1e-8]   (n <= cap only)
///  fixed_space   second-largest eigenvalue <= 1 - 1e-10, i.e. fix(W) = span(1)
/// For the nlm mode the spectral checks run on Ws = D^{-1/2} K D^{-1/2},
/// which is similar to W.
struct AssumptionReport {
  Verdict stochastic;
  Verdict ones_response;
  Verdict spectrum;
  Verdict fixed_space;
  bool spectrum_checked = false;
  double spectrum_min = 0.0;
  double spectrum_max = 0.0;

  /// Assumption: sigma(W) in [0,1] and ker(A) & fix(W) = {0}.
  bool all_ok() const {
    return stochastic.ok && ones_response.ok && fixed_space.ok && (!spectrum_checked || spectrum.ok);
  }
};

/// Generic inputs so tests can inject operators fwdops cannot construct.
struct AssumptionInputs {
  std::size_t n = 0;
  std::size_t m = 0;
  LinearMap apply_w;            // the denoiser
  LinearMap apply_w_symmetric;  // W itself (symmetric) or a symmetric similar matrix
  Vec perron;                   // eigenvector of apply_w_symmetric for eigenvalue 1
  LinearMap apply_a;            // forward operator, R^n -> R^m
  std::string spectral_label = "W";
};

AssumptionReport check_assumption(const AssumptionInputs& in, std::size_t n_small_cap = 1024);
AssumptionReport check_assumption(const KernelDenoiser& denoiser, const ForwardOp& op,
                                  std::size_t n_small_cap = 1024);

struct CertifyOptions {
  double power_tol = 1e-12;
  int power_max_iter = 200000;
  std::uint64_t seed = 12345;
  std::size_t dense_cap = 1024;
  bool keep_eigenvalues = false;  // dense spectrum of P when n <= dense_cap
};

struct SpectralReport {
  std::string task;
  std::string denoiser_mode;
  std::string algorithm;
  double grid_value = 0.0;  // gamma * lambda_max (pnp kinds) or 1/L (red)
  double gamma = 0.0, mu = 0.0, theta = 0.0;
  double lambda_max = 0.0;  // of A^T A, or of D^{-1/2} A^T A D^{-1/2} for scaled_pnp
  double gamma_upper = 0.0; // 1 / lambda_max
  bool step_ok = true;      // gamma inside (0, gamma_upper); always true for red
  PowerEstimate rho_P;
  double rho_R = 0.0;
  bool certified = false;
  AssumptionReport assumptions;
  std::optional<std::vector<std::complex<double>>> eigenvalues;
  double power_tol = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
  std::string key_value() const;
};

/// Spectral radius of P, rho(R_inf), the step-size interval and the
/// assumption verdicts for one instance. certified means the power method
/// converged, rho_R < 1, the step is admissible and all verdicts hold.
SpectralReport certify(const IterationOperator& p, const std::string& task, double grid_value,
                       const CertifyOptions& options = {});

}  // namespace kpnp
