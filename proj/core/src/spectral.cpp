#include "kpnp/spectral.hpp"

#include <algorithm>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kpnp/errors.hpp"

namespace kpnp {

PowerEstimate power_iteration(const IterationOperator& p, double tol, int max_iter, Rng& rng) {
  if (!(tol > 0.0)) throw ParameterError("power_iteration: tol must be positive");
  const std::size_t n = p.n();
  Vec x = uniform_vector(rng, n);
  for (auto& v : x) v -= 0.5;
  Vec px(n), mx(n);

  PowerEstimate est;
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double nx = norm2(x);
    if (nx == 0.0) {
      est.value = 0.0;
      est.converged = true;
      break;
    }
    for (auto& v : x) v /= nx;
    p.apply(x, px);
    p.metric(x, mx);
    const double xmx = dot(x, mx);
    const double value = xmx > 0.0 ? std::abs(dot(px, mx) / xmx) : norm2(px);
    est.value = value;
    est.iterations = it;
    if (std::abs(value - prev) < tol * value || value == 0.0) {
      est.converged = true;
      break;
    }
    prev = value;
    std::swap(x, px);
  }
  return est;
}

PowerEstimate lanczos_radius(const IterationOperator& p, double tol, int max_iter, Rng& rng, int krylov_dim) {
  if (!(tol > 0.0)) throw ParameterError("lanczos_radius: tol must be positive");
  if (!p.self_adjoint()) throw ParameterError("lanczos_radius: operator is not self-adjoint in its metric");
  const std::size_t n = p.n();
  const int kmax = static_cast<int>(std::min<std::size_t>(std::max(krylov_dim, 2), n));

  PowerEstimate est;
  est.method = "lanczos";
  Vec start = uniform_vector(rng, n);
  for (auto& v : start) v -= 0.5;

  std::vector<Vec> q, mq;  // basis and its image under M
  Vec w(n), mw(n);
  while (est.iterations < max_iter) {
    p.metric(start, mw);
    double nrm = dot(start, mw);
    if (!(nrm > 0.0)) {
      Rng fallback(rng.next());
      return power_iteration(p, tol, max_iter - est.iterations, fallback);
    }
    nrm = std::sqrt(nrm);
    q.assign(1, start);
    mq.assign(1, mw);
    for (auto& v : q[0]) v /= nrm;
    for (auto& v : mq[0]) v /= nrm;

    std::vector<double> alpha, beta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    double theta = 0.0;
    Eigen::VectorXd ritz;
    for (int j = 0; j < kmax && est.iterations < max_iter; ++j) {
      p.apply(q[j], w);
      ++est.iterations;
      alpha.push_back(dot(w, mq[j]));
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < q.size(); ++i) axpy(-dot(w, mq[i]), q[i], w);
      p.metric(w, mw);
      const double b2 = dot(w, mw);
      const double b = b2 > 0.0 ? std::sqrt(b2) : 0.0;

      const int k = static_cast<int>(alpha.size());
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
      Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      Eigen::Index top = 0;
      tri.eigenvalues().cwiseAbs().maxCoeff(&top);
      theta = tri.eigenvalues()(top);
      ritz = tri.eigenvectors().col(top);
      est.value = std::abs(theta);
      const double residual = b * std::abs(ritz(k - 1));
      if (residual <= tol * est.value || est.value == 0.0 || b <= 1e-300) {
        est.converged = true;
        return est;
      }
      beta.push_back(b);
      q.emplace_back(w);
      mq.emplace_back(mw);
      for (auto& v : q.back()) v /= b;
      for (auto& v : mq.back()) v /= b;
    }
    // Restart from the current top Ritz vector.
    std::fill(start.begin(), start.end(), 0.0);
    for (Eigen::Index i = 0; i < ritz.size(); ++i) axpy(ritz(i), q[static_cast<std::size_t>(i)], start);
  }
  return est;
}

PowerEstimate spectral_radius(const IterationOperator& p, double tol, int max_iter, Rng& rng) {
  if (p.self_adjoint()) return lanczos_radius(p, tol, max_iter, rng);
  return power_iteration(p, tol, max_iter, rng);
}

RhoR rho_R_from_rho_P(double rho_p) {
  if (!(rho_p >= 0.0)) throw ParameterError("rho_R_from_rho_P: rho_P must be >= 0");
  return {std::sqrt(rho_p), rho_p < 1.0};
}

Vec fixed_point(const IterationOperator& p, std::span<const double> q, double tol, long max_applications) {
  const std::size_t n = p.n();
  require_size(q, n, "fixed_point offset");
  Vec x(n, 0.0);
  const double qn = norm2(q);
  if (qn == 0.0) return x;
  Vec next(n);
  for (long it = 0; it < max_applications; ++it) {
    p.apply(x, next);
    axpy(1.0, q, next);
    const double r = dist2(next, x);
    std::swap(x, next);
    if (r <= tol * qn) return x;
    if (!all_finite(x)) throw ConvergenceError("fixed_point: Richardson iteration diverged", r / qn);
  }
  throw ConvergenceError("fixed_point: application cap reached", dist2(p.step(x, q), x) / qn);
}

namespace {

// Largest |eigenvalue| of a symmetric map on the orthogonal complement of
// `perron`, by deflated power iteration.
PowerEstimate deflated_power(const LinearMap& map, std::span<const double> perron, double tol, int max_iter) {
  const std::size_t n = perron.size();
  Vec u(perron.begin(), perron.end());
  const double un = norm2(u);
  for (auto& v : u) v /= un;
  const auto project = [&](Vec& v) { axpy(-dot(u, v), u, v); };

  Rng rng(0xbb67ae8584caa73bULL);
  Vec x = uniform_vector(rng, n), y(n);
  PowerEstimate est;
  double prev = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    project(x);
    const double nx = norm2(x);
    if (nx == 0.0) {
      est.converged = true;
      break;
    }
    for (auto& v : x) v /= nx;
    map(x, y);
    project(y);
    const double value = std::abs(dot(x, y));
    est.value = value;
    est.iterations = it;
    if (std::abs(value - prev) < tol * value) {
      est.converged = true;
      break;
    }
    prev = value;
    std::swap(x, y);
  }
  return est;
}

}  // namespace

AssumptionReport check_assumption(const AssumptionInputs& in, std::size_t n_small_cap) {
  AssumptionReport rep;
  const std::size_t n = in.n;

  const Vec ones(n, 1.0);
  Vec w1(n);
  in.apply_w(ones, w1);
  double defect = 0.0;
  for (double v : w1) defect = std::max(defect, std::abs(v - 1.0));
  rep.stochastic = {defect <= 1e-10, defect, "||W1 - 1||_inf"};

  Vec a1(in.m);
  in.apply_a(ones, a1);
  const double a1n = norm2(a1);
  rep.ones_response = {a1n > 1e-10 * std::sqrt(static_cast<double>(n)), a1n, "||A1||_2"};

  if (n <= n_small_cap && n <= kDenseLimit) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(materialize(in.apply_w_symmetric, n, n));
    rep.spectrum_checked = true;
    rep.spectrum_min = ev[0];
    rep.spectrum_max = ev[ev.size() - 1];
    rep.spectrum = {rep.spectrum_min >= -1e-8 && rep.spectrum_max <= 1.0 + 1e-8, rep.spectrum_min,
                    "dense sigma(" + in.spectral_label + ")"};
    const double second = n >= 2 ? ev[ev.size() - 2] : -1.0;
    rep.fixed_space = {second <= 1.0 - 1e-10, second, "dense second eigenvalue of " + in.spectral_label};
  } else {
    rep.spectrum = {true, 0.0, "skipped (n above dense cap)"};
    const PowerEstimate e = deflated_power(in.apply_w_symmetric, in.perron, 1e-12, 100000);
    rep.fixed_space = {e.converged && e.value <= 1.0 - 1e-10, e.value,
                       "deflated power method on " + in.spectral_label +
                           (e.converged ? "" : " (not converged)")};
  }
  return rep;
}

AssumptionReport check_assumption(const KernelDenoiser& denoiser, const ForwardOp& op, std::size_t n_small_cap) {
  AssumptionInputs in;
  in.n = denoiser.n();
  in.m = op.m();
  in.apply_w = [&](std::span<const double> x, std::span<double> y) { denoiser.apply(x, y); };
  in.apply_a = [&](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  if (denoiser.mode() == DenoiserMode::dsg) {
    in.apply_w_symmetric = in.apply_w;
    in.perron = Vec(in.n, 1.0);
    in.spectral_label = "W";
  } else {
    in.apply_w_symmetric = [&](std::span<const double> x, std::span<double> y) { denoiser.apply_symmetric(x, y); };
    in.perron.resize(in.n);
    for (std::size_t i = 0; i < in.n; ++i) in.perron[i] = std::sqrt(denoiser.degrees()[i]);
    in.spectral_label = "W_s";
  }
  return check_assumption(in, n_small_cap);
}

SpectralReport certify(const IterationOperator& p, const std::string& task, double grid_value,
                       const CertifyOptions& options) {
  SpectralReport rep;
  rep.task = task;
  rep.denoiser_mode = to_string(p.denoiser().mode());
  rep.algorithm = to_string(p.kind());
  rep.grid_value = grid_value;
  rep.gamma = p.gamma();
  rep.mu = p.mu();
  rep.theta = p.theta();
  rep.power_tol = options.power_tol;

  const ForwardOp& op = p.forward_op();
  if (p.kind() == IterKind::scaled_pnp) {
    Vec scaling(p.n());
    for (std::size_t i = 0; i < scaling.size(); ++i) scaling[i] = 1.0 / std::sqrt(p.denoiser().degrees()[i]);
    rep.lambda_max = lambda_max_gram(op, 1e-12, 100000, scaling).value;
  } else {
    rep.lambda_max = lambda_max_gram(op, 1e-12, 100000).value;
  }
  rep.gamma_upper = 1.0 / rep.lambda_max;
  if (p.kind() != IterKind::red) rep.step_ok = p.gamma() > 0.0 && p.gamma() < rep.gamma_upper;

  Rng rng(options.seed);
  rep.rho_P = spectral_radius(p, options.power_tol, options.power_max_iter, rng);
  const RhoR r = rho_R_from_rho_P(rep.rho_P.value);
  rep.rho_R = r.value;
  rep.assumptions = check_assumption(p.denoiser(), op, options.dense_cap);
  rep.certified = rep.rho_P.converged && r.certifying && rep.step_ok && rep.assumptions.all_ok();

  if (options.keep_eigenvalues && p.n() <= options.dense_cap) {
    const auto dense =
        dense_oracle([&](std::span<const double> x, std::span<double> y) { p.apply(x, y); }, p.n(), false);
    rep.eigenvalues.emplace(dense.eigenvalues.data(), dense.eigenvalues.data() + dense.eigenvalues.size());
  }
  return rep;
}

std::string SpectralReport::csv_header() { return "task,denoiser_mode,gamma_or_invL,rho_P,rho_R,certified"; }

std::string SpectralReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%.17g,%.17g,%s", task.c_str(), denoiser_mode.c_str(), grid_value,
                rho_P.value, rho_R, certified ? "true" : "false");
  return buf;
}

std::string SpectralReport::key_value() const {
  std::ostringstream out;
  out.precision(17);
  const auto b = [](bool v) { return v ? "true" : "false"; };
  out << "task=" << task << '\n'
      << "algorithm=" << algorithm << '\n'
      << "denoiser_mode=" << denoiser_mode << '\n'
      << "gamma_or_invL=" << grid_value << '\n'
      << "gamma=" << gamma << '\n'
      << "mu=" << mu << '\n'
      << "theta=" << theta << '\n'
      << "lambda_max=" << lambda_max << '\n'
      << "gamma_upper=" << gamma_upper << '\n'
      << "step_ok=" << b(step_ok) << '\n'
      << "rho_P=" << rho_P.value << '\n'
      << "rho_P_converged=" << b(rho_P.converged) << '\n'
      << "rho_P_iterations=" << rho_P.iterations << '\n'
      << "rho_P_method=" << rho_P.method << '\n'
      << "power_tol=" << power_tol << '\n'
      << "rho_R=" << rho_R << '\n'
      << "stochastic_ok=" << b(assumptions.stochastic.ok) << '\n'
      << "stochastic_defect=" << assumptions.stochastic.value << '\n'
      << "ones_response_ok=" << b(assumptions.ones_response.ok) << '\n'
      << "ones_response=" << assumptions.ones_response.value << '\n'
      << "spectrum_checked=" << b(assumptions.spectrum_checked) << '\n'
      << "spectrum_ok=" << b(assumptions.spectrum.ok) << '\n'
      << "spectrum_method=" << assumptions.spectrum.method << '\n'
      << "spectrum_min=" << assumptions.spectrum_min << '\n'
      << "spectrum_max=" << assumptions.spectrum_max << '\n'
      << "fixed_space_ok=" << b(assumptions.fixed_space.ok) << '\n'
      << "fixed_space_method=" << assumptions.fixed_space.method << '\n'
      << "second_eigenvalue=" << assumptions.fixed_space.value << '\n'
      << "certified=" << b(certified) << '\n';
  if (eigenvalues) {
    out << "eigenvalues=";
    for (std::size_t i = 0; i < eigenvalues->size(); ++i)
      out << (i ? ";" : "") << (*eigenvalues)[i].real()
          << ((*eigenvalues)[i].imag() != 0.0 ? "+" + std::to_string((*eigenvalues)[i].imag()) + "i" : "");
    out << '\n';
  }
  return out.str();
}

}  // namespace kpnp
