#include "kpnp/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "kpnp/errors.hpp"
#include "kpnp/metrics.hpp"

namespace kpnp {

void SolverConfig::validate_pnp() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
  if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(stop_tol >= 0.0)) throw ParameterError("stop_tol must be >= 0");
}

void SolverConfig::validate_red() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
  if (!(L >= 1.0) || !std::isfinite(L)) throw ParameterError("L must be >= 1");
  if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (!(stop_tol >= 0.0)) throw ParameterError("stop_tol must be >= 0");
  if (!(cg_tol > 0.0)) throw ParameterError("cg_tol must be positive");
  if (cg_max_iter < 1) throw ParameterError("cg_max_iter must be >= 1");
}

namespace {

// Records one iteration, applies the divergence guard and reports whether
// the stopping rule fired.
class Tracker {
 public:
  Tracker(const SolverConfig& config, const TraceOptions& options, std::span<const double> x0,
          std::span<const double> degrees = {})
      : config_(config), options_(options), degrees_(degrees), limit_(1e8 * (1.0 + norm2(x0))) {
    if (options_.reference) require_size(*options_.reference, x0.size(), "trace reference");
    if (options_.truth) require_size(options_.truth->data(), x0.size(), "trace ground truth");
  }

  bool record(SolverTrace& trace, int k, double alpha, const Vec& x, const Vec& x_prev, bool may_stop) {
    const double xn = norm2(x);
    if (!all_finite(x)) throw DivergenceError(k, "non-finite iterate");
    if (xn > limit_) throw DivergenceError(k, "iterate norm exceeded the divergence guard");

    TraceRecord rec;
    rec.k = k;
    rec.alpha = alpha;
    rec.step_norm = dist2(x, x_prev);
    if (options_.reference) rec.dist_to_ref = dist2(x, *options_.reference);
    if (options_.truth) rec.psnr = psnr(Image(options_.truth->rows(), options_.truth->cols(), x), *options_.truth);
    if (!degrees_.empty()) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += degrees_[i] * (x[i] - x_prev[i]) * (x[i] - x_prev[i]);
      rec.step_norm_d = std::sqrt(s);
    }
    trace.records.push_back(rec);
    trace.iterations = k;
    const bool stop = may_stop && (rec.step_norm <= config_.stop_tol * xn);
    if (stop) trace.converged = true;
    return stop;
  }

 private:
  const SolverConfig& config_;
  const TraceOptions& options_;
  std::span<const double> degrees_;
  double limit_;
};

// y <- x + a (x - x_prev)
void extrapolate(const Vec& x, const Vec& x_prev, double a, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * (x[i] - x_prev[i]);
}

// Shared FISTA-type loop for the PnP solvers. `forward_backward(y, out)`
// evaluates x_k from y_k.
template <class Step>
SolverTrace fista_loop(const SolverConfig& config, const MomentumSchedule& schedule, std::span<const double> x0,
                       const TraceOptions& options, std::span<const double> degrees, Step&& forward_backward) {
  SolverTrace trace;
  Tracker tracker(config, options, x0, degrees);
  MomentumSequence seq(schedule);
  Vec x_prev(x0.begin(), x0.end());
  Vec y = x_prev;
  Vec x(x0.size());
  for (int k = 1; k <= config.max_iter; ++k) {
    forward_backward(y, x);
    const double a = seq.next();
    const bool stop = tracker.record(trace, k, a, x, x_prev, true);
    extrapolate(x, x_prev, a, y);
    std::swap(x_prev, x);
    if (stop) break;
  }
  trace.x = std::move(x_prev);
  return trace;
}

}  // namespace

SolverTrace pnp_fista(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                      const SolverConfig& config, const MomentumSchedule& schedule, std::span<const double> x0,
                      const TraceOptions& options) {
  config.validate_pnp();
  const std::size_t n = op.n();
  require_size(b, op.m(), "pnp_fista measurements");
  require_size(x0, n, "pnp_fista initial iterate");
  if (denoiser.n() != n) throw DimensionError("pnp_fista: denoiser size does not match the operator");

  const Vec atb = op.adjoint(b);
  Vec g(n), z(n);
  // x = W(z) with z = y - gamma (A^T A y - A^T b)
  const auto step = [&](const Vec& y, Vec& out) {
    op.gram(y, g);
    for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - config.gamma * (g[i] - atb[i]);
    denoiser.apply(z, out);
  };

  if (!config.check_recurrence) return fista_loop(config, schedule, x0, options, {}, step);

  // Linear part P v = W(v - gamma A^T A v) and offset q = gamma W A^T b.
  Vec pg(n), pz(n);
  const auto apply_p = [&](const Vec& v) {
    Vec out(n);
    op.gram(v, pg);
    for (std::size_t i = 0; i < n; ++i) pz[i] = v[i] - config.gamma * pg[i];
    denoiser.apply(pz, out);
    return out;
  };
  Vec q(n);
  {
    Vec scaled = atb;
    for (auto& v : scaled) v *= config.gamma;
    denoiser.apply(scaled, q);
  }

  // The wrapped step sees every x_k; keep x_0..x_{11} and alpha_1..alpha_11.
  constexpr int kChecked = 10;
  std::vector<Vec> history{Vec(x0.begin(), x0.end())};
  std::vector<double> alphas;
  MomentumSequence replay(schedule);
  double worst = 0.0;
  int k = 0;
  const auto checked_step = [&](const Vec& y, Vec& out) {
    step(y, out);
    ++k;  // `out` is x_k
    if (k > kChecked + 1) return;
    alphas.push_back(replay.next());  // alpha_k
    if (k >= 2) {
      const double a = alphas[static_cast<std::size_t>(k - 2)];  // alpha_{k-1}
      const Vec p1 = apply_p(history[static_cast<std::size_t>(k - 1)]);
      const Vec p2 = apply_p(history[static_cast<std::size_t>(k - 2)]);
      double dev = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double pred = (1.0 + a) * p1[i] - a * p2[i] + q[i];
        dev = std::max(dev, std::abs(pred - out[i]));
      }
      worst = std::max(worst, dev / (1.0 + norm_inf(out)));
    }
    history.push_back(out);
  };
  SolverTrace trace = fista_loop(config, schedule, x0, options, {}, checked_step);
  trace.recurrence_defect = worst;
  if (worst > 1e-10)
    throw std::logic_error("pnp_fista: iterates deviate from the two-term recurrence by " + std::to_string(worst));
  return trace;
}

Vec prox_quadratic(const ForwardOp& op, std::span<const double> b, double mu, std::span<const double> v,
                   double cg_tol, int cg_max_iter) {
  if (!(mu > 0.0)) throw ParameterError("prox_quadratic: mu must be positive");
  const std::size_t n = op.n();
  require_size(b, op.m(), "prox_quadratic measurements");
  require_size(v, n, "prox_quadratic input");

  Vec rhs = op.adjoint(b);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = v[i] + mu * rhs[i];
  const double rhs_norm = norm2(rhs);
  Vec x(v.begin(), v.end());
  if (rhs_norm == 0.0) return Vec(n, 0.0);

  Vec ax(n), r(n), p(n);
  op.gram(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - (x[i] + mu * ax[i]);
  p = r;
  double rr = dot(r, r);
  for (int it = 0;; ++it) {
    const double rel = std::sqrt(rr) / rhs_norm;
    if (rel <= cg_tol) return x;
    if (it >= cg_max_iter) throw ConvergenceError("prox_quadratic: CG did not converge", rel);
    op.gram(p, ax);
    for (std::size_t i = 0; i < n; ++i) ax[i] = p[i] + mu * ax[i];
    const double step = rr / dot(p, ax);
    axpy(step, p, x);
    axpy(-step, ax, r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
}

SolverTrace red_apg(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                    const SolverConfig& config, const MomentumSchedule& schedule, std::span<const double> v0,
                    const TraceOptions& options) {
  config.validate_red();
  const std::size_t n = op.n();
  require_size(b, op.m(), "red_apg measurements");
  require_size(v0, n, "red_apg initial iterate");
  if (denoiser.n() != n) throw DimensionError("red_apg: denoiser size does not match the operator");

  const double mu = config.mu();
  const double theta = config.theta();
  SolverTrace trace;
  Tracker tracker(config, options, v0);
  MomentumSequence seq(schedule);

  Vec v(v0.begin(), v0.end());
  Vec x_prev, x, y(n), wy(n);
  for (int k = 1; k <= config.max_iter; ++k) {
    x = prox_quadratic(op, b, mu, v, config.cg_tol, config.cg_max_iter);
    if (k == 1) x_prev = x;
    const double a = seq.next();
    const bool stop = tracker.record(trace, k, a, x, x_prev, k > 1);
    extrapolate(x, x_prev, a, y);
    denoiser.apply(y, wy);
    for (std::size_t i = 0; i < n; ++i) v[i] = theta * wy[i] + (1.0 - theta) * y[i];
    std::swap(x_prev, x);
    if (stop) break;
  }
  trace.x = std::move(x_prev);
  return trace;
}

SolverTrace scaled_pnp_fista(const ForwardOp& op, std::span<const double> b, const KernelDenoiser& denoiser,
                             const SolverConfig& config, const MomentumSchedule& schedule,
                             std::span<const double> x0, const TraceOptions& options) {
  config.validate_pnp();
  if (denoiser.mode() != DenoiserMode::nlm) throw ParameterError("scaled_pnp_fista: requires the nlm denoiser");
  const std::size_t n = op.n();
  require_size(b, op.m(), "scaled_pnp_fista measurements");
  require_size(x0, n, "scaled_pnp_fista initial iterate");
  if (denoiser.n() != n) throw DimensionError("scaled_pnp_fista: denoiser size does not match the operator");

  const Vec atb = op.adjoint(b);
  const auto deg = denoiser.degrees();
  Vec g(n), z(n);
  const auto step = [&](const Vec& y, Vec& out) {
    op.gram(y, g);
    for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - config.gamma * (g[i] - atb[i]) / deg[i];
    denoiser.apply(z, out);
  };
  return fista_loop(config, schedule, x0, options, deg, step);
}

void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.string().c_str(), "w"), &std::fclose);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::fputs("k,alpha,step_norm,dist_to_ref,psnr\n", f.get());
  for (const auto& r : trace.records) {
    std::fprintf(f.get(), "%d,%.17g,%.17g,", r.k, r.alpha, r.step_norm);
    if (r.dist_to_ref) std::fprintf(f.get(), "%.17g", *r.dist_to_ref);
    std::fputc(',', f.get());
    if (r.psnr) std::fprintf(f.get(), "%.17g", *r.psnr);
    std::fputc('\n', f.get());
  }
  if (std::ferror(f.get())) throw IoError("write failed: " + path.string());
}

}  // namespace kpnp
