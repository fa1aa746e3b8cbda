#include "kpnp/iteration_operator.hpp"

#include "kpnp/errors.hpp"
#include "kpnp/solvers.hpp"

namespace kpnp {

const char* to_string(IterKind kind) {
  switch (kind) {
    case IterKind::pnp: return "pnp_fista";
    case IterKind::red: return "red_apg";
    case IterKind::scaled_pnp: return "scaled_pnp_fista";
  }
  return "?";
}

namespace {
void check_sizes(const ForwardOp& op, const KernelDenoiser& denoiser) {
  if (op.n() != denoiser.n()) throw DimensionError("IterationOperator: denoiser size does not match the operator");
}
}  // namespace

IterationOperator IterationOperator::pnp(const ForwardOp& op, const KernelDenoiser& denoiser, double gamma) {
  check_sizes(op, denoiser);
  if (!(gamma >= 0.0)) throw ParameterError("IterationOperator: gamma must be >= 0");
  IterationOperator p(IterKind::pnp, op, denoiser);
  p.gamma_ = gamma;
  return p;
}

IterationOperator IterationOperator::red(const ForwardOp& op, const KernelDenoiser& denoiser, double mu,
                                         double theta, double cg_tol, int cg_max_iter) {
  check_sizes(op, denoiser);
  if (!(mu > 0.0)) throw ParameterError("IterationOperator: mu must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ParameterError("IterationOperator: theta must lie in [0, 1]");
  IterationOperator p(IterKind::red, op, denoiser);
  p.mu_ = mu;
  p.theta_ = theta;
  p.cg_tol_ = cg_tol;
  p.cg_max_iter_ = cg_max_iter;
  return p;
}

IterationOperator IterationOperator::scaled_pnp(const ForwardOp& op, const KernelDenoiser& denoiser,
                                                double gamma) {
  check_sizes(op, denoiser);
  if (denoiser.mode() != DenoiserMode::nlm) throw ParameterError("IterationOperator: scaled kind needs nlm weights");
  if (!(gamma >= 0.0)) throw ParameterError("IterationOperator: gamma must be >= 0");
  IterationOperator p(IterKind::scaled_pnp, op, denoiser);
  p.gamma_ = gamma;
  return p;
}

void IterationOperator::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = this->n();
  require_size(x, n, "IterationOperator::apply input");
  require_size(y, n, "IterationOperator::apply output");
  Vec t(n);
  switch (kind_) {
    case IterKind::pnp:
    case IterKind::scaled_pnp: {
      op_->gram(x, t);
      const auto deg = denoiser_->degrees();
      for (std::size_t i = 0; i < n; ++i)
        t[i] = x[i] - gamma_ * (kind_ == IterKind::pnp ? t[i] : t[i] / deg[i]);
      denoiser_->apply(t, y);
      return;
    }
    case IterKind::red: {
      denoiser_->apply(x, t);
      for (std::size_t i = 0; i < n; ++i) t[i] = theta_ * t[i] + (1.0 - theta_) * x[i];
      // H t with H = (I + mu A^T A)^{-1}: the prox with b = 0.
      const Vec zero_b(op_->m(), 0.0);
      const Vec h = prox_quadratic(*op_, zero_b, mu_, t, cg_tol_, cg_max_iter_);
      std::copy(h.begin(), h.end(), y.begin());
      return;
    }
  }
}

Vec IterationOperator::apply(std::span<const double> x) const {
  Vec y(n());
  apply(x, y);
  return y;
}

Vec IterationOperator::offset(std::span<const double> b) const {
  require_size(b, op_->m(), "IterationOperator::offset measurements");
  const std::size_t n = this->n();
  Vec atb = op_->adjoint(b);
  Vec out(n);
  switch (kind_) {
    case IterKind::pnp:
    case IterKind::scaled_pnp: {
      const auto deg = denoiser_->degrees();
      for (std::size_t i = 0; i < n; ++i) atb[i] *= kind_ == IterKind::pnp ? gamma_ : gamma_ / deg[i];
      denoiser_->apply(atb, out);
      return out;
    }
    case IterKind::red: {
      // r = mu H A^T b = prox(0) for measurements b.
      const Vec zero(n, 0.0);
      return prox_quadratic(*op_, b, mu_, zero, cg_tol_, cg_max_iter_);
    }
  }
  return out;
}

Vec IterationOperator::step(std::span<const double> x, std::span<const double> offset) const {
  require_size(offset, n(), "IterationOperator::step offset");
  Vec y = apply(x);
  axpy(1.0, offset, y);
  return y;
}

void IterationOperator::metric(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = this->n();
  op_->gram(x, y);
  switch (kind_) {
    case IterKind::pnp:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - gamma_ * y[i];
      return;
    case IterKind::red:
      for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + mu_ * y[i];
      return;
    case IterKind::scaled_pnp: {
      const auto deg = denoiser_->degrees();
      for (std::size_t i = 0; i < n; ++i) y[i] = deg[i] * x[i] - gamma_ * y[i];
      return;
    }
  }
}

}  // namespace kpnp
