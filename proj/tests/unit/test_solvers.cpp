#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "kpnp/errors.hpp"
#include "kpnp/guide.hpp"
#include "kpnp/iteration_operator.hpp"
#include "kpnp/solvers.hpp"
#include "kpnp/spectral.hpp"

using namespace kpnp;

namespace {

struct Instance {
  Image truth;
  ForwardOp op;
  Vec b;
  KernelDenoiser w;
};

Instance inpaint_instance(std::size_t side, DenoiserMode mode = DenoiserMode::dsg, double bandwidth = 0.12) {
  Rng rng(1);
  Image truth = make_phantom(side, side);
  ForwardOp op = ForwardOp::inpaint(side, side, 0.3, rng);
  Vec b = observe(op, truth, 0.03, rng);
  KernelParams p;
  p.bandwidth = bandwidth;
  KernelDenoiser w = build_denoiser(make_guide(Task::inpaint, b, op), p, mode);
  return {std::move(truth), std::move(op), std::move(b), std::move(w)};
}

Instance deblur_instance(std::size_t side, DenoiserMode mode) {
  Rng rng(2);
  Image truth = make_phantom(side, side);
  ForwardOp op = ForwardOp::blur(side, side, BlurKernel::gaussian(9, 2.0));
  Vec b = observe(op, truth, 0.03, rng);
  KernelParams p;
  p.bandwidth = 0.05;
  KernelDenoiser w = build_denoiser(make_guide(Task::deblur, b, op), p, mode);
  return {std::move(truth), std::move(op), std::move(b), std::move(w)};
}

// Doubly stochastic ring kernel: K = I/2 + (S + S^T)/4, so D = I.
SparseMatrix ring_kernel(std::size_t n) {
  std::vector<std::size_t> ptr{0}, col;
  Vec val;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<std::size_t, double>> row{{i, 0.5}, {(i + 1) % n, 0.25}, {(i + n - 1) % n, 0.25}};
    std::sort(row.begin(), row.end());
    for (auto [j, v] : row) {
      col.push_back(j);
      val.push_back(v);
    }
    ptr.push_back(col.size());
  }
  return SparseMatrix(n, ptr, col, val);
}

}  // namespace

TEST(Momentum, BeckValues) {
  EXPECT_EQ(alpha(MomentumSchedule::beck(), 1), 0.0);
  const double t2 = (1 + std::sqrt(5.0)) / 2, t3 = 0.5 * (1 + std::sqrt(1 + 4 * t2 * t2));
  EXPECT_NEAR(alpha(MomentumSchedule::beck(), 2), (t2 - 1) / t3, 1e-15);
  EXPECT_NEAR(alpha(MomentumSchedule::beck(), 2), 0.2818, 1e-4);
  EXPECT_GT(alpha(MomentumSchedule::beck(), 5000), 0.999);
}

TEST(Momentum, ClosedForms) {
  EXPECT_NEAR(alpha(MomentumSchedule::log1p(), 1), 1 - 1 / std::log(2.0), 1e-15);
  EXPECT_NEAR(alpha(MomentumSchedule::log1p(), 1), -0.4427, 1e-4);
  EXPECT_EQ(alpha(MomentumSchedule::geometric(), 3), 1 - 0.125);
  EXPECT_EQ(alpha(MomentumSchedule::chambolle(), 4), 3.0 / 7.0);
  EXPECT_EQ(alpha(MomentumSchedule::chambolle(5.0), 1), 0.0);
  EXPECT_EQ(alpha(MomentumSchedule::constant(0.3), 17), 0.3);
}

TEST(Momentum, SequenceMatchesPureForm) {
  for (auto s : {MomentumSchedule::beck(), MomentumSchedule::chambolle(), MomentumSchedule::log1p(),
                 MomentumSchedule::geometric(), MomentumSchedule::constant(0.0)}) {
    MomentumSequence seq(s);
    for (int k = 1; k <= 50; ++k) EXPECT_NEAR(seq.next(), alpha(s, k), 1e-14) << s.name();
  }
}

TEST(Momentum, ParseAndName) {
  for (const char* text : {"beck", "chambolle(3)", "log1p", "geometric", "constant(0)", "constant(0.5)"})
    EXPECT_EQ(MomentumSchedule::parse(MomentumSchedule::parse(text).name()).name(), MomentumSchedule::parse(text).name());
  EXPECT_EQ(MomentumSchedule::parse("chambolle").param, 3.0);
  EXPECT_EQ(MomentumSchedule::parse("constant(0.25)").param, 0.25);
  EXPECT_THROW(MomentumSchedule::parse("nesterov"), ConfigError);
  EXPECT_THROW(MomentumSchedule::parse("constant"), ConfigError);
  EXPECT_THROW(MomentumSchedule::parse("constant(x)"), ConfigError);
}

TEST(PnpFista, IdentityDenoiserFitsObservedPixels) {
  Rng rng(3);
  const auto op = ForwardOp::inpaint(6, 6, 0.5, rng);
  const Image truth = test::random_image(6, 6, 4);
  const Vec b = op.apply(truth.vec());
  const auto w = KernelDenoiser::nlm(SparseMatrix::identity(36));
  SolverConfig cfg;
  cfg.gamma = 0.5;
  const auto tr = pnp_fista(op, b, w, cfg, MomentumSchedule::constant(0.0), Vec(36, 0.0));
  EXPECT_TRUE(tr.converged);
  const Vec ax = op.apply(tr.x);
  for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(ax[j], b[j], 1e-8);
}

TEST(PnpFista, FixedPointIsStationary) {
  const auto in = inpaint_instance(10);
  const double gamma = 0.9;
  const auto p = IterationOperator::pnp(in.op, in.w, gamma);
  const Vec q = p.offset(in.b);
  const Vec xs = fixed_point(p, q, 1e-14);
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.max_iter = 1;
  const auto tr = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), xs);
  EXPECT_LE(dist2(tr.x, xs), 1e-10);
}

TEST(PnpFista, MatchesTwoTermRecurrence) {
  const auto in = inpaint_instance(8);
  SolverConfig cfg;
  cfg.gamma = 0.9;
  cfg.max_iter = 30;
  cfg.check_recurrence = true;
  for (auto s : {MomentumSchedule::beck(), MomentumSchedule::log1p(), MomentumSchedule::geometric()}) {
    Rng rng(5);
    const auto tr = pnp_fista(in.op, in.b, in.w, cfg, s, uniform_vector(rng, 64));
    ASSERT_TRUE(tr.recurrence_defect.has_value());
    EXPECT_LE(*tr.recurrence_defect, 1e-10);
  }
}

TEST(PnpFista, DivergenceGuardNamesIteration) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  const auto w = KernelDenoiser::nlm(SparseMatrix::identity(64));
  SolverConfig cfg;
  cfg.gamma = 50.0;  // far outside (0, 1/lambda_max)
  try {
    pnp_fista(in.op, in.b, w, cfg, MomentumSchedule::beck(), Vec(64, 0.0));
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.iteration(), 1);
  }
}

TEST(PnpFista, RejectsBadInputs) {
  const auto in = inpaint_instance(6);
  SolverConfig cfg;
  cfg.gamma = 0.0;
  EXPECT_THROW(pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(36)), ParameterError);
  cfg.gamma = 0.5;
  EXPECT_THROW(pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(35)), DimensionError);
}

TEST(PnpFista, LimitIndependentOfInitialization) {
  const auto in = inpaint_instance(16);
  SolverConfig cfg;
  cfg.gamma = 0.9;
  Rng rng(9);
  const Vec a = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(256, 0.0)).x;
  const Vec b = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), uniform_vector(rng, 256)).x;
  const Vec c = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), in.op.adjoint(in.b)).x;
  EXPECT_LE(dist2(a, b) / norm2(a), 1e-6);
  EXPECT_LE(dist2(a, c) / norm2(a), 1e-6);
}

TEST(PnpFista, LimitSatisfiesOneStepMap) {
  const auto in = deblur_instance(12, DenoiserMode::dsg);
  SolverConfig cfg;
  cfg.gamma = 0.9;
  const auto tr = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(144, 0.0));
  ASSERT_TRUE(tr.converged);
  const auto p = IterationOperator::pnp(in.op, in.w, cfg.gamma);
  EXPECT_LE(dist2(p.step(tr.x, p.offset(in.b)), tr.x), 10 * cfg.stop_tol * norm2(tr.x));
}

TEST(PnpFista, StepIsAffine) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  const auto p = IterationOperator::pnp(in.op, in.w, 0.7);
  const Vec q = p.offset(in.b);
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const Vec x = gaussian_noise(rng, 64, 1.0), y = gaussian_noise(rng, 64, 1.0);
    const Vec sx = p.step(x, q), sy = p.step(y, q);
    Vec d(64), ds(64);
    for (std::size_t i = 0; i < 64; ++i) {
      d[i] = x[i] - y[i];
      ds[i] = sx[i] - sy[i];
    }
    const Vec pd = p.apply(d);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(ds[i], pd[i], 1e-10);
  }
}

TEST(ProxQuadratic, TinyMuIsIdentity) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  Rng rng(1);
  const Vec v = uniform_vector(rng, 64);
  EXPECT_LE(dist2(prox_quadratic(in.op, in.b, 1e-12, v, 1e-14, 100), v), 1e-8);
  EXPECT_THROW(prox_quadratic(in.op, in.b, 0.0, v, 1e-10, 100), ParameterError);
}

TEST(ProxQuadratic, InpaintClosedForm) {
  const auto in = inpaint_instance(8);
  Rng rng(2);
  const Vec v = uniform_vector(rng, 64);
  const double mu = 0.7;
  const Vec x = prox_quadratic(in.op, in.b, mu, v, 1e-14, 100);
  Vec expect = v;
  for (std::size_t j = 0; j < in.b.size(); ++j) {
    const std::size_t i = in.op.observed()[j];
    expect[i] = (v[i] + mu * in.b[j]) / (1 + mu);
  }
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(x[i], expect[i], 1e-10);
}

TEST(ProxQuadratic, BlurMatchesDenseSolve) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  Rng rng(3);
  const Vec v = uniform_vector(rng, 64);
  const double mu = 2.0;
  const Vec x = prox_quadratic(in.op, in.b, mu, v, 1e-13, 500);
  const auto g = test::dense([&](auto a, auto y) { in.op.gram(a, y); }, 64, 64);
  const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(64, 64) + mu * g;
  const Vec atb = in.op.adjoint(in.b);
  Eigen::VectorXd rhs(64);
  for (int i = 0; i < 64; ++i) rhs(i) = v[std::size_t(i)] + mu * atb[std::size_t(i)];
  const Eigen::VectorXd ref = sys.ldlt().solve(rhs);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(x[std::size_t(i)], ref(i), 1e-8);
}

TEST(ProxQuadratic, IterationCapRaisesWithResidual) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  Rng rng(3);
  try {
    prox_quadratic(in.op, in.b, 50.0, uniform_vector(rng, 64), 1e-15, 1);
    FAIL();
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 1e-15);
  }
}

TEST(RedApg, FixedPointIsStationary) {
  const auto in = deblur_instance(8, DenoiserMode::dsg);
  SolverConfig cfg;  // lambda = 1, L = 2
  const auto p = IterationOperator::red(in.op, in.w, cfg.mu(), cfg.theta());
  const Vec xs = fixed_point(p, p.offset(in.b), 1e-14);
  // The iteration runs on v, whose stationary value is theta W x* + (1 - theta) x*.
  const Vec wx = in.w.apply(xs);
  Vec v0(64);
  for (std::size_t i = 0; i < 64; ++i) v0[i] = cfg.theta() * wx[i] + (1 - cfg.theta()) * xs[i];
  cfg.max_iter = 20;
  cfg.stop_tol = 0.0;
  const auto tr = red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), v0);
  for (const auto& r : tr.records) EXPECT_LE(r.step_norm, 1e-8);
  EXPECT_LE(dist2(tr.x, xs), 1e-8);
}

TEST(RedApg, ThetaOneUsesDenoiserOutput) {
  const auto in = inpaint_instance(6);
  SolverConfig cfg;
  cfg.L = 1.0;
  cfg.max_iter = 2;
  cfg.stop_tol = 0.0;
  Rng rng(8);
  const Vec v0 = uniform_vector(rng, 36);
  const auto tr = red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::constant(0.0), v0);
  const Vec x1 = prox_quadratic(in.op, in.b, cfg.mu(), v0, cfg.cg_tol, cfg.cg_max_iter);
  const Vec x2 = prox_quadratic(in.op, in.b, cfg.mu(), in.w.apply(x1), cfg.cg_tol, cfg.cg_max_iter);
  EXPECT_LE(dist2(tr.x, x2), 1e-14);
}

TEST(RedApg, LimitIndependentOfInitialization) {
  const auto in = inpaint_instance(16);
  SolverConfig cfg;
  Rng rng(9);
  const Vec a = red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(256, 0.0)).x;
  const Vec b = red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), uniform_vector(rng, 256)).x;
  EXPECT_LE(dist2(a, b) / norm2(a), 1e-6);
}

TEST(RedApg, ParameterValidation) {
  const auto in = inpaint_instance(6);
  SolverConfig cfg;
  cfg.L = 0.5;
  EXPECT_THROW(red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(36)), ParameterError);
  cfg.L = 2.0;
  cfg.lambda = -1.0;
  EXPECT_THROW(red_apg(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(36)), ParameterError);
}

TEST(ScaledPnp, UnitDegreesReproducePnp) {
  Rng rng(6);
  const auto op = ForwardOp::inpaint(6, 6, 0.5, rng);
  const Vec b = op.apply(test::random_image(6, 6, 7).vec());
  const auto w = KernelDenoiser::nlm(ring_kernel(36));
  for (double d : w.degrees()) ASSERT_EQ(d, 1.0);
  SolverConfig cfg;
  cfg.gamma = 0.8;
  cfg.max_iter = 200;
  const auto a = pnp_fista(op, b, w, cfg, MomentumSchedule::beck(), Vec(36, 0.0));
  const auto s = scaled_pnp_fista(op, b, w, cfg, MomentumSchedule::beck(), Vec(36, 0.0));
  ASSERT_EQ(a.records.size(), s.records.size());
  EXPECT_LE(dist2(a.x, s.x), 1e-12);
  ASSERT_TRUE(s.records.back().step_norm_d.has_value());
  EXPECT_NEAR(*s.records.back().step_norm_d, s.records.back().step_norm, 1e-15);
}

TEST(ScaledPnp, FixedPointIsStationary) {
  const auto in = deblur_instance(8, DenoiserMode::nlm);
  Vec s(64);
  for (std::size_t i = 0; i < 64; ++i) s[i] = 1 / std::sqrt(in.w.degrees()[i]);
  const double gamma = 0.9 / lambda_max_gram(in.op, 1e-12, 100000, s).value;
  const auto p = IterationOperator::scaled_pnp(in.op, in.w, gamma);
  const Vec xs = fixed_point(p, p.offset(in.b), 1e-14);
  SolverConfig cfg;
  cfg.gamma = gamma;
  cfg.max_iter = 1;
  EXPECT_LE(dist2(scaled_pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), xs).x, xs), 1e-10);
}

TEST(ScaledPnp, RequiresNlm) {
  const auto in = inpaint_instance(6);
  SolverConfig cfg;
  EXPECT_THROW(scaled_pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(36)), ParameterError);
}

TEST(Trace, CsvHasHeaderAndEmptyOptionalFields) {
  const auto in = inpaint_instance(6);
  SolverConfig cfg;
  cfg.max_iter = 3;
  cfg.stop_tol = 0.0;
  TraceOptions opts;
  opts.reference = Vec(36, 0.0);
  const auto tr = pnp_fista(in.op, in.b, in.w, cfg, MomentumSchedule::beck(), Vec(36, 0.1), opts);
  auto dir = test::scratch_dir("trace_csv");
  write_trace_csv(tr, dir / "t.csv");
  std::ifstream f(dir / "t.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "k,alpha,step_norm,dist_to_ref,psnr");
  std::getline(f, line);
  EXPECT_EQ(line.rfind("1,0,", 0), 0u);
  EXPECT_EQ(line.back(), ',');  // psnr missing
  int rows = 1;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
