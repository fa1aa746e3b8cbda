#include <gtest/gtest.h>

#include "helpers.hpp"
#include "kpnp/errors.hpp"
#include "kpnp/guide.hpp"
#include "kpnp/iteration_operator.hpp"
#include "kpnp/spectral.hpp"

using namespace kpnp;

namespace {

struct Instance {
  ForwardOp op;
  Vec b;
  KernelDenoiser w;
};

Instance make_instance(Task task, std::size_t side, DenoiserMode mode, std::uint64_t seed = 1) {
  Rng rng(seed);
  const Image truth = make_phantom(side, side);
  std::optional<ForwardOp> op;
  if (task == Task::inpaint) op.emplace(ForwardOp::inpaint(side, side, 0.3, rng));
  if (task == Task::deblur) op.emplace(ForwardOp::blur(side, side, BlurKernel::gaussian(9, 2.0)));
  if (task == Task::superres) op.emplace(ForwardOp::superres(side, side, BlurKernel::gaussian(9, 2.0), 2));
  Vec b = observe(*op, truth, 0.03, rng);
  KernelParams p;
  p.bandwidth = 0.12;
  KernelDenoiser w = build_denoiser(make_guide(task, b, *op), p, mode);
  return {std::move(*op), std::move(b), std::move(w)};
}

Eigen::MatrixXd dense_p(const IterationOperator& p) {
  return test::dense([&](auto x, auto y) { p.apply(x, y); }, p.n(), p.n());
}

double lambda_max(const ForwardOp& op) { return lambda_max_gram(op, 1e-13, 100000).value; }

}  // namespace

TEST(IterationOperator, ZeroGammaIsDenoiser) {
  const auto in = make_instance(Task::inpaint, 6, DenoiserMode::dsg);
  const auto p = IterationOperator::pnp(in.op, in.w, 0.0);
  Rng rng(1);
  const Vec x = uniform_vector(rng, 36);
  EXPECT_EQ(p.apply(x), in.w.apply(x));
}

TEST(IterationOperator, RedThetaZeroOnFullMask) {
  Rng rng(1);
  const auto op = ForwardOp::inpaint(5, 5, 1.0, rng);
  const auto w = build_denoiser(test::random_image(5, 5, 2), KernelParams{}, DenoiserMode::dsg);
  const double mu = 0.6;
  const auto p = IterationOperator::red(op, w, mu, 0.0);
  for (double v : p.apply(Vec(25, 1.0))) EXPECT_NEAR(v, 1 / (1 + mu), 1e-12);
}

TEST(IterationOperator, DenseAssemblyMatchesProduct) {
  const auto in = make_instance(Task::inpaint, 8, DenoiserMode::dsg);
  const double gamma = 0.7;
  const auto p = IterationOperator::pnp(in.op, in.w, gamma);
  const auto w = test::dense([&](auto x, auto y) { in.w.apply(x, y); }, 64, 64);
  const auto g = test::dense([&](auto x, auto y) { in.op.gram(x, y); }, 64, 64);
  const Eigen::MatrixXd ref = w * (Eigen::MatrixXd::Identity(64, 64) - gamma * g);
  EXPECT_LE((dense_p(p) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IterationOperator, RedMatchesDenseComposition) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::dsg);
  const double mu = 0.5, theta = 0.5;
  const auto p = IterationOperator::red(in.op, in.w, mu, theta);
  const auto w = test::dense([&](auto x, auto y) { in.w.apply(x, y); }, 64, 64);
  const auto g = test::dense([&](auto x, auto y) { in.op.gram(x, y); }, 64, 64);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(64, 64);
  const Eigen::MatrixXd ref = (id + mu * g).inverse() * (theta * w + (1 - theta) * id);
  EXPECT_LE((dense_p(p) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SpectralRadius, DenoiserAloneIsOne) {
  const auto in = make_instance(Task::inpaint, 8, DenoiserMode::dsg);
  Rng rng(3);
  const auto est = spectral_radius(IterationOperator::pnp(in.op, in.w, 0.0), 1e-12, 100000, rng);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.value, 1.0, 1e-10);
}

TEST(SpectralRadius, MatchesDenseOracleAtSmallN) {
  for (Task task : {Task::inpaint, Task::deblur, Task::superres}) {
    const auto in = make_instance(task, 8, DenoiserMode::dsg);
    const auto p = IterationOperator::pnp(in.op, in.w, 0.9 / lambda_max(in.op));
    const double ref = max_modulus(general_eigenvalues(dense_p(p)));
    Rng rng(4);
    const auto est = spectral_radius(p, 1e-12, 100000, rng);
    EXPECT_TRUE(est.converged);
    EXPECT_NEAR(est.value, ref, 1e-8) << to_string(task);
  }
}

TEST(SpectralRadius, ScaledKindMatchesSymmetrizedSpectrum) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::nlm);
  Vec s(64);
  for (std::size_t i = 0; i < 64; ++i) s[i] = 1 / std::sqrt(in.w.degrees()[i]);
  const double gamma = 0.9 / lambda_max_gram(in.op, 1e-13, 100000, s).value;
  const auto p = IterationOperator::scaled_pnp(in.op, in.w, gamma);
  // sigma(P) = sigma(Ws G) with G = I - gamma D^{-1/2} A^T A D^{-1/2}.
  const auto ws = test::dense([&](auto x, auto y) { in.w.apply_symmetric(x, y); }, 64, 64);
  const auto g = test::dense([&](auto x, auto y) { in.op.gram(x, y); }, 64, 64);
  const Eigen::VectorXd sv = Eigen::Map<const Eigen::VectorXd>(s.data(), 64);
  const Eigen::MatrixXd gs = Eigen::MatrixXd::Identity(64, 64) - gamma * sv.asDiagonal() * g * sv.asDiagonal();
  const double ref = max_modulus(general_eigenvalues(ws * gs));
  EXPECT_NEAR(max_modulus(general_eigenvalues(dense_p(p))), ref, 1e-10);
  Rng rng(5);
  EXPECT_NEAR(spectral_radius(p, 1e-12, 100000, rng).value, ref, 1e-8);
}

TEST(SpectralRadius, PowerIterationWithinRelativeTolerance) {
  for (Task task : {Task::deblur, Task::superres}) {
    const auto in = make_instance(task, 16, DenoiserMode::dsg);
    const auto p = IterationOperator::pnp(in.op, in.w, 0.5 / lambda_max(in.op));
    const double ref = max_modulus(general_eigenvalues(dense_p(p)));
    Rng rng(6);
    const auto est = power_iteration(p, 1e-13, 200000, rng);
    EXPECT_EQ(std::string(est.method), "power");
    EXPECT_LE(std::abs(est.value - ref) / ref, 1e-6) << to_string(task);
  }
}

TEST(SpectralRadius, NlmPnpFallsBackToPowerIteration) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::nlm);
  const auto p = IterationOperator::pnp(in.op, in.w, 0.5);
  EXPECT_FALSE(p.self_adjoint());
  Rng rng(7);
  EXPECT_EQ(std::string(spectral_radius(p, 1e-10, 100000, rng).method), "power");
  EXPECT_THROW(lanczos_radius(p, 1e-10, 100, rng), ParameterError);
}

TEST(RhoR, SquareRootRelation) {
  EXPECT_EQ(rho_R_from_rho_P(0.0).value, 0.0);
  EXPECT_EQ(rho_R_from_rho_P(0.25).value, 0.5);
  EXPECT_TRUE(rho_R_from_rho_P(0.25).certifying);
  EXPECT_FALSE(rho_R_from_rho_P(1.0).certifying);
  EXPECT_THROW(rho_R_from_rho_P(-0.1), ParameterError);
}

TEST(RhoR, CompanionMatrixModulusIsSqrtRhoP) {
  for (Task task : {Task::inpaint, Task::deblur}) {
    const auto in = make_instance(task, 8, DenoiserMode::dsg);
    const auto p = IterationOperator::pnp(in.op, in.w, 0.9 / lambda_max(in.op));
    const Eigen::MatrixXd dp = dense_p(p);
    const double rho_p = max_modulus(general_eigenvalues(dp));
    const Eigen::VectorXcd ev = general_eigenvalues(momentum_companion(dp));
    EXPECT_NEAR(max_modulus(ev), std::sqrt(rho_p), 1e-7);
    for (const auto& e : ev) EXPECT_LE(std::abs(e), std::sqrt(rho_p) + 1e-7);
  }
}

TEST(FixedPoint, ZeroOffsetAndDenseSolve) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::dsg);
  const auto p = IterationOperator::pnp(in.op, in.w, 0.9 / lambda_max(in.op));
  EXPECT_EQ(fixed_point(p, Vec(64, 0.0), 1e-12), Vec(64, 0.0));
  const Vec q = p.offset(in.b);
  const Vec x = fixed_point(p, q, 1e-13);
  const Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(64, 64) - dense_p(p);
  const Eigen::VectorXd ref = sys.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(q.data(), 64));
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(x[std::size_t(i)], ref(i), 1e-8);
}

TEST(FixedPoint, CapRaises) {
  const auto in = make_instance(Task::inpaint, 6, DenoiserMode::dsg);
  const auto p = IterationOperator::pnp(in.op, in.w, 0.5);
  EXPECT_THROW(fixed_point(p, p.offset(in.b), 1e-14, 3), ConvergenceError);
}

TEST(DenseOracle, IdentityAndDiagonal) {
  const auto id = dense_oracle([](auto x, auto y) { std::copy(x.begin(), x.end(), y.begin()); }, 5, true);
  EXPECT_TRUE(id.matrix.isIdentity());
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(id.eigenvalues(i).real(), 1.0, 1e-15);
  const auto diag = dense_oracle(
      [](auto x, auto y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = 0.1 * double(i + 1) * x[i];
      },
      9, false);
  std::vector<double> ev;
  for (const auto& e : diag.eigenvalues) ev.push_back(e.real());
  std::sort(ev.begin(), ev.end());
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(ev[i], 0.1 * double(i + 1), 1e-14);
  EXPECT_THROW(materialize([](auto, auto) {}, kDenseLimit + 1, 1), ParameterError);
}

TEST(DenseOracle, DsgWeightsHaveRealSpectrum) {
  const auto w = build_denoiser(test::random_image(5, 5, 3), KernelParams{}, DenoiserMode::dsg);
  const auto d = dense_oracle([&](auto x, auto y) { w.apply(x, y); }, 25, false);
  for (const auto& e : d.eigenvalues) EXPECT_LE(std::abs(e.imag()), 1e-10);
}

TEST(Assumption, DsgInpaintAllVerdictsHold) {
  const auto in = make_instance(Task::inpaint, 8, DenoiserMode::dsg);
  const auto rep = check_assumption(in.w, in.op);
  EXPECT_TRUE(rep.stochastic.ok);
  EXPECT_TRUE(rep.ones_response.ok);
  EXPECT_TRUE(rep.spectrum_checked);
  EXPECT_TRUE(rep.spectrum.ok);
  EXPECT_TRUE(rep.fixed_space.ok);
  EXPECT_TRUE(rep.all_ok());
}

TEST(Assumption, NlmChecksSimilarSymmetricMatrix) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::nlm);
  const auto rep = check_assumption(in.w, in.op);
  EXPECT_TRUE(rep.all_ok());
  EXPECT_NE(rep.spectrum.method.find("W_s"), std::string::npos);
}

TEST(Assumption, ZeroOperatorFailsOnesResponse) {
  const auto w = build_denoiser(test::random_image(6, 6, 1), KernelParams{}, DenoiserMode::dsg);
  AssumptionInputs in;
  in.n = 36;
  in.m = 36;
  in.apply_w = [&](auto x, auto y) { w.apply(x, y); };
  in.apply_w_symmetric = in.apply_w;
  in.perron = Vec(36, 1.0 / 6.0);
  in.apply_a = [](auto, auto y) { std::fill(y.begin(), y.end(), 0.0); };
  const auto rep = check_assumption(in);
  EXPECT_FALSE(rep.ones_response.ok);
  EXPECT_TRUE(rep.stochastic.ok);
  EXPECT_FALSE(rep.all_ok());
}

TEST(Assumption, IdentityDenoiserFailsFixedSpace) {
  Rng rng(2);
  const auto op = ForwardOp::inpaint(6, 6, 0.3, rng);
  AssumptionInputs in;
  in.n = 36;
  in.m = op.m();
  in.apply_w = [](auto x, auto y) { std::copy(x.begin(), x.end(), y.begin()); };
  in.apply_w_symmetric = in.apply_w;
  in.perron = Vec(36, 1.0 / 6.0);
  in.apply_a = [&](auto x, auto y) { op.apply(x, y); };
  const auto rep = check_assumption(in);
  EXPECT_TRUE(rep.stochastic.ok);
  EXPECT_FALSE(rep.fixed_space.ok);
}

TEST(Assumption, LargeInstancesUseDeflatedPowerMethod) {
  const auto in = make_instance(Task::inpaint, 12, DenoiserMode::dsg);
  const auto dense_rep = check_assumption(in.w, in.op, 1024);
  const auto power_rep = check_assumption(in.w, in.op, 16);
  EXPECT_FALSE(power_rep.spectrum_checked);
  EXPECT_TRUE(power_rep.fixed_space.ok);
  EXPECT_NEAR(power_rep.fixed_space.value, dense_rep.fixed_space.value, 1e-6);
}

TEST(IterationSpectrum, PnpSpectrumInUnitIntervalForRandomSteps) {
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const Task task = t % 3 == 0 ? Task::inpaint : t % 3 == 1 ? Task::deblur : Task::superres;
    const auto in = make_instance(task, 8, DenoiserMode::dsg, 100 + std::uint64_t(t));
    const double gamma = (0.02 + 0.96 * rng.uniform()) / lambda_max(in.op);
    const Eigen::VectorXcd ev = general_eigenvalues(dense_p(IterationOperator::pnp(in.op, in.w, gamma)));
    for (const auto& e : ev) {
      EXPECT_NEAR(e.imag(), 0.0, 1e-8);
      EXPECT_GE(e.real(), -1e-8);
      EXPECT_LT(e.real(), 1.0);
    }
  }
}

TEST(IterationSpectrum, RedSpectrumInUnitIntervalOnGrid) {
  const auto in = make_instance(Task::deblur, 8, DenoiserMode::dsg);
  for (double mu : {0.5, 1.0, 2.0})
    for (double theta : {0.25, 0.5, 1.0}) {
      const Eigen::VectorXcd ev = general_eigenvalues(dense_p(IterationOperator::red(in.op, in.w, mu, theta)));
      for (const auto& e : ev) {
        EXPECT_GE(e.real(), -1e-8);
        EXPECT_LT(e.real(), 1.0);
      }
    }
}

TEST(Certify, ReportFieldsAndCsv) {
  const auto in = make_instance(Task::inpaint, 8, DenoiserMode::dsg);
  const double lmax = lambda_max(in.op);
  CertifyOptions opt;
  opt.keep_eigenvalues = true;
  const auto rep = certify(IterationOperator::pnp(in.op, in.w, 0.5 / lmax), "inpaint", 0.5, opt);
  EXPECT_TRUE(rep.certified);
  EXPECT_TRUE(rep.step_ok);
  EXPECT_NEAR(rep.rho_R, std::sqrt(rep.rho_P.value), 1e-15);
  ASSERT_TRUE(rep.eigenvalues.has_value());
  EXPECT_EQ(rep.eigenvalues->size(), 64u);
  EXPECT_EQ(SpectralReport::csv_header(), "task,denoiser_mode,gamma_or_invL,rho_P,rho_R,certified");
  EXPECT_EQ(rep.csv_row().rfind("inpaint,dsg,0.5,", 0), 0u);
  EXPECT_NE(rep.key_value().find("certified=true"), std::string::npos);

  const auto bad = certify(IterationOperator::pnp(in.op, in.w, 1.5 / lmax), "inpaint", 1.5);
  EXPECT_FALSE(bad.step_ok);
  EXPECT_FALSE(bad.certified);
}
