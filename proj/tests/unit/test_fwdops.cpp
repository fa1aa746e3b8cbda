#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "kpnp/errors.hpp"
#include "kpnp/forward_op.hpp"

using namespace kpnp;

namespace {

std::vector<ForwardOp> sample_ops() {
  Rng rng(11);
  std::vector<ForwardOp> ops;
  ops.push_back(ForwardOp::inpaint(8, 8, 0.3, rng));
  ops.push_back(ForwardOp::blur(8, 8, BlurKernel::gaussian(5, 1.2)));
  ops.push_back(ForwardOp::blur(9, 6, BlurKernel::from_taps(3, 5, Vec{1, 2, 0, 4, 1, 0, 3, 1, 2, 5, 1, 1, 0, 2, 1})));
  ops.push_back(ForwardOp::superres(8, 8, BlurKernel::gaussian(5, 1.0), 2));
  ops.push_back(ForwardOp::superres(12, 6, BlurKernel::gaussian(3, 0.8), 3));
  return ops;
}

}  // namespace

TEST(Inpaint, FullFractionIsIdentity) {
  Rng rng(1);
  const auto op = ForwardOp::inpaint(3, 4, 1.0, rng);
  const Vec x = test::random_image(3, 4, 2).vec();
  EXPECT_EQ(op.m(), 12u);
  EXPECT_EQ(op.apply(x), x);
}

TEST(Inpaint, SampleCountRoundsFractionTimesN) {
  Rng rng(1);
  const auto op = ForwardOp::inpaint(4, 4, 0.3, rng);
  EXPECT_EQ(op.m(), 5u);
  for (std::size_t k = 1; k < op.observed().size(); ++k) EXPECT_LT(op.observed()[k - 1], op.observed()[k]);
}

TEST(Inpaint, MaskIsDeterministic) {
  Rng a(1), b(1);
  EXPECT_EQ(ForwardOp::inpaint(8, 8, 0.3, a).mask(), ForwardOp::inpaint(8, 8, 0.3, b).mask());
}

TEST(Inpaint, EmptyMaskRejected) {
  Rng rng(1);
  EXPECT_THROW(ForwardOp::inpaint(2, 2, 0.1, rng), ParameterError);
  EXPECT_THROW(ForwardOp::inpaint_from_mask(2, 2, {0, 0, 0, 0}), ParameterError);
}

TEST(Inpaint, GramIsMask) {
  Rng rng(4);
  const auto op = ForwardOp::inpaint(6, 5, 0.4, rng);
  const Vec x = test::random_image(6, 5, 8).vec();
  const Vec g = op.gram(x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(g[i], op.mask()[i] ? x[i] : 0.0);
}

TEST(Blur, SingleTapIsIdentity) {
  const auto op = ForwardOp::blur(5, 4, BlurKernel::identity());
  const Vec x = test::random_image(5, 4, 3).vec();
  EXPECT_EQ(op.apply(x), x);
}

TEST(Blur, ConstantImageUnchanged) {
  const auto op = ForwardOp::blur(7, 7, BlurKernel::gaussian(5, 1.6));
  for (double v : op.apply(Vec(49, 0.3))) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(Blur, BoxKernelOnImpulseWrapsAround) {
  const auto op = ForwardOp::blur(4, 4, BlurKernel::from_taps(3, 3, Vec(9, 1.0)));
  Vec x(16, 0.0);
  x[0] = 1.0;
  const Vec y = op.apply(x);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const bool near = (r == 0 || r == 1 || r == 3) && (c == 0 || c == 1 || c == 3);
      EXPECT_NEAR(y[r * 4 + c], near ? 1.0 / 9 : 0.0, 1e-16) << r << "," << c;
    }
  }
}

TEST(Blur, GaussianTapsNormalized) {
  const auto k = BlurKernel::gaussian(25, 1.6);
  double s = 0.0;
  for (double t : k.taps()) s += t;
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_NEAR(k(12, 13) / k(12, 12), std::exp(-1 / (2 * 1.6 * 1.6)), 1e-14);
}

TEST(Blur, KernelValidation) {
  EXPECT_THROW(BlurKernel::gaussian(4, 1.0), ParameterError);
  EXPECT_THROW(BlurKernel::gaussian(5, 0.0), ParameterError);
  EXPECT_THROW(BlurKernel::from_taps(2, 1, Vec{1, 1}), ParameterError);
  EXPECT_THROW(BlurKernel::from_taps(1, 3, Vec{1, -1, 1}), ParameterError);
  EXPECT_THROW(BlurKernel::from_taps(1, 3, Vec{0, 0, 0}), ParameterError);
  EXPECT_THROW(BlurKernel::from_taps(1, 3, Vec{1, 1}), DimensionError);
}

TEST(Blur, GramMatchesDenseProduct) {
  const auto op = ForwardOp::blur(8, 8, BlurKernel::gaussian(5, 1.3));
  const auto a = test::dense([&](auto x, auto y) { op.apply(x, y); }, 64, 64);
  const auto g = test::dense([&](auto x, auto y) { op.gram(x, y); }, 64, 64);
  EXPECT_LE((g - a.transpose() * a).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Superres, FactorOneIsBlur) {
  const auto op = ForwardOp::superres(6, 6, BlurKernel::gaussian(3, 1.0), 1);
  EXPECT_EQ(op.kind(), OpKind::blur);
  EXPECT_EQ(op.m(), 36u);
}

TEST(Superres, IdentityKernelDecimates) {
  const auto op = ForwardOp::superres(4, 4, BlurKernel::identity(), 2);
  Vec x(16);
  for (std::size_t i = 0; i < 16; ++i) x[i] = double(i);
  EXPECT_EQ(op.apply(x), (Vec{0, 2, 8, 10}));
  EXPECT_EQ(op.rows_out(), 2u);
}

TEST(Superres, IndivisibleShapeRejected) {
  EXPECT_THROW(ForwardOp::superres(5, 4, BlurKernel::identity(), 2), ParameterError);
}

TEST(ForwardOp, AdjointIdentityOnRandomPairs) {
  Rng rng(99);
  for (const auto& op : sample_ops()) {
    for (int t = 0; t < 100; ++t) {
      const Vec x = uniform_vector(rng, op.n());
      const Vec y = gaussian_noise(rng, op.m(), 1.0);
      const double lhs = dot(op.apply(x), y), rhs = dot(x, op.adjoint(y));
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1 + std::abs(lhs))) << to_string(op.kind());
    }
  }
}

TEST(ForwardOp, GramSymmetricPsd) {
  Rng rng(5);
  for (const auto& op : sample_ops()) {
    for (int t = 0; t < 20; ++t) {
      const Vec x = gaussian_noise(rng, op.n(), 1.0), y = gaussian_noise(rng, op.n(), 1.0);
      EXPECT_GE(dot(op.gram(x), x), -1e-12);
      EXPECT_NEAR(dot(op.gram(x), y), dot(x, op.gram(y)), 1e-12 * (1 + std::abs(dot(op.gram(x), y))));
    }
    EXPECT_EQ(op.gram(Vec(op.n(), 0.0)), Vec(op.n(), 0.0));
    EXPECT_GT(ones_response(op), 0.0);
  }
}

TEST(ForwardOp, LengthMismatchRejected) {
  const auto op = ForwardOp::blur(4, 4, BlurKernel::identity());
  EXPECT_THROW(op.apply(Vec(15)), DimensionError);
  EXPECT_THROW(op.adjoint(Vec(17)), DimensionError);
}

TEST(LambdaMax, InpaintAndBlurAreOne) {
  Rng rng(2);
  const auto in = lambda_max_gram(ForwardOp::inpaint(10, 10, 0.3, rng), 1e-12);
  EXPECT_TRUE(in.converged);
  EXPECT_NEAR(in.value, 1.0, 1e-10);
  const auto bl = lambda_max_gram(ForwardOp::blur(16, 16, BlurKernel::gaussian(5, 1.0)), 1e-12);
  EXPECT_NEAR(bl.value, 1.0, 1e-9);
}

TEST(LambdaMax, SuperresMatchesDenseEigensolver) {
  const auto op = ForwardOp::superres(8, 8, BlurKernel::gaussian(5, 1.6), 2);
  const auto g = test::dense([&](auto x, auto y) { op.gram(x, y); }, 64, 64);
  const double ref = symmetric_eigenvalues(g).maxCoeff();
  const auto est = lambda_max_gram(op, 1e-14, 100000);
  EXPECT_NEAR(est.value, ref, 1e-8);
  EXPECT_LE(est.value, 1.0 + 1e-12);
}

TEST(LambdaMax, ScaledVariantMatchesDense) {
  const auto op = ForwardOp::blur(6, 6, BlurKernel::gaussian(3, 1.0));
  Vec s(36);
  for (std::size_t i = 0; i < 36; ++i) s[i] = 0.5 + 0.02 * double(i);
  auto g = test::dense([&](auto x, auto y) { op.gram(x, y); }, 36, 36);
  const Eigen::VectorXd sv = Eigen::Map<const Eigen::VectorXd>(s.data(), 36);
  const Eigen::MatrixXd scaled = sv.asDiagonal() * g * sv.asDiagonal();
  EXPECT_NEAR(lambda_max_gram(op, 1e-14, 100000, s).value, symmetric_eigenvalues(scaled).maxCoeff(), 1e-8);
}

TEST(Observe, NoiselessInpaintIsRestriction) {
  Rng rng(3), noise(4);
  const auto op = ForwardOp::inpaint(5, 5, 0.5, rng);
  const Image truth = test::random_image(5, 5, 6);
  const Vec b = observe(op, truth, 0.0, noise);
  for (std::size_t j = 0; j < b.size(); ++j) EXPECT_EQ(b[j], truth.vec()[op.observed()[j]]);
}

TEST(Observe, NoiselessBlurOfConstant) {
  Rng noise(4);
  const auto op = ForwardOp::blur(6, 6, BlurKernel::gaussian(5, 1.0));
  for (double v : observe(op, Image::constant(6, 6, 0.7), 0.0, noise)) EXPECT_NEAR(v, 0.7, 1e-15);
  EXPECT_THROW(observe(op, Image(5, 6), 0.0, noise), DimensionError);
}

TEST(Files, KernelAndMaskRoundTrip) {
  auto dir = test::scratch_dir("fwdops_files");
  {
    std::ofstream out(dir / "k.txt");
    out << "1 3\n1 2 1\n";
  }
  const auto k = load_kernel(dir / "k.txt");
  EXPECT_EQ(k.cols(), 3u);
  EXPECT_DOUBLE_EQ(k(0, 1), 0.5);
  {
    std::ofstream out(dir / "bad.txt");
    out << "2 3\n1 2 1\n";
  }
  EXPECT_THROW(load_kernel(dir / "bad.txt"), FormatError);

  Rng rng(8);
  const auto op = ForwardOp::inpaint(6, 7, 0.3, rng);
  save_mask(op, dir / "m.pgm");
  std::size_t rows = 0, cols = 0;
  const auto mask = load_mask(dir / "m.pgm", rows, cols);
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(cols, 7u);
  EXPECT_EQ(mask, op.mask());
}
