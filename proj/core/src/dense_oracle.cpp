#include "kpnp/dense_oracle.hpp"

#include <string>
#include <vector>

#include "kpnp/errors.hpp"

namespace kpnp {

Eigen::MatrixXd materialize(const LinearMap& map, std::size_t n_in, std::size_t n_out) {
  if (n_in > kDenseLimit || n_out > kDenseLimit)
    throw ParameterError("dense oracle: dimension exceeds " + std::to_string(kDenseLimit));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(n_in));
  std::vector<double> e(n_in, 0.0), col(n_out);
  for (std::size_t j = 0; j < n_in; ++j) {
    e[j] = 1.0;
    map(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n_out; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return m;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense oracle: symmetric eigensolver failed", 0.0);
  return solver.eigenvalues();
}

Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("dense oracle: eigensolver failed", 0.0);
  return solver.eigenvalues();
}

DenseSpectrum dense_oracle(const LinearMap& map, std::size_t n, bool symmetric) {
  DenseSpectrum out;
  out.matrix = materialize(map, n, n);
  if (symmetric)
    out.eigenvalues = symmetric_eigenvalues(out.matrix).cast<std::complex<double>>();
  else
    out.eigenvalues = general_eigenvalues(out.matrix);
  return out;
}

Eigen::MatrixXd momentum_companion(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  r.topLeftCorner(n, n) = 2.0 * p;
  r.topRightCorner(n, n) = -p;
  r.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  return r;
}

double max_modulus(const Eigen::VectorXcd& eigenvalues) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) m = std::max(m, std::abs(eigenvalues[i]));
  return m;
}

}  // namespace kpnp
