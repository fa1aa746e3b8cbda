#pragma once

// Dense materialization of matrix-free maps for small problems. The O(n^2)
// memory cost is the scaling limit; n is capped at kDenseLimit.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace kpnp {

inline constexpr std::size_t kDenseLimit = 4096;

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

/// Columns M e_j for j < n_in. Throws ParameterError beyond kDenseLimit.
Eigen::MatrixXd materialize(const LinearMap& map, std::size_t n_in, std::size_t n_out);

struct DenseSpectrum {
  Eigen::MatrixXd matrix;
  /// Symmetric path: real, ascending. General path: unordered, complex.
  Eigen::VectorXcd eigenvalues;
};

/// Materializes an n x n map and computes its eigenvalues, with the
/// symmetric solver when `symmetric` is set (only the lower triangle is
/// read) and the real nonsymmetric solver otherwise.
DenseSpectrum dense_oracle(const LinearMap& map, std::size_t n, bool symmetric);

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m);
Eigen::VectorXcd general_eigenvalues(const Eigen::MatrixXd& m);

/// R = [[2P, -P], [I, 0]], the limit of the momentum state transition.
Eigen::MatrixXd momentum_companion(const Eigen::MatrixXd& p);

/// max_i |lambda_i|
double max_modulus(const Eigen::VectorXcd& eigenvalues);

}  // namespace kpnp
