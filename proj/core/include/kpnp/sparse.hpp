#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "kpnp/vec.hpp"

namespace kpnp {

/// Compressed sparse rows; column indices ascending within each row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col, Vec val);

  /// n x n identity.
  static SparseMatrix identity(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return val_.size(); }
  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col() const noexcept { return col_; }
  std::span<const double> val() const noexcept { return val_; }
  std::span<double> val() noexcept { return val_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return std::span(col_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const double> row_vals(std::size_t i) const {
    return std::span(val_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  /// Entry lookup by binary search; 0 if absent.
  double at(std::size_t i, std::size_t j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vec multiply(std::span<const double> x) const;

  /// Row sums, K 1.
  Vec row_sums() const;

  /// max |A_ij - A_ji| over the stored pattern (and its transpose).
  double symmetry_defect() const;

  /// Dense row-major copy; callers bound n.
  std::vector<double> to_dense() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  Vec val_;
};

/// "i j value" per line, sorted by (i, j), values at full precision.
void write_triplets(const SparseMatrix& a, const std::filesystem::path& path);

}  // namespace kpnp
