#include "kpnp/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include "kpnp/errors.hpp"

namespace kpnp {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col, Vec val)
    : n_(n), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
  if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_.size() ||
      col_.size() != val_.size()) {
    throw DimensionError("SparseMatrix: inconsistent CSR arrays");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_[p] >= n_) throw DimensionError("SparseMatrix: column index out of range");
      if (p > row_ptr_[i] && col_[p] <= col_[p - 1])
        throw DimensionError("SparseMatrix: column indices must be strictly increasing per row");
    }
  }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> ptr(n + 1), col(n);
  for (std::size_t i = 0; i <= n; ++i) ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) col[i] = i;
  return SparseMatrix(n, std::move(ptr), std::move(col), Vec(n, 1.0));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return val_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require_size(x, n_, "SparseMatrix::multiply input");
  require_size(y, n_, "SparseMatrix::multiply output");
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += val_[p] * x[col_[p]];
    y[i] = s;
  }
}

Vec SparseMatrix::multiply(std::span<const double> x) const {
  Vec y(n_);
  multiply(x, y);
  return y;
}

Vec SparseMatrix::row_sums() const {
  Vec s(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s[i] += val_[p];
  return s;
}

double SparseMatrix::symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      worst = std::max(worst, std::abs(val_[p] - at(col_[p], i)));
  return worst;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d[i * n_ + col_[p]] = val_[p];
  return d;
}

void write_triplets(const SparseMatrix& a, const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.string().c_str(), "w"), &std::fclose);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < a.n(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_vals(i);
    for (std::size_t p = 0; p < cols.size(); ++p) std::fprintf(f.get(), "%zu %zu %.17g\n", i, cols[p], vals[p]);
  }
}

}  // namespace kpnp
