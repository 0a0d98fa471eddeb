#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hessmooth {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using Index = std::int32_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-row sparse matrix. Immutable once built: every operation
/// returns a new matrix. Column indices within a row are sorted and unique
/// (duplicates are summed at construction).
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols);
  explicit SparseMatrix(Storage storage);

  static SparseMatrix from_triplets(Index rows, Index cols,
                                    std::span<const Triplet> triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix diagonal(const Vector& d);

  Index rows() const { return static_cast<Index>(m_.rows()); }
  Index cols() const { return static_cast<Index>(m_.cols()); }
  Index nnz() const { return static_cast<Index>(m_.nonZeros()); }
  double coeff(Index r, Index c) const { return m_.coeff(r, c); }

  /// y = A x through the active SIMD kernel.
  Vector multiply(const Vector& x) const;
  /// y = A^T x.
  Vector multiply_transpose(const Vector& x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;
  /// diag(w) * A
  SparseMatrix row_scaled(const Vector& w) const;
  SparseMatrix operator*(const SparseMatrix& rhs) const;
  SparseMatrix operator+(const SparseMatrix& rhs) const;
  SparseMatrix operator-(const SparseMatrix& rhs) const;

  /// Sub-matrix with the given rows and columns, in the given order.
  SparseMatrix select(std::span<const Index> row_ids,
                      std::span<const Index> col_ids) const;
  SparseMatrix select_rows(std::span<const Index> row_ids) const;

  Vector diagonal_entries() const;
  bool is_diagonal() const;
  /// Max absolute row sum.
  double norm_inf() const;
  /// max |A - A^T| over all entries; 0 means exactly symmetric.
  double max_asymmetry() const;
  /// (A + A^T) / 2, exactly symmetric by construction.
  SparseMatrix symmetrized() const;
  /// x^T A x
  double quadratic_form(const Vector& x) const;

  DenseMatrix to_dense() const;
  const Storage& storage() const { return m_; }

  /// Coordinate-format MatrixMarket ("matrix coordinate real general").
  void write_matrix_market(std::ostream& os) const;

 private:
  Storage m_;
};

/// W^T diag(weights) W, symmetrized so that the result is exactly symmetric.
SparseMatrix weighted_gram(const SparseMatrix& w, const Vector& weights);

}  // namespace hessmooth
