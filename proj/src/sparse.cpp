#include "hessmooth/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "hessmooth/error.hpp"
#include "hessmooth/kernels.hpp"

namespace hessmooth {

SparseMatrix::SparseMatrix(Index rows, Index cols) : m_(rows, cols) {
  require(rows >= 0 && cols >= 0, "sparse: negative dimension");
  m_.makeCompressed();
}

SparseMatrix::SparseMatrix(Storage storage) : m_(std::move(storage)) {
  m_.makeCompressed();
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols,
                                         std::span<const Triplet> triplets) {
  require(rows >= 0 && cols >= 0, "sparse: negative dimension");
  std::vector<Eigen::Triplet<double, Index>> t;
  t.reserve(triplets.size());
  for (const auto& e : triplets) {
    require(e.row >= 0 && e.row < rows && e.col >= 0 && e.col < cols,
            "sparse: triplet index out of range");
    t.emplace_back(e.row, e.col, e.value);
  }
  Storage m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return SparseMatrix(std::move(m));
}

SparseMatrix SparseMatrix::identity(Index n) {
  Storage m(n, n);
  m.setIdentity();
  return SparseMatrix(std::move(m));
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  const auto n = static_cast<Index>(d.size());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, d[i]});
  return from_triplets(n, n, t);
}

Vector SparseMatrix::multiply(const Vector& x) const {
  require(x.size() == m_.cols(), "spmv: dimension mismatch");
  Vector y(m_.rows());
  kernels::table(kernels::active_isa())
      .csr_spmv(m_.outerIndexPtr(), m_.innerIndexPtr(), m_.valuePtr(),
                x.data(), y.data(), static_cast<std::size_t>(m_.rows()));
  return y;
}

Vector SparseMatrix::multiply_transpose(const Vector& x) const {
  require(x.size() == m_.rows(), "spmv: dimension mismatch");
  Vector y = Vector::Zero(m_.cols());
  const Index* outer = m_.outerIndexPtr();
  const Index* inner = m_.innerIndexPtr();
  const double* vals = m_.valuePtr();
  for (Index r = 0; r < rows(); ++r) {
    const double xr = x[r];
    for (Index k = outer[r]; k < outer[r + 1]; ++k) y[inner[k]] += vals[k] * xr;
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  return SparseMatrix(Storage(m_.transpose()));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  return SparseMatrix(Storage(m_ * s));
}

SparseMatrix SparseMatrix::row_scaled(const Vector& w) const {
  require(w.size() == m_.rows(), "row_scaled: dimension mismatch");
  Storage out = m_;
  for (Index r = 0; r < rows(); ++r)
    for (Storage::InnerIterator it(out, r); it; ++it) it.valueRef() *= w[r];
  return SparseMatrix(std::move(out));
}

SparseMatrix SparseMatrix::operator*(const SparseMatrix& rhs) const {
  require(cols() == rhs.rows(), "sparse product: dimension mismatch");
  return SparseMatrix(Storage(m_ * rhs.m_));
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& rhs) const {
  require(rows() == rhs.rows() && cols() == rhs.cols(),
          "sparse sum: dimension mismatch");
  return SparseMatrix(Storage(m_ + rhs.m_));
}

SparseMatrix SparseMatrix::operator-(const SparseMatrix& rhs) const {
  require(rows() == rhs.rows() && cols() == rhs.cols(),
          "sparse difference: dimension mismatch");
  return SparseMatrix(Storage(m_ - rhs.m_));
}

SparseMatrix SparseMatrix::select(std::span<const Index> row_ids,
                                  std::span<const Index> col_ids) const {
  std::vector<Index> col_map(static_cast<std::size_t>(cols()), -1);
  for (std::size_t j = 0; j < col_ids.size(); ++j) {
    require(col_ids[j] >= 0 && col_ids[j] < cols(), "select: column out of range");
    col_map[static_cast<std::size_t>(col_ids[j])] = static_cast<Index>(j);
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    require(row_ids[i] >= 0 && row_ids[i] < rows(), "select: row out of range");
    for (Storage::InnerIterator it(m_, row_ids[i]); it; ++it) {
      const Index c = col_map[static_cast<std::size_t>(it.col())];
      if (c >= 0) t.push_back({static_cast<Index>(i), c, it.value()});
    }
  }
  return from_triplets(static_cast<Index>(row_ids.size()),
                       static_cast<Index>(col_ids.size()), t);
}

SparseMatrix SparseMatrix::select_rows(std::span<const Index> row_ids) const {
  std::vector<Index> all(static_cast<std::size_t>(cols()));
  for (Index j = 0; j < cols(); ++j) all[static_cast<std::size_t>(j)] = j;
  return select(row_ids, all);
}

Vector SparseMatrix::diagonal_entries() const {
  return Vector(m_.diagonal());
}

bool SparseMatrix::is_diagonal() const {
  for (Index r = 0; r < rows(); ++r)
    for (Storage::InnerIterator it(m_, r); it; ++it)
      if (it.col() != r && it.value() != 0.0) return false;
  return true;
}

double SparseMatrix::norm_inf() const {
  double best = 0.0;
  for (Index r = 0; r < rows(); ++r) {
    double s = 0.0;
    for (Storage::InnerIterator it(m_, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

double SparseMatrix::max_asymmetry() const {
  if (rows() != cols()) return INFINITY;
  Storage d = m_ - Storage(m_.transpose());
  double best = 0.0;
  for (Index k = 0; k < static_cast<Index>(d.nonZeros()); ++k)
    best = std::max(best, std::abs(d.valuePtr()[k]));
  return best;
}

SparseMatrix SparseMatrix::symmetrized() const {
  require(rows() == cols(), "symmetrized: matrix not square");
  Storage t = m_.transpose();
  return SparseMatrix(Storage((m_ + t) * 0.5));
}

double SparseMatrix::quadratic_form(const Vector& x) const {
  return x.dot(multiply(x));
}

DenseMatrix SparseMatrix::to_dense() const { return DenseMatrix(m_); }

void SparseMatrix::write_matrix_market(std::ostream& os) const {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << rows() << ' ' << cols() << ' ' << nnz() << '\n';
  char buf[64];
  for (Index r = 0; r < rows(); ++r) {
    for (Storage::InnerIterator it(m_, r); it; ++it) {
      auto res = std::to_chars(buf, buf + sizeof(buf), it.value());
      os << (r + 1) << ' ' << (it.col() + 1) << ' '
         << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
         << '\n';
    }
  }
}

SparseMatrix weighted_gram(const SparseMatrix& w, const Vector& weights) {
  require(weights.size() == w.rows(), "weighted_gram: dimension mismatch");
  const SparseMatrix wt = w.transpose();
  return (wt * w.row_scaled(weights)).symmetrized();
}

}  // namespace hessmooth
