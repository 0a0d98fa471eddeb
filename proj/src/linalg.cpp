#include "hessmooth/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hessmooth/error.hpp"

namespace hessmooth {

double DiscreteEnergy::evaluate(const Vector& u) const {
  if (factor.empty()) return Q.quadratic_form(u);
  const Vector hu = factor.H.multiply(u);
  return hu.cwiseProduct(hu).dot(factor.weights);
}

std::string_view energy_kind_name(EnergyKind kind) {
  switch (kind) {
    case EnergyKind::HessianNatural: return "hessian";
    case EnergyKind::LaplacianZeroNeumann: return "laplacian-neumann";
    case EnergyKind::LaplacianNatural: return "laplacian-natural";
    case EnergyKind::CrouzeixRaviart: return "cr";
    case EnergyKind::Blend: return "blend";
  }
  return "unknown";
}

// ------------------------------------------------------------ factorization

using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SpdFactorization::Impl {
  SparseMatrix a;
  Eigen::SimplicialLDLT<ColMajor, Eigen::Lower> ldlt;
};

SpdFactorization::SpdFactorization(const SparseMatrix& a, double regularization)
    : impl_(std::make_unique<Impl>()) {
  require(a.rows() == a.cols(), "solve_spd: matrix not square");
  require(regularization >= 0.0, "solve_spd: negative regularization");
  impl_->a = a;
  const Vector diag = a.diagonal_entries();
  ColMajor k(a.storage());
  if (regularization > 0.0) {
    ColMajor d(a.rows(), a.cols());
    std::vector<Eigen::Triplet<double>> t;
    for (Index i = 0; i < a.rows(); ++i)
      t.emplace_back(i, i, regularization * diag[i]);
    d.setFromTriplets(t.begin(), t.end());
    k += d;
  }
  impl_->ldlt.compute(k);
  if (impl_->ldlt.info() != Eigen::Success)
    fail(ErrorKind::SolverFailure, "solve_spd: LDL^T factorization failed");

  const Vector dvec = impl_->ldlt.vectorD();
  const auto& perm = impl_->ldlt.permutationP();
  Vector kdiag = Vector(k.diagonal());
  min_ratio_ = INFINITY;
  for (Index i = 0; i < a.rows(); ++i) {
    // permutationP maps original index i to factor position perm.indices()[i]
    const Index pos = perm.indices()[i];
    const double scale = std::abs(kdiag[i]) > 0.0 ? std::abs(kdiag[i]) : 1.0;
    const double ratio = dvec[pos] / scale;
    if (ratio < min_ratio_ || (kdiag[i] == 0.0 && dvec[pos] == 0.0)) {
      min_ratio_ = kdiag[i] == 0.0 && dvec[pos] == 0.0 ? 0.0 : ratio;
      min_index_ = i;
    }
  }
  if (!(min_ratio_ > 0.0)) {
    std::ostringstream msg;
    msg << "solve_spd: breakdown, non-positive pivot " << min_ratio_
        << " (relative to diagonal) at row " << min_index_;
    fail(ErrorKind::SolverFailure, msg.str());
  }
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept =
    default;

Vector SpdFactorization::apply_inverse(const Vector& b) const {
  return impl_->ldlt.solve(b);
}

DenseMatrix SpdFactorization::apply_inverse(const DenseMatrix& b) const {
  return impl_->ldlt.solve(b);
}

Vector SpdFactorization::solve(const Vector& b, const Tolerances& tol) const {
  const SparseMatrix& a = impl_->a;
  require(b.size() == a.rows(), "solve_spd: rhs dimension mismatch");
  const double anorm = a.norm_inf();
  const double bnorm = b.norm();
  Vector x = apply_inverse(b);
  double rnorm = INFINITY;
  for (int it = 0; it <= tol.max_refinement; ++it) {
    const Vector r = b - a.multiply(x);
    rnorm = r.norm();
    if (!std::isfinite(rnorm)) break;
    if (rnorm <= tol.solve * (anorm * x.norm() + bnorm)) return x;
    x += apply_inverse(r);
  }
  std::ostringstream msg;
  msg << "solve_spd: iterative refinement stalled, residual " << rnorm
      << " vs bound " << tol.solve * (anorm * x.norm() + bnorm);
  fail(ErrorKind::SolverFailure, msg.str());
}

Vector solve_spd(const SparseMatrix& a, const Vector& b, double regularization,
                 const Tolerances& tol) {
  SpdFactorization f(a, regularization);
  return f.solve(b, tol);
}

// ------------------------------------------------------------ constrained

ConstrainedSystem::ConstrainedSystem(const SparseMatrix& a,
                                     std::span<const Index> fixed,
                                     const Tolerances& tol)
    : tol_(tol), n_(a.rows()), fixed_(fixed.begin(), fixed.end()) {
  std::vector<char> is_fixed(static_cast<std::size_t>(n_), 0);
  for (Index c : fixed_) {
    require(c >= 0 && c < n_, "constraints: index out of range");
    require(!is_fixed[c], "constraints: duplicate index");
    is_fixed[c] = 1;
  }
  for (Index i = 0; i < n_; ++i)
    if (!is_fixed[i]) free_.push_back(i);
  if (free_.empty()) return;
  a_ff_ = a.select(free_, free_);
  a_fc_ = a.select(free_, fixed_);
  try {
    factor_.emplace(a_ff_, 0.0);
  } catch (const Error&) {
    fail(ErrorKind::RankDeficient,
         "rank deficiency: reduced system is singular; the constraints do "
         "not fix the energy's null space");
  }
  if (factor_->min_pivot_ratio() < tol_.rank) {
    std::ostringstream msg;
    msg << "rank deficiency: reduced system is singular (pivot ratio "
        << factor_->min_pivot_ratio() << " at free variable "
        << free_[factor_->min_pivot_index()]
        << "); the constraints do not fix the energy's null space";
    fail(ErrorKind::RankDeficient, msg.str());
  }
}

Vector ConstrainedSystem::solve(const Vector& fixed_values,
                                const Vector& rhs) const {
  require(fixed_values.size() == static_cast<Index>(fixed_.size()),
          "constrained solve: fixed value count mismatch");
  require(rhs.size() == n_, "constrained solve: rhs dimension mismatch");
  Vector u(n_);
  for (std::size_t c = 0; c < fixed_.size(); ++c)
    u[fixed_[c]] = fixed_values[static_cast<Index>(c)];
  if (free_.empty()) return u;
  Vector b(static_cast<Index>(free_.size()));
  for (std::size_t i = 0; i < free_.size(); ++i)
    b[static_cast<Index>(i)] = rhs[free_[i]];
  if (!fixed_.empty()) b -= a_fc_.multiply(fixed_values);
  const Vector x = factor_->solve(b, tol_);
  for (std::size_t i = 0; i < free_.size(); ++i)
    u[free_[i]] = x[static_cast<Index>(i)];
  return u;
}

Vector min_quadratic_eq(const QuadraticProblem& p, const Tolerances& tol) {
  require(p.Q != nullptr, "min_quadratic_eq: missing Q");
  const SparseMatrix& q = *p.Q;
  const Index n = q.rows();
  require(q.cols() == n, "min_quadratic_eq: Q not square");
  p.constraints.validate(n);

  SparseMatrix a;
  Vector rhs = Vector::Zero(n);
  if (p.f) {
    require(p.M != nullptr, "min_quadratic_eq: data term needs M");
    require(p.f->size() == n, "min_quadratic_eq: f dimension mismatch");
    require(p.w > 0.0, "min_quadratic_eq: weight must be positive");
    a = q.scaled(p.w) + *p.M;
    rhs = p.M->multiply(*p.f);
  } else {
    if (p.constraints.empty())
      fail(ErrorKind::RankDeficient,
           "rank deficiency: no constraints and no data term");
    require(p.w > 0.0, "min_quadratic_eq: weight must be positive");
    a = q.scaled(p.w);
  }
  if (p.load) {
    require(p.load->size() == n, "min_quadratic_eq: load dimension mismatch");
    rhs -= *p.load;
  }
  std::vector<Index> fixed;
  Vector vals(static_cast<Index>(p.constraints.size()));
  for (std::size_t c = 0; c < p.constraints.size(); ++c) {
    fixed.push_back(p.constraints.entries[c].index);
    vals[static_cast<Index>(c)] = p.constraints.entries[c].value;
  }
  ConstrainedSystem sys(a, fixed, tol);
  return sys.solve(vals, rhs);
}

Vector min_quadratic_eq(const SparseMatrix& Q, const SparseMatrix& M,
                        const std::optional<Vector>& f, double w,
                        const ConstraintSet& constraints,
                        const Tolerances& tol) {
  QuadraticProblem p;
  p.Q = &Q;
  p.M = &M;
  p.f = f;
  p.w = w;
  p.constraints = constraints;
  return min_quadratic_eq(p, tol);
}

// ------------------------------------------------------------ eigen

namespace {

struct RitzResult {
  Vector values;
  DenseMatrix vectors;
};

/// M-orthonormal basis of span(Y) for diagonal M.
DenseMatrix m_orthonormalize(const DenseMatrix& y, const Vector& mdiag) {
  const Vector sq = mdiag.cwiseSqrt();
  DenseMatrix b = sq.asDiagonal() * y;
  Eigen::HouseholderQR<DenseMatrix> qr(b);
  DenseMatrix qthin =
      qr.householderQ() * DenseMatrix::Identity(b.rows(), b.cols());
  return sq.cwiseInverse().asDiagonal() * qthin;
}

/// Rayleigh-Ritz on an M-orthonormal basis.
RitzResult rayleigh_ritz(const SparseMatrix& q, const DenseMatrix& basis) {
  DenseMatrix qb(basis.rows(), basis.cols());
  for (Index c = 0; c < basis.cols(); ++c)
    qb.col(c) = q.multiply(basis.col(c));
  DenseMatrix t = basis.transpose() * qb;
  t = 0.5 * (t + t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(t);
  return {es.eigenvalues(), basis * es.eigenvectors()};
}

Vector residual_norms(const SparseMatrix& q, const Vector& mdiag,
                      const Vector& vals, const DenseMatrix& vecs, Index k) {
  Vector r(k);
  for (Index c = 0; c < k; ++c) {
    const Vector x = vecs.col(c);
    r[c] = (q.multiply(x) - vals[c] * mdiag.cwiseProduct(x)).norm();
  }
  return r;
}

/// Fix the sign of each vector: largest-magnitude entry positive.
void canonical_signs(DenseMatrix& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0.0) v.col(c) *= -1.0;
  }
}

}  // namespace

EigenPairs smallest_eigenpairs(const SparseMatrix& q, const SparseMatrix& m,
                               Index k, const Tolerances& tol) {
  const Index n = q.rows();
  require(q.cols() == n && m.rows() == n && m.cols() == n,
          "smallest_eigenpairs: dimension mismatch");
  require(k >= 1 && k < n, "smallest_eigenpairs: need 1 <= k < n");
  require(m.is_diagonal(), "smallest_eigenpairs: M must be diagonal");
  const Vector mdiag = m.diagonal_entries();
  require(mdiag.minCoeff() > 0.0, "smallest_eigenpairs: M must be positive");
  const double qnorm = q.norm_inf();
  const double bound = tol.eig * qnorm;

  EigenPairs out;
  const Index p = std::min<Index>(n, std::max<Index>(2 * k, k + 8));

  if (p >= n || n <= 64) {
    // Dense path: symmetric reduction with M^{-1/2}.
    const Vector isq = mdiag.cwiseSqrt().cwiseInverse();
    DenseMatrix a = isq.asDiagonal() * q.to_dense() * isq.asDiagonal();
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    DenseMatrix vecs = isq.asDiagonal() * es.eigenvectors().leftCols(k);
    // One Rayleigh-Ritz pass in the original metric polishes the pairs.
    RitzResult rr = rayleigh_ritz(q, m_orthonormalize(vecs, mdiag));
    out.values = rr.values;
    out.vectors = rr.vectors;
  } else {
    const double mean_q = q.diagonal_entries().mean();
    const double mean_m = mdiag.mean();
    const double sigma =
        mean_q > 0.0 ? tol.shift * mean_q / mean_m : 1.0;
    const SparseMatrix shifted = q + SparseMatrix::diagonal(sigma * mdiag);
    SpdFactorization factor(shifted, 0.0);

    std::mt19937_64 rng(tol.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix x(n, p);
    for (Index c = 0; c < p; ++c)
      for (Index r = 0; r < n; ++r) x(r, c) = normal(rng);
    x = m_orthonormalize(x, mdiag);

    bool converged = false;
    Vector res;
    for (int it = 0; it < tol.eig_max_iter; ++it) {
      DenseMatrix y = factor.apply_inverse(DenseMatrix(mdiag.asDiagonal() * x));
      RitzResult rr = rayleigh_ritz(q, m_orthonormalize(y, mdiag));
      x = rr.vectors;
      out.values = rr.values.head(k);
      res = residual_norms(q, mdiag, rr.values, x, k);
      if (res.maxCoeff() <= bound) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "smallest_eigenpairs: no convergence after " << tol.eig_max_iter
          << " iterations; max residual " << res.maxCoeff() << " vs bound "
          << bound;
      fail(ErrorKind::SolverFailure, msg.str());
    }
    out.vectors = x.leftCols(k);
  }
  out.values = out.values.head(k).eval();
  out.vectors = out.vectors.leftCols(k).eval();
  canonical_signs(out.vectors);
  out.residuals = residual_norms(q, mdiag, out.values, out.vectors, k);
  if (out.residuals.maxCoeff() > bound) {
    std::ostringstream msg;
    msg << "smallest_eigenpairs: residual " << out.residuals.maxCoeff()
        << " exceeds bound " << bound;
    fail(ErrorKind::SolverFailure, msg.str());
  }
  return out;
}

}  // namespace hessmooth
