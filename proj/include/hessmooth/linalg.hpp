#pragma once

#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "hessmooth/domain.hpp"
#include "hessmooth/sparse.hpp"

namespace hessmooth {

/// Numerical tolerances shared by the solvers. Defaults are the documented
/// constants; callers may override any of them.
struct Tolerances {
  double psd = 1e-10;           // min eigenvalue >= -psd * ||Q||
  double solve = 1e-10;         // relative residual of solve_spd
  double eig = 1e-8;            // eigen residual relative to ||Q||_inf
  double rank = 1e-12;          // LDL^T pivot / diagonal below this: singular
  double shift = 1e-8;          // eigen shift relative to mean(diag(Q))
  int max_refinement = 20;
  int eig_max_iter = 2000;
  std::uint64_t seed = 0x5eedULL;
};

enum class EnergyKind {
  HessianNatural,
  LaplacianZeroNeumann,
  LaplacianNatural,
  CrouzeixRaviart,
  Blend,
};

std::string_view energy_kind_name(EnergyKind kind);

/// A stacked second-derivative operator with per-row quadrature weights:
/// the associated quadratic form is H^T diag(weights) H.
struct WeightedOperator {
  SparseMatrix H;
  Vector weights;

  bool empty() const { return H.rows() == 0; }
};

/// Symmetric PSD quadratic form Q with its diagonal mass M.
struct DiscreteEnergy {
  SparseMatrix Q;
  SparseMatrix M;
  WeightedOperator factor;  // Q = H^T W H; may be empty
  EnergyKind kind = EnergyKind::HessianNatural;
  double alpha = 1.0;  // meaningful for Blend only
  std::uint64_t domain_id = 0;

  Index size() const { return Q.rows(); }
  /// u^T Q u, as |W^1/2 H u|^2 when the factor is present
  double evaluate(const Vector& u) const;
};

struct EigenPairs {
  Vector values;          // ascending
  DenseMatrix vectors;    // n x k, M-orthonormal columns
  Vector residuals;       // ||Q x - lambda M x||_2 per pair
};

/// Sparse LDL^T of A + regularization * diag(A) with pivot diagnostics.
class SpdFactorization {
 public:
  SpdFactorization(const SparseMatrix& a, double regularization);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  /// Smallest ratio pivot / diagonal entry and where it occurred (original
  /// numbering).
  double min_pivot_ratio() const { return min_ratio_; }
  Index min_pivot_index() const { return min_index_; }

  /// Solve against the factorized (possibly regularized) matrix.
  Vector apply_inverse(const Vector& b) const;
  DenseMatrix apply_inverse(const DenseMatrix& b) const;

  /// Solve A x = b for the unregularized A using iterative refinement.
  Vector solve(const Vector& b, const Tolerances& tol = {}) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double min_ratio_ = 0.0;
  Index min_index_ = -1;
};

/// x with ||Ax - b|| <= tol.solve * (||A||_inf ||x|| + ||b||). Throws
/// SolverFailure (with pivot info) when A + reg*diag(A) is not positive
/// definite.
Vector solve_spd(const SparseMatrix& a, const Vector& b,
                 double regularization = 0.0, const Tolerances& tol = {});

/// Minimizer of 1/2 w u^T Q u [+ 1/2 (u-f)^T M (u-f)] [+ load^T u] subject
/// to u[idx] = val, by eliminating the constrained variables.
struct QuadraticProblem {
  const SparseMatrix* Q = nullptr;
  const SparseMatrix* M = nullptr;   // required when f is present
  std::optional<Vector> f;
  double w = 1.0;
  std::optional<Vector> load;
  ConstraintSet constraints;
};

Vector min_quadratic_eq(const QuadraticProblem& problem,
                        const Tolerances& tol = {});
Vector min_quadratic_eq(const SparseMatrix& Q, const SparseMatrix& M,
                        const std::optional<Vector>& f, double w,
                        const ConstraintSet& constraints,
                        const Tolerances& tol = {});

/// Reduced system A(F,F) for a fixed constrained index set, factorized once
/// and reused for many right-hand sides.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseMatrix& a, std::span<const Index> fixed,
                    const Tolerances& tol = {});

  /// Full solution given values on the fixed set and a full-length rhs.
  Vector solve(const Vector& fixed_values, const Vector& rhs) const;

 private:
  Tolerances tol_;
  Index n_ = 0;
  std::vector<Index> fixed_;
  std::vector<Index> free_;
  SparseMatrix a_ff_;
  SparseMatrix a_fc_;
  std::optional<SpdFactorization> factor_;
};

/// k smallest generalized eigenpairs of Q x = lambda M x (M diagonal SPD).
EigenPairs smallest_eigenpairs(const SparseMatrix& Q, const SparseMatrix& M,
                               Index k, const Tolerances& tol = {});

}  // namespace hessmooth
