#pragma once

#include <vector>

#include "hessmooth/domain.hpp"
#include "hessmooth/fd_ops.hpp"
#include "hessmooth/fem_ops.hpp"
#include "hessmooth/linalg.hpp"

namespace hessmooth {

/// Minimizer of u^T Q u subject to the value constraints.
Vector interpolate(const DiscreteEnergy& energy,
                   const ConstraintSet& constraints,
                   const Tolerances& tol = {});

/// Above this bound on w ||Q||_inf / min(M) smooth() switches from the
/// normal equations to a QR of the stacked operator.
inline constexpr double kSmoothQrCondition = 1e10;

/// Solves (M + w Q) u = M f, refined twice with residuals taken through the
/// factor when present. Large w with a stored factor goes through the
/// least-squares form min |M^1/2 (u - f)|^2 + w |W^1/2 H u|^2.
Vector smooth(const DiscreteEnergy& energy, const Vector& f, double w_smooth,
              const Tolerances& tol = {});

EigenPairs modes(const DiscreteEnergy& energy, Index k,
                 const Tolerances& tol = {});

/// One weight field per handle; column i interpolates delta_ij at handle j.
struct WeightMatrix {
  DenseMatrix W;                 // n x m
  std::vector<Index> handles;
  std::uint64_t domain_id = 0;

  /// max_v |sum_i W(v, i) - 1|
  double max_rowsum_residual() const;
};

/// positions: n x d vertex/node coordinates used to reject handle sets that
/// do not affinely span the plane.
WeightMatrix subspace_weights(const DiscreteEnergy& energy,
                              std::span<const Index> handles,
                              const DenseMatrix& positions,
                              const Tolerances& tol = {});

/// Node coordinates of a grid as an n x 2 matrix.
DenseMatrix grid_positions(const GridDomain& grid);

// ------------------------------------------------------------------ L1

struct L1Options {
  double lambda = 1.0;
  double rho = 0.0;          // 0 selects rho = lambda
  double eps_primal = 1e-6;  // relative
  double eps_dual = 1e-6;    // relative
  int max_iter = 5000;
  // Residual balancing: every adapt_interval iterations rho is scaled by
  // adapt_factor when one relative residual exceeds the other by
  // adapt_balance. 0 keeps rho fixed.
  int adapt_interval = 10;
  double adapt_factor = 4.0;
  double adapt_balance = 10.0;
};

/// lambda * sum_k w_k |(H u)_k| + 1/2 (u - f)^T diag(mass) (u - f)
struct L1Problem {
  WeightedOperator op;
  Vector mass;
  Vector f;
  L1Options options;
};

struct L1Result {
  Vector u;
  Vector z;              // split copy of H u
  Vector dual;           // rho * y / lambda, lies in [-1, 1]
  int iterations = 0;
  double rho = 0.0;      // penalty at termination
  double objective = 0.0;
  std::vector<double> objective_history;
  std::vector<double> primal_history;
  std::vector<double> dual_history;

  /// |dual_k| <= 1 + 1e-6 and dual_k * sign((Hu)_k) >= 1 - 1e-4 wherever
  /// |(Hu)_k| > 1e-6 max|Hu|, exceeds the rounding bound 64 eps (|H||u|)_k
  /// and the split copy z_k is nonzero.
  bool certificate_holds(const SparseMatrix& H) const;
};

double l1_objective(const L1Problem& problem, const Vector& u);

/// ADMM: sparse factorization of M + rho H^T W H (refreshed when rho
/// adapts), element-wise soft thresholding, scaled dual update.
L1Result l1_smooth(const L1Problem& problem);

enum class FlowOperator { Hessian, Laplacian };

struct FlowStep {
  TriMesh mesh;
  Vector energy_density;  // per vertex, sum over coordinates of |H x|
};

/// Repeated L1 smoothing of the coordinate functions; operators are rebuilt
/// from the current geometry at every step. Returns the input followed by
/// one entry per step.
std::vector<FlowStep> l1_flow(const TriMesh& mesh, double lambda, Index steps,
                              FlowOperator kind, L1Options options = {});

/// Sum of |angle defect| over interior vertices whose incident dihedral
/// angles all stay below crease_angle (radians).
double absolute_angle_defect(const TriMesh& mesh, double crease_angle);

// ------------------------------------------------------------------ annulus

/// u(r) = a + b r^2 + c ln r + d r^2 ln r with u(r0) = 1, u(r1) = 0 and
/// u''(r0) = u''(r1) = 0.
struct RadialSolution {
  double a = 0, b = 0, c = 0, d = 0;
  double value(double r) const;
  double second_derivative(double r) const;
};

RadialSolution annulus_reference(double r0, double r1);

/// Annulus test geometry shared by the convergence studies.
struct AnnulusSetup {
  double r0 = 0.25;
  double r1 = 0.45;
  double cx = 0.5;
  double cy = 0.5;
};

struct ConvergenceRow {
  double h = 0.0;
  double linf_error = 0.0;
  double rate = 0.0;  // log2 ratio to the previous row (0 for the first)
};

enum class AnnulusMethod { FiniteDifference, MixedFem, CrouzeixRaviart };

/// Error of one discretization at one refinement level (0 = coarsest).
/// FD: (32 * 2^level + 1)^2 grid on the unit square, boundary nodes fixed
/// to the reference. Meshes: annulus_mesh with nr = 4 * 2^level and
/// ntheta = 32 * 2^level, rings fixed to 1 and 0.
ConvergenceRow annulus_error(AnnulusMethod method, Index level,
                             const AnnulusSetup& setup = {});
std::vector<ConvergenceRow> annulus_convergence(AnnulusMethod method,
                                                Index levels,
                                                const AnnulusSetup& setup = {});

}  // namespace hessmooth
