#include "hessmooth/solve.hpp"

#include <Eigen/LU>
#include <Eigen/SPQRSupport>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "hessmooth/error.hpp"

namespace hessmooth {

namespace {

/// min |M^1/2 (u - f)|^2 + w |W^1/2 H u|^2 by sparse QR of the stacked
/// matrix [M^1/2; (w W)^1/2 H].
Vector smooth_least_squares(const DiscreteEnergy& e, const Vector& f, double w) {
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, long>;
  const Vector m = e.M.diagonal_entries();
  const WeightedOperator& op = e.factor;
  const Index n = m.size();
  std::vector<Eigen::Triplet<double, long>> t;
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, std::sqrt(m[i]));
  const auto& st = op.H.storage();
  for (Index r = 0; r < st.outerSize(); ++r) {
    const double s = std::sqrt(w * op.weights[r]);
    for (SparseMatrix::Storage::InnerIterator it(st, r); it; ++it)
      t.emplace_back(n + r, static_cast<long>(it.col()), s * it.value());
  }
  ColMajor a(n + op.H.rows(), n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SPQR<ColMajor> qr(a);
  if (qr.info() != Eigen::Success)
    fail(ErrorKind::SolverFailure, "smooth: sparse QR failed");
  if (qr.rank() < n)
    fail(ErrorKind::SolverFailure, "smooth: stacked system is rank deficient");
  Vector b = Vector::Zero(a.rows());
  b.head(n) = m.cwiseSqrt().cwiseProduct(f);
  Vector u = qr.solve(b);
  if (qr.info() != Eigen::Success || !u.allFinite())
    fail(ErrorKind::SolverFailure, "smooth: sparse QR solve failed");
  return u;
}

}  // namespace

Vector interpolate(const DiscreteEnergy& energy,
                   const ConstraintSet& constraints, const Tolerances& tol) {
  require(!constraints.empty(), "interpolate: no constraints");
  return min_quadratic_eq(energy.Q, energy.M, std::nullopt, 1.0, constraints,
                          tol);
}

Vector smooth(const DiscreteEnergy& energy, const Vector& f, double w_smooth,
              const Tolerances& tol) {
  require(w_smooth > 0.0, "smooth: w_smooth must be positive");
  require(f.size() == energy.size(), "smooth: data size mismatch");
  const Vector m = energy.M.diagonal_entries();
  if (!energy.factor.empty() && energy.M.is_diagonal() && m.minCoeff() > 0.0 &&
      w_smooth * energy.Q.norm_inf() > kSmoothQrCondition * m.minCoeff())
    return smooth_least_squares(energy, f, w_smooth);
  const SparseMatrix a = energy.M + energy.Q.scaled(w_smooth);
  const SpdFactorization fac(a, 0.0);
  const Vector mf = energy.M.multiply(f);
  Vector u = fac.solve(mf, tol);
  if (energy.factor.empty()) return u;
  // Refinement with the residual taken through the factor: H^T W H u keeps
  // the null space of Q that the assembled product blurs at large w.
  const WeightedOperator& op = energy.factor;
  for (int it = 0; it < 2; ++it) {
    const Vector qu =
        op.H.multiply_transpose(op.weights.cwiseProduct(op.H.multiply(u)));
    const Vector r = mf - energy.M.multiply(u) - w_smooth * qu;
    u += fac.apply_inverse(r);
  }
  return u;
}

EigenPairs modes(const DiscreteEnergy& energy, Index k,
                 const Tolerances& tol) {
  return smallest_eigenpairs(energy.Q, energy.M, k, tol);
}

double WeightMatrix::max_rowsum_residual() const {
  return (W.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

DenseMatrix grid_positions(const GridDomain& grid) {
  DenseMatrix p(grid.num_nodes(), 2);
  for (Index k = 0; k < grid.num_nodes(); ++k) {
    const auto x = grid.position(k);
    p(k, 0) = x[0];
    p(k, 1) = x[1];
  }
  return p;
}

WeightMatrix subspace_weights(const DiscreteEnergy& energy,
                              std::span<const Index> handles,
                              const DenseMatrix& positions,
                              const Tolerances& tol) {
  const Index n = energy.size();
  const auto m = static_cast<Index>(handles.size());
  require(positions.rows() == n, "subspace_weights: positions size mismatch");
  require(m >= 3, "subspace_weights: need at least 3 handles");
  for (Index h : handles)
    require(h >= 0 && h < n, "subspace_weights: handle index out of range");

  // Handles must affinely span a plane: rank of the offsets >= 2.
  DenseMatrix offsets(m - 1, positions.cols());
  for (Index i = 1; i < m; ++i)
    offsets.row(i - 1) = positions.row(handles[i]) - positions.row(handles[0]);
  Eigen::JacobiSVD<DenseMatrix> svd(offsets);
  const Vector sv = svd.singularValues();
  const double scale = sv.size() > 0 ? sv[0] : 0.0;
  if (sv.size() < 2 || !(sv[1] > 1e-9 * scale))
    fail(ErrorKind::InvalidInput,
         "subspace_weights: degenerate handle set (handles are collinear)");

  ConstrainedSystem sys(energy.Q, handles, tol);
  WeightMatrix wm;
  wm.handles.assign(handles.begin(), handles.end());
  wm.domain_id = energy.domain_id;
  wm.W.resize(n, m);
  const Vector zero = Vector::Zero(n);
  for (Index i = 0; i < m; ++i) {
    Vector delta = Vector::Zero(m);
    delta[i] = 1.0;
    wm.W.col(i) = sys.solve(delta, zero);
  }
  return wm;
}

// ------------------------------------------------------------------ annulus

double RadialSolution::value(double r) const {
  const double l = std::log(r);
  return a + b * r * r + c * l + d * r * r * l;
}

double RadialSolution::second_derivative(double r) const {
  return 2.0 * b - c / (r * r) + d * (2.0 * std::log(r) + 3.0);
}

RadialSolution annulus_reference(double r0, double r1) {
  require(r0 > 0.0 && r0 < r1, "annulus_reference: need 0 < r0 < r1");
  Eigen::Matrix4d a;
  Eigen::Vector4d rhs(1.0, 0.0, 0.0, 0.0);
  for (int k = 0; k < 2; ++k) {
    const double r = k == 0 ? r0 : r1;
    const double l = std::log(r);
    a.row(k) << 1.0, r * r, l, r * r * l;
    a.row(2 + k) << 0.0, 2.0, -1.0 / (r * r), 2.0 * l + 3.0;
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(a);
  if (lu.rank() < 4)
    fail(ErrorKind::SolverFailure, "annulus_reference: singular system");
  const Eigen::Vector4d x = lu.solve(rhs);
  return {x[0], x[1], x[2], x[3]};
}

namespace {

ConvergenceRow fd_annulus(Index level, const AnnulusSetup& s) {
  const Index cells = 32 << level;
  const double h = 1.0 / cells;
  const GridDomain grid =
      grid_from_predicate(cells + 1, cells + 1, h, [&](double x, double y) {
        const double r = std::hypot(x - s.cx, y - s.cy);
        return r >= s.r0 && r <= s.r1;
      });
  const RadialSolution ref = annulus_reference(s.r0, s.r1);
  auto radius = [&](Index k) {
    const auto p = grid.position(k);
    return std::hypot(p[0] - s.cx, p[1] - s.cy);
  };
  ConstraintSet cs;
  for (Index k : grid.boundary_nodes()) cs.add(k, ref.value(radius(k)));
  const DiscreteEnergy e = fd_hessian_energy(build_fd_hessian(grid));
  const Vector u = interpolate(e, cs);
  double err = 0.0;
  for (Index k : grid.interior())
    err = std::max(err, std::abs(u[k] - ref.value(radius(k))));
  return {h, err, 0.0};
}

ConvergenceRow mesh_annulus(AnnulusMethod method, Index level,
                            const AnnulusSetup& s) {
  const Index nr = 4 << level;
  const Index nt = 32 << level;
  const TriMesh mesh = annulus_mesh(s.r0, s.r1, nr, nt);
  const RadialSolution ref = annulus_reference(s.r0, s.r1);
  ConstraintSet cs;
  for (Index v = 0; v < nt; ++v) cs.add(v, 1.0);
  for (Index v = nr * nt; v < (nr + 1) * nt; ++v) cs.add(v, 0.0);
  const DiscreteEnergy e = method == AnnulusMethod::MixedFem
                               ? fem_hessian_energy(build_fem_operators(mesh))
                               : cr_energy(mesh);
  const Vector u = interpolate(e, cs);
  double err = 0.0;
  for (Index v : mesh.interior_vertices())
    err = std::max(err, std::abs(u[v] - ref.value(mesh.vertex(v).norm())));
  return {(s.r1 - s.r0) / nr, err, 0.0};
}

}  // namespace

ConvergenceRow annulus_error(AnnulusMethod method, Index level,
                             const AnnulusSetup& setup) {
  require(level >= 0 && level <= 6, "annulus: level out of range");
  if (method == AnnulusMethod::FiniteDifference) return fd_annulus(level, setup);
  return mesh_annulus(method, level, setup);
}

std::vector<ConvergenceRow> annulus_convergence(AnnulusMethod method,
                                                Index levels,
                                                const AnnulusSetup& setup) {
  require(levels >= 1, "annulus: need at least one level");
  std::vector<ConvergenceRow> rows;
  for (Index l = 0; l < levels; ++l) {
    ConvergenceRow row = annulus_error(method, l, setup);
    if (!rows.empty())
      row.rate = std::log2(rows.back().linf_error / row.linf_error);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hessmooth
