#pragma once

#include "hessmooth/domain.hpp"
#include "hessmooth/linalg.hpp"

namespace hessmooth {

/// Central-difference Hessian on the interior nodes of a masked grid.
///
/// Rows are stacked as [H_xx; H_yy; sqrt(2) H_xy], one row per interior node
/// in each block, so that |H u|^2 sums the squared Frobenius norm of the
/// per-node Hessian (the mixed partial counted twice).
struct FdHessian {
  SparseMatrix H;       // 3*n_interior x n
  Vector row_weights;   // h^2 per row
  Index num_interior = 0;
  double h = 0.0;
  std::uint64_t domain_id = 0;

  /// The unscaled blocks [H_xx; H_yy; H_xy] with weights [h^2, h^2, 2h^2];
  /// the same quadratic form, but rows are plain Hessian entries (used by
  /// the elementwise L1 objective).
  WeightedOperator elementwise() const;
};

FdHessian build_fd_hessian(const GridDomain& grid);
DiscreteEnergy fd_hessian_energy(const FdHessian& fd);

enum class LaplacianBc { ZeroNeumann, Natural };

/// Five-point Laplacian rows. Natural: interior rows only. ZeroNeumann:
/// rows at every node, with missing neighbors mirrored across the node.
WeightedOperator build_fd_laplacian(const GridDomain& grid, LaplacianBc bc);
DiscreteEnergy build_fd_laplacian_energy(const GridDomain& grid,
                                         LaplacianBc bc);

/// (1 - alpha) lap + alpha hess. The Laplacian must be the natural kind.
DiscreteEnergy blend_energy(const DiscreteEnergy& hess,
                            const DiscreteEnergy& lap, double alpha);

/// 1D bending bar on n equally spaced nodes: second differences at the
/// n-2 interior nodes, weights h. Node i sits at x = i*h.
WeightedOperator build_bar_operator(Index n, double h);
/// Q = h B^T B, M = trapezoidal lumped mass.
DiscreteEnergy build_fd_bar_1d(Index n, double h);

}  // namespace hessmooth
