#pragma once

#include "hessmooth/domain.hpp"
#include "hessmooth/fd_ops.hpp"
#include "hessmooth/linalg.hpp"

namespace hessmooth {

/// Piecewise-linear operators on a triangle mesh (d = 2 or 3).
///
/// Per-face vectors are stored component-major: row c*m + f holds component
/// c of the vector on face f. Matrix-valued fields on interior vertices are
/// stored in d*d groups of |i| entries, group r*d + c holding entry (r, c).
struct FemOperators {
  SparseMatrix L;      // n x n cotangent stiffness, positive semidefinite
  SparseMatrix M;      // n x n lumped mass
  SparseMatrix G;      // d*m x n per-face gradient
  Vector A;            // d*m face areas, repeated per component
  SparseMatrix D;      // d*m x d*d*|i| matrix divergence
  Vector Mtilde;       // d*d*|i| interior masses, repeated per entry
  std::vector<Index> interior;
  Index dim = 2;
  std::uint64_t domain_id = 0;
};

FemOperators build_fem_operators(const TriMesh& mesh);

/// Cotangent stiffness from the half-cotangent formula (independent of G).
SparseMatrix cotangent_laplacian(const TriMesh& mesh);
Vector lumped_mass(const TriMesh& mesh);

/// D^T A G: integrated (weak) Hessian entries on interior vertices.
SparseMatrix weak_hessian(const FemOperators& ops);
/// Pointwise Hessian Mtilde^{-1} D^T A G with weights Mtilde, so that
/// H^T diag(w) H is the mixed-FEM Hessian energy.
WeightedOperator fem_hessian_operator(const FemOperators& ops);

DiscreteEnergy fem_hessian_energy(const FemOperators& ops);
DiscreteEnergy fem_laplacian_energy(const FemOperators& ops, LaplacianBc bc);

/// Edge-based comparison energy E^T K^T M_cr^{-1} K E with K the
/// Crouzeix-Raviart stiffness corrected by boundary normal derivatives.
struct CrOperators {
  SparseMatrix E;      // k x n, averages endpoints
  SparseMatrix Lcr;    // k x k
  SparseMatrix Ncr;    // k x k, boundary normal derivative (times |e|)
  Vector Mcr;          // k lumped edge masses
};
CrOperators build_cr_operators(const TriMesh& mesh);
DiscreteEnergy cr_energy(const TriMesh& mesh);

}  // namespace hessmooth
