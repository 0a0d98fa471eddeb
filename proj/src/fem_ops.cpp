#include "hessmooth/fem_ops.hpp"

#include <cmath>

#include "hessmooth/error.hpp"

namespace hessmooth {

namespace {

struct FaceGeometry {
  std::array<Eigen::Vector3d, 3> grad;  // gradients of the hat functions
  double area;
};

FaceGeometry face_geometry(const TriMesh& mesh, Index f) {
  const auto& t = mesh.triangles()[f];
  const std::array<Eigen::Vector3d, 3> p{mesh.vertex(t[0]), mesh.vertex(t[1]),
                                         mesh.vertex(t[2])};
  const Eigen::Vector3d n2 = (p[1] - p[0]).cross(p[2] - p[0]);
  const double twice_area = n2.norm();
  const Eigen::Vector3d n = n2 / twice_area;
  FaceGeometry g;
  g.area = 0.5 * twice_area;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d e = p[(k + 2) % 3] - p[(k + 1) % 3];
    g.grad[k] = n.cross(e) / twice_area;
  }
  return g;
}

void check_faces(const TriMesh& mesh) {
  const double diag = mesh.bbox_diagonal();
  for (Index f = 0; f < mesh.num_faces(); ++f)
    if (!(mesh.face_areas()[f] > kDegenerateAreaTol * diag * diag))
      fail(ErrorKind::InvalidInput,
           "fem: degenerate face " + std::to_string(f));
}

}  // namespace

SparseMatrix cotangent_laplacian(const TriMesh& mesh) {
  std::vector<Triplet> t;
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const Index a = tri[k], b = tri[(k + 1) % 3], c = tri[(k + 2) % 3];
      const Eigen::Vector3d u = mesh.vertex(b) - mesh.vertex(a);
      const Eigen::Vector3d v = mesh.vertex(c) - mesh.vertex(a);
      const double half_cot = 0.5 * u.dot(v) / u.cross(v).norm();
      t.push_back({b, c, -half_cot});
      t.push_back({c, b, -half_cot});
      t.push_back({b, b, half_cot});
      t.push_back({c, c, half_cot});
    }
  }
  const Index n = mesh.num_vertices();
  return SparseMatrix::from_triplets(n, n, t).symmetrized();
}

Vector lumped_mass(const TriMesh& mesh) {
  Vector m = Vector::Zero(mesh.num_vertices());
  for (Index f = 0; f < mesh.num_faces(); ++f)
    for (Index v : mesh.triangles()[f]) m[v] += mesh.face_areas()[f] / 3.0;
  return m;
}

FemOperators build_fem_operators(const TriMesh& mesh) {
  check_faces(mesh);
  const Index n = mesh.num_vertices();
  const Index m = mesh.num_faces();
  const Index d = mesh.dim();

  FemOperators ops;
  ops.dim = d;
  ops.domain_id = mesh.id();
  ops.interior = mesh.interior_vertices();
  ops.L = cotangent_laplacian(mesh);
  const Vector mass = lumped_mass(mesh);
  ops.M = SparseMatrix::diagonal(mass);

  std::vector<Triplet> gt;
  ops.A.resize(d * m);
  for (Index f = 0; f < m; ++f) {
    const FaceGeometry g = face_geometry(mesh, f);
    const auto& tri = mesh.triangles()[f];
    for (Index c = 0; c < d; ++c) {
      ops.A[c * m + f] = g.area;
      for (int k = 0; k < 3; ++k) gt.push_back({c * m + f, tri[k], g.grad[k][c]});
    }
  }
  ops.G = SparseMatrix::from_triplets(d * m, n, gt);

  const auto ni = static_cast<Index>(ops.interior.size());
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index k = 0; k < ni; ++k) slot[ops.interior[k]] = k;

  // D = blockdiag over r of [G(x,i) G(y,i) (G(z,i))].
  std::vector<Triplet> dt;
  const auto& gs = ops.G.storage();
  for (Index c = 0; c < d; ++c) {
    for (Index f = 0; f < m; ++f) {
      for (SparseMatrix::Storage::InnerIterator it(gs, c * m + f); it; ++it) {
        const Index k = slot[it.col()];
        if (k < 0) continue;
        for (Index r = 0; r < d; ++r)
          dt.push_back({r * m + f, (r * d + c) * ni + k, it.value()});
      }
    }
  }
  ops.D = SparseMatrix::from_triplets(d * m, d * d * ni, dt);

  ops.Mtilde.resize(d * d * ni);
  for (Index g = 0; g < d * d; ++g)
    for (Index k = 0; k < ni; ++k) ops.Mtilde[g * ni + k] = mass[ops.interior[k]];
  return ops;
}

SparseMatrix weak_hessian(const FemOperators& ops) {
  // D^T (A G): rows of G scaled by face areas first.
  return ops.D.transpose() * ops.G.row_scaled(ops.A);
}

WeightedOperator fem_hessian_operator(const FemOperators& ops) {
  WeightedOperator op;
  op.H = weak_hessian(ops).row_scaled(ops.Mtilde.cwiseInverse());
  op.weights = ops.Mtilde;
  return op;
}

DiscreteEnergy fem_hessian_energy(const FemOperators& ops) {
  require(!ops.interior.empty(),
          "fem: Hessian energy needs at least one interior vertex");
  DiscreteEnergy e;
  const SparseMatrix dag = weak_hessian(ops);
  e.Q = weighted_gram(dag, ops.Mtilde.cwiseInverse());
  e.factor = {dag, ops.Mtilde.cwiseInverse()};
  e.M = ops.M;
  e.kind = EnergyKind::HessianNatural;
  e.domain_id = ops.domain_id;
  return e;
}

DiscreteEnergy fem_laplacian_energy(const FemOperators& ops, LaplacianBc bc) {
  DiscreteEnergy e;
  const Vector mass = ops.M.diagonal_entries();
  if (bc == LaplacianBc::ZeroNeumann) {
    e.Q = weighted_gram(ops.L, mass.cwiseInverse());
    e.factor = {ops.L, mass.cwiseInverse()};
    e.kind = EnergyKind::LaplacianZeroNeumann;
  } else {
    require(!ops.interior.empty(),
            "fem: natural Laplacian energy needs an interior vertex");
    Vector w(static_cast<Index>(ops.interior.size()));
    for (std::size_t k = 0; k < ops.interior.size(); ++k)
      w[static_cast<Index>(k)] = 1.0 / mass[ops.interior[k]];
    const SparseMatrix rows = ops.L.select_rows(ops.interior);
    e.Q = weighted_gram(rows, w);
    e.factor = {rows, w};
    e.kind = EnergyKind::LaplacianNatural;
  }
  e.M = ops.M;
  e.domain_id = ops.domain_id;
  return e;
}

CrOperators build_cr_operators(const TriMesh& mesh) {
  check_faces(mesh);
  const Index n = mesh.num_vertices();
  const Index k = mesh.num_edges();
  CrOperators cr;

  std::vector<Triplet> et;
  for (Index e = 0; e < k; ++e) {
    et.push_back({e, mesh.edges()[e].v[0], 0.5});
    et.push_back({e, mesh.edges()[e].v[1], 0.5});
  }
  cr.E = SparseMatrix::from_triplets(k, n, et);

  // The CR basis function of the edge opposite corner a is 1 - 2 lambda_a,
  // so its gradient is -2 grad(lambda_a).
  std::vector<Triplet> lt, nt;
  cr.Mcr = Vector::Zero(k);
  for (Index f = 0; f < mesh.num_faces(); ++f) {
    const FaceGeometry g = face_geometry(mesh, f);
    const auto& fe = mesh.face_edges()[f];
    for (int a = 0; a < 3; ++a) {
      cr.Mcr[fe[a]] += g.area / 3.0;
      for (int b = 0; b < 3; ++b)
        lt.push_back({fe[a], fe[b], 4.0 * g.area * g.grad[a].dot(g.grad[b])});
    }
    for (int a = 0; a < 3; ++a) {
      const Edge& edge = mesh.edges()[fe[a]];
      if (!edge.is_boundary()) continue;
      const double len = (mesh.vertex(edge.v[0]) - mesh.vertex(edge.v[1])).norm();
      // Outward unit normal of the edge within the face plane.
      const Eigen::Vector3d normal = -g.grad[a].normalized();
      for (int b = 0; b < 3; ++b)
        nt.push_back({fe[a], fe[b], -2.0 * len * normal.dot(g.grad[b])});
    }
  }
  cr.Lcr = SparseMatrix::from_triplets(k, k, lt).symmetrized();
  cr.Ncr = SparseMatrix::from_triplets(k, k, nt);
  return cr;
}

DiscreteEnergy cr_energy(const TriMesh& mesh) {
  const CrOperators cr = build_cr_operators(mesh);
  // Stiffness minus the boundary flux: annihilates CR interpolants of
  // affine functions.
  const SparseMatrix kcr = cr.Lcr - cr.Ncr;
  DiscreteEnergy e;
  const SparseMatrix ke = kcr * cr.E;
  e.Q = weighted_gram(ke, cr.Mcr.cwiseInverse());
  e.factor = {ke, cr.Mcr.cwiseInverse()};
  e.M = SparseMatrix::diagonal(lumped_mass(mesh));
  e.kind = EnergyKind::CrouzeixRaviart;
  e.domain_id = mesh.id();
  return e;
}

}  // namespace hessmooth
