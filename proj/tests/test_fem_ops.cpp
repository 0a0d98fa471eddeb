#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "hessmooth/error.hpp"
#include "hessmooth/fd_ops.hpp"
#include "hessmooth/fem_ops.hpp"
#include "oracle.hpp"

using namespace hessmooth;

namespace {

TriMesh unit_triangle() {
  DenseMatrix p(3, 2);
  p << 0, 0, 1, 0, 0, 1;
  return TriMesh::create(p, {{0, 1, 2}});
}

Vector sample(const TriMesh& m, const std::function<double(const Eigen::Vector3d&)>& fn) {
  Vector u(m.num_vertices());
  for (Index v = 0; v < m.num_vertices(); ++v) u[v] = fn(m.vertex(v));
  return u;
}

// Flat disk rotated into the plane spanned by (1, 0, 1)/sqrt2 and (0, 1, 0).
TriMesh tilted_disk() {
  const TriMesh flat = disk_mesh(3);
  DenseMatrix p(flat.num_vertices(), 3);
  const double s = 1.0 / std::sqrt(2.0);
  for (Index v = 0; v < flat.num_vertices(); ++v) {
    const double x = flat.positions()(v, 0), y = flat.positions()(v, 1);
    p.row(v) << s * x + 0.2, y - 0.1, s * x + 0.3;
  }
  return TriMesh::create(p, flat.triangles());
}

std::vector<fixtures::NamedMesh> all_meshes() {
  auto out = fixtures::flat_meshes();
  out.push_back({"lifted-square", lift_to_3d(square_mesh(5))});
  out.push_back({"tilted-disk", tilted_disk()});
  out.push_back({"icosphere", icosphere(2)});
  return out;
}

double max_abs(const oracle::Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("unit right triangle") {
  const TriMesh t = unit_triangle();
  const Vector m = lumped_mass(t);
  for (int i = 0; i < 3; ++i) CHECK(m[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const SparseMatrix l = cotangent_laplacian(t);
  // PSD convention: off-diagonals are -1/2 cot of the opposite angle.
  CHECK(l.coeff(0, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(l.coeff(0, 2) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(std::abs(l.coeff(1, 2)) <= 1e-15);
  CHECK(l.coeff(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("operator invariants on every fixture") {
  for (const auto& [name, mesh] : all_meshes()) {
    CAPTURE(name);
    const FemOperators ops = build_fem_operators(mesh);
    CHECK(ops.dim == mesh.dim());
    CHECK(ops.L.max_asymmetry() == 0.0);
    const oracle::Mat l = oracle::dense(ops.L);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * max_abs(l));
    const oracle::Mat gag =
        oracle::dense(ops.G).transpose() * ops.A.asDiagonal() * oracle::dense(ops.G);
    CHECK(max_abs(gag - l) <= 1e-12 * max_abs(l));
    CHECK(max_abs(oracle::dense(cotangent_laplacian(mesh)) - l) <= 1e-12 * max_abs(l));

    const Vector mass = ops.M.diagonal_entries();
    CHECK(mass.minCoeff() > 0.0);
    CHECK(mass.sum() == doctest::Approx(mesh.total_area()).epsilon(1e-12));
    CHECK(ops.M.is_diagonal());

    CHECK(ops.G.multiply(Vector::Ones(mesh.num_vertices())).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("gradient reproduces linear functions") {
  for (const auto& [name, mesh] : fixtures::flat_meshes()) {
    CAPTURE(name);
    const FemOperators ops = build_fem_operators(mesh);
    const Vector u = sample(mesh, [](const Eigen::Vector3d& p) { return 0.7 - 1.5 * p.x() + 2.5 * p.y(); });
    const Vector g = ops.G.multiply(u);
    const Index m = mesh.num_faces();
    for (Index f = 0; f < m; ++f) {
      CHECK(g[f] == doctest::Approx(-1.5).epsilon(1e-12));
      CHECK(g[m + f] == doctest::Approx(2.5).epsilon(1e-12));
    }
  }
  const TriMesh tilted = tilted_disk();
  const FemOperators ops = build_fem_operators(tilted);
  // A linear function of the ambient coordinates has its gradient projected
  // onto the plane.
  const Vector u = sample(tilted, [](const Eigen::Vector3d& p) { return p.y(); });
  const Vector g = ops.G.multiply(u);
  const Index m = tilted.num_faces();
  for (Index f = 0; f < m; ++f) {
    CHECK(std::abs(g[f]) <= 1e-12);
    CHECK(g[m + f] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g[2 * m + f]) <= 1e-12);
  }
}

TEST_CASE("degenerate faces are rejected") {
  DenseMatrix p(4, 2);
  p << 0, 0, 1, 0, 2, 1e-15, 0, 1;
  CHECK_THROWS_AS(TriMesh::create(p, {{0, 1, 2}, {0, 2, 3}}), Error);
}

TEST_CASE("Hessian energy null space and dense recomputation") {
  for (const auto& [name, mesh] : fixtures::flat_meshes()) {
    CAPTURE(name);
    const FemOperators ops = build_fem_operators(mesh);
    const DiscreteEnergy e = fem_hessian_energy(ops);
    CHECK(e.kind == EnergyKind::HessianNatural);
    const Vector aff = sample(mesh, [](const Eigen::Vector3d& p) { return 1.0 - p.x() + 3 * p.y(); });
    CHECK(std::abs(e.evaluate(aff)) <= 1e-12 * e.Q.norm_inf());
    CHECK(std::abs(e.Q.quadratic_form(aff)) <= 1e-12 * e.Q.norm_inf() * aff.squaredNorm());

    const Vector u = oracle::random_vector(mesh.num_vertices(), 5);
    const Vector r = oracle::dense(ops.D).transpose() * ops.A.asDiagonal() *
                     (oracle::dense(ops.G) * u);
    const double ref = r.cwiseProduct(r).cwiseQuotient(ops.Mtilde).sum();
    CHECK(e.Q.quadratic_form(u) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(e.evaluate(u) == doctest::Approx(ref).epsilon(1e-12));
  }
  const DiscreteEnergy disk = fem_hessian_energy(build_fem_operators(disk_mesh(3)));
  CHECK(oracle::null_dimension(oracle::dense(disk.Q), disk.M.diagonal_entries(), 1e-8) == 3);
  const DiscreteEnergy sq = fem_hessian_energy(build_fem_operators(fixtures::jittered_square(6, 9)));
  CHECK(oracle::null_dimension(oracle::dense(sq.Q), sq.M.diagonal_entries(), 1e-8) == 3);
}

TEST_CASE("Hessian energy requires interior vertices") {
  CHECK_THROWS_AS(fem_hessian_energy(build_fem_operators(unit_triangle())), Error);
}

TEST_CASE("3D flat meshes contain the ambient affine functions") {
  const TriMesh t = tilted_disk();
  const DiscreteEnergy e = fem_hessian_energy(build_fem_operators(t));
  const std::function<double(const Eigen::Vector3d&)> basis[] = {
      [](const Eigen::Vector3d&) { return 1.0; }, [](const Eigen::Vector3d& p) { return p.x(); },
      [](const Eigen::Vector3d& p) { return p.y(); }, [](const Eigen::Vector3d& p) { return p.z(); }};
  oracle::Mat span(t.num_vertices(), 4);
  for (int c = 0; c < 4; ++c) {
    const Vector u = sample(t, basis[c]);
    span.col(c) = u;
    CHECK(e.Q.multiply(u).cwiseAbs().maxCoeff() <= 1e-12 * e.Q.norm_inf() * u.cwiseAbs().maxCoeff());
  }
  // On a plane z is affine in x and y, so the four samples span three dimensions.
  Eigen::FullPivLU<oracle::Mat> lu(span);
  lu.setThreshold(1e-10);
  const Eigen::Index rank = lu.rank();
  CHECK(rank == 3);
  CHECK(oracle::null_dimension(oracle::dense(e.Q), e.M.diagonal_entries(), 1e-8) >= rank);
}

TEST_CASE("Laplacian energies") {
  const TriMesh mesh = square_mesh(8);
  const FemOperators ops = build_fem_operators(mesh);
  const DiscreteEnergy nat = fem_laplacian_energy(ops, LaplacianBc::Natural);
  const DiscreteEnergy neu = fem_laplacian_energy(ops, LaplacianBc::ZeroNeumann);
  const Vector one = Vector::Ones(mesh.num_vertices());
  CHECK(std::abs(nat.evaluate(one)) <= 1e-24);
  CHECK(std::abs(neu.evaluate(one)) <= 1e-24);
  const Vector x = sample(mesh, [](const Eigen::Vector3d& p) { return p.x(); });
  CHECK(nat.evaluate(x) <= 1e-18);
  CHECK(neu.evaluate(x) > 0.1);

  const oracle::Mat lm = oracle::dense(ops.L) * oracle::dense(ops.M).inverse() * oracle::dense(ops.L);
  CHECK(max_abs(oracle::dense(neu.Q) - lm) <= 1e-12 * max_abs(lm));
}

TEST_CASE("discrete harmonic functions have zero natural energy") {
  const TriMesh mesh = fixtures::jittered_square(9, 4);
  const FemOperators ops = build_fem_operators(mesh);
  const oracle::Mat l = oracle::dense(ops.L);
  const std::vector<Index>& inner = mesh.interior_vertices();
  const std::vector<Index>& outer = mesh.boundary_vertices();
  const Vector fixed = oracle::random_vector(static_cast<int>(outer.size()), 6);
  const Vector free = oracle::gauss_solve(l(inner, inner), -l(inner, outer) * fixed);
  Vector u(mesh.num_vertices());
  u(inner) = free;
  u(outer) = fixed;
  const DiscreteEnergy nat = fem_laplacian_energy(ops, LaplacianBc::Natural);
  CHECK(nat.evaluate(u) <= 1e-18);
  const DiscreteEnergy neu = fem_laplacian_energy(ops, LaplacianBc::ZeroNeumann);
  CHECK(neu.evaluate(u) > 1e-6);
}

TEST_CASE("edge-based comparison energy") {
  for (const auto& [name, mesh] : fixtures::flat_meshes()) {
    CAPTURE(name);
    const CrOperators cr = build_cr_operators(mesh);
    CHECK(cr.E.rows() == mesh.num_edges());
    CHECK(cr.Mcr.sum() == doctest::Approx(mesh.total_area()).epsilon(1e-12));
    const DiscreteEnergy e = cr_energy(mesh);
    CHECK(e.kind == EnergyKind::CrouzeixRaviart);
    CHECK(std::abs(e.evaluate(Vector::Ones(mesh.num_vertices()))) <= 1e-12 * e.Q.norm_inf());
    const Vector aff = sample(mesh, [](const Eigen::Vector3d& p) { return 2.0 + p.x() - 0.5 * p.y(); });
    CHECK(std::abs(e.evaluate(aff)) <= 1e-12 * e.Q.norm_inf());
    CHECK(e.Q.multiply(aff).cwiseAbs().maxCoeff() <= 1e-10 * e.Q.norm_inf());
    const Vector quad = sample(mesh, [](const Eigen::Vector3d& p) { return p.x() * p.x(); });
    CHECK(e.evaluate(quad) > 0.0);
  }
}

TEST_CASE("finite differences and finite elements agree under refinement") {
  auto g = [](double x, double y) { return std::sin(2 * x) * std::exp(y); };
  std::vector<double> gaps;
  for (Index n : {8, 16, 32}) {
    const TriMesh mesh = square_mesh(n);
    const GridDomain grid = fixtures::full_grid(n + 1);
    REQUIRE(grid.num_nodes() == mesh.num_vertices());
    const DiscreteEnergy fe = fem_hessian_energy(build_fem_operators(mesh));
    const DiscreteEnergy fd = fd_hessian_energy(build_fd_hessian(grid));
    ConstraintSet cm, cg;
    for (Index v : mesh.boundary_vertices()) cm.add(v, g(mesh.positions()(v, 0), mesh.positions()(v, 1)));
    for (Index k : grid.boundary_nodes()) {
      const auto p = grid.position(k);
      cg.add(k, g(p[0], p[1]));
    }
    const Vector um = min_quadratic_eq(fe.Q, fe.M, std::nullopt, 1.0, cm);
    const Vector ug = min_quadratic_eq(fd.Q, fd.M, std::nullopt, 1.0, cg);
    double gap = 0.0;
    for (Index k = 0; k < grid.num_nodes(); ++k) {
      const auto p = grid.position(k);
      REQUIRE(std::abs(mesh.positions()(k, 0) - p[0]) < 1e-15);
      REQUIRE(std::abs(mesh.positions()(k, 1) - p[1]) < 1e-15);
      gap = std::max(gap, std::abs(um[k] - ug[k]));
    }
    MESSAGE("n = " << n << " gap " << gap);
    gaps.push_back(gap);
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
  const double c = gaps[0] * 8;
  CHECK(gaps[1] <= c / 16);
  CHECK(gaps[2] <= c / 32);
}
