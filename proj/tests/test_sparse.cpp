#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hessmooth/error.hpp"
#include "hessmooth/fd_ops.hpp"
#include "hessmooth/fem_ops.hpp"
#include "hessmooth/linalg.hpp"
#include "oracle.hpp"

using namespace hessmooth;

namespace {

SparseMatrix random_sparse(Index rows, Index cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0), v(-1.0, 1.0);
  std::vector<Triplet> t;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (u(rng) < density) t.push_back({r, c, v(rng)});
  return SparseMatrix::from_triplets(rows, cols, t);
}

SparseMatrix random_spd(Index n, std::uint64_t seed) {
  const SparseMatrix b = random_sparse(n, n, 0.3, seed);
  return (b.transpose() * b + SparseMatrix::identity(n).scaled(0.5)).symmetrized();
}

std::vector<DiscreteEnergy> all_energies() {
  std::vector<DiscreteEnergy> out;
  for (const auto& [name, g] : fixtures::grids()) {
    if (g.num_nodes() > 800) continue;
    out.push_back(fd_hessian_energy(build_fd_hessian(g)));
    out.push_back(build_fd_laplacian_energy(g, LaplacianBc::Natural));
    out.push_back(build_fd_laplacian_energy(g, LaplacianBc::ZeroNeumann));
  }
  for (const auto& [name, m] : fixtures::flat_meshes()) {
    const FemOperators ops = build_fem_operators(m);
    out.push_back(fem_hessian_energy(ops));
    out.push_back(fem_laplacian_energy(ops, LaplacianBc::Natural));
    out.push_back(fem_laplacian_energy(ops, LaplacianBc::ZeroNeumann));
    out.push_back(cr_energy(m));
  }
  return out;
}

}  // namespace

TEST_CASE("triplet assembly sums duplicates and sorts columns") {
  const std::vector<Triplet> t{{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {1, 1, -1.0}};
  const SparseMatrix a = SparseMatrix::from_triplets(2, 3, t);
  CHECK(a.nnz() == 3);
  CHECK(a.coeff(0, 2) == 4.0);
  const auto& s = a.storage();
  CHECK(s.innerIndexPtr()[0] == 0);
  CHECK(s.innerIndexPtr()[1] == 2);
  const std::vector<Triplet> bad{{2, 0, 1.0}};
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, bad), Error);
}

TEST_CASE("spmv") {
  Vector x(5);
  x << 1, -2, 3, 0.5, 7;
  CHECK(SparseMatrix::identity(5).multiply(x) == x);
  CHECK(SparseMatrix(5, 5).multiply(x) == Vector::Zero(5));
  const SparseMatrix a = random_sparse(10, 10, 0.4, 1);
  const Vector y = oracle::random_vector(10, 2);
  const Vector ref = oracle::dense(a) * y;
  CHECK((a.multiply(y) - ref).cwiseAbs().maxCoeff() <= 1e-14 * a.norm_inf() * y.norm());
  const Vector yt = oracle::dense(a).transpose() * y;
  CHECK((a.multiply_transpose(y) - yt).cwiseAbs().maxCoeff() <= 1e-14 * a.norm_inf() * y.norm() * 10);
  CHECK_THROWS_AS(a.multiply(Vector::Zero(3)), Error);
}

TEST_CASE("matrix algebra against dense") {
  const SparseMatrix a = random_sparse(7, 5, 0.5, 3), b = random_sparse(5, 6, 0.5, 4);
  CHECK((oracle::dense(a * b) - oracle::dense(a) * oracle::dense(b)).norm() < 1e-13);
  CHECK((oracle::dense(a.transpose()) - oracle::dense(a).transpose()).norm() == 0.0);
  const Vector w = oracle::random_vector(7, 5, 0.5, 2.0);
  CHECK((oracle::dense(a.row_scaled(w)) - w.asDiagonal() * oracle::dense(a)).norm() < 1e-14);
  const SparseMatrix g = weighted_gram(a, w);
  CHECK(g.max_asymmetry() == 0.0);
  CHECK((oracle::dense(g) - oracle::dense(a).transpose() * w.asDiagonal() * oracle::dense(a))
            .norm() < 1e-13);
  const std::vector<Index> rows{4, 0}, cols{1, 3};
  const SparseMatrix s = a.select(rows, cols);
  CHECK(s.coeff(0, 1) == a.coeff(4, 3));
  CHECK(s.coeff(1, 0) == a.coeff(0, 1));
}

TEST_CASE("MatrixMarket export") {
  const std::vector<Triplet> t{{0, 0, 1.5}, {1, 0, -2.0}};
  std::ostringstream os;
  SparseMatrix::from_triplets(2, 2, t).write_matrix_market(os);
  const std::string s = os.str();
  CHECK(s.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
  CHECK(s.find("2 2 2") != std::string::npos);
  CHECK(s.find("1 1 1.5") != std::string::npos);
  CHECK(s.find("2 1 -2") != std::string::npos);
}

TEST_CASE("solve_spd") {
  Vector d(4);
  d << 2, 4, 8, 0.5;
  const Vector b = oracle::random_vector(4, 9);
  const Vector x = solve_spd(SparseMatrix::diagonal(d), b);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i] / d[i]).epsilon(1e-15));

  const FemOperators ops = build_fem_operators(disk_mesh(3));
  const Vector ones = Vector::Ones(ops.M.rows());
  CHECK((solve_spd(ops.M, ops.M.multiply(ones)) - ones).cwiseAbs().maxCoeff() < 1e-14);

  const SparseMatrix a = random_spd(20, 11);
  const Vector rhs = oracle::random_vector(20, 12);
  const Vector xr = oracle::gauss_solve(oracle::dense(a), rhs);
  const Vector xs = solve_spd(a, rhs);
  CHECK((xs - xr).norm() <= 1e-10 * xr.norm());
  CHECK((a.multiply(xs) - rhs).norm() <= 1e-10 * (a.norm_inf() * xs.norm() + rhs.norm()));
}

TEST_CASE("solve_spd reports breakdown with pivot information") {
  Vector d(3);
  d << 1, -1, 1;
  try {
    solve_spd(SparseMatrix::diagonal(d), Vector::Ones(3));
    FAIL("expected breakdown");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SolverFailure);
    CHECK(std::string(e.what()).find("pivot") != std::string::npos);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("min_quadratic_eq reproduces affine boundary data") {
  const GridDomain g = fixtures::full_grid(5);
  const DiscreteEnergy e = fd_hessian_energy(build_fd_hessian(g));
  ConstraintSet c;
  for (Index k : g.boundary_nodes()) {
    const auto p = g.position(k);
    c.add(k, 2 * p[0] - p[1] + 1);
  }
  const Vector u = min_quadratic_eq(e.Q, e.M, std::nullopt, 1.0, c);
  for (Index k = 0; k < g.num_nodes(); ++k) {
    const auto p = g.position(k);
    CHECK(u[k] == doctest::Approx(2 * p[0] - p[1] + 1).epsilon(1e-9));
  }
}

TEST_CASE("min_quadratic_eq data-term limit and bar line") {
  const GridDomain g = fixtures::full_grid(6);
  const DiscreteEnergy e = fd_hessian_energy(build_fd_hessian(g));
  const Vector f = oracle::random_vector(g.num_nodes(), 13);
  const Vector u = min_quadratic_eq(e.Q, e.M, f, 1e-12, {});
  CHECK((u - f).cwiseAbs().maxCoeff() <= 1e-8);

  const Index n = 21;
  const DiscreteEnergy bar = build_fd_bar_1d(n, 1.0 / (n - 1));
  ConstraintSet two;
  two.add(3, 1.0);
  two.add(15, -2.0);
  const Vector line = min_quadratic_eq(bar.Q, bar.M, std::nullopt, 1.0, two);
  for (Index i = 0; i < n; ++i)
    CHECK(line[i] == doctest::Approx(1.0 + (i - 3) * (-3.0 / 12.0)).epsilon(1e-9));
}

TEST_CASE("min_quadratic_eq errors") {
  const DiscreteEnergy bar = build_fd_bar_1d(11, 0.1);
  ConstraintSet one;
  one.add(4, 1.0);
  try {
    min_quadratic_eq(bar.Q, bar.M, std::nullopt, 1.0, one);
    FAIL("expected rank deficiency");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
  CHECK_THROWS_AS(min_quadratic_eq(bar.Q, bar.M, std::nullopt, 1.0, {}), Error);
  ConstraintSet out;
  out.add(11, 0.0);
  out.add(0, 0.0);
  CHECK_THROWS_AS(min_quadratic_eq(bar.Q, bar.M, std::nullopt, 1.0, out), Error);
}

TEST_CASE("null-space constraints return the null vector") {
  const TriMesh m = disk_mesh(4);
  const DiscreteEnergy e = fem_hessian_energy(build_fem_operators(m));
  ConstraintSet c;
  for (Index v : {0, 7, 20, 33}) c.add(v, 0.3 - m.positions()(v, 0) + 2 * m.positions()(v, 1));
  const Vector u = min_quadratic_eq(e.Q, e.M, std::nullopt, 1.0, c);
  Vector g(m.num_vertices());
  for (Index v = 0; v < m.num_vertices(); ++v)
    g[v] = 0.3 - m.positions()(v, 0) + 2 * m.positions()(v, 1);
  CHECK((u - g).cwiseAbs().maxCoeff() <= 1e-9 * g.cwiseAbs().maxCoeff());
}

TEST_CASE("ConstrainedSystem reuses one factorization") {
  const DiscreteEnergy bar = build_fd_bar_1d(15, 1.0 / 14);
  const std::vector<Index> fixed{0, 14};
  const ConstrainedSystem sys(bar.Q, fixed);
  for (double v : {1.0, -3.0}) {
    Vector vals(2);
    vals << v, 2 * v;
    const Vector u = sys.solve(vals, Vector::Zero(15));
    for (Index i = 0; i < 15; ++i) CHECK(u[i] == doctest::Approx(v + v * i / 14.0).epsilon(1e-9));
  }
}

TEST_CASE("smallest_eigenpairs trivial cases") {
  const Vector m = oracle::random_vector(12, 14, 0.5, 1.5);
  const SparseMatrix mm = SparseMatrix::diagonal(m);
  const EigenPairs same = smallest_eigenpairs(mm, mm, 4);
  for (int i = 0; i < 4; ++i) CHECK(same.values[i] == doctest::Approx(1.0).epsilon(1e-10));

  const EigenPairs zero = smallest_eigenpairs(SparseMatrix(12, 12), mm, 3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(zero.values[i]) <= 1e-12);
  const DenseMatrix gram = zero.vectors.transpose() * m.asDiagonal() * zero.vectors;
  CHECK((gram - DenseMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(smallest_eigenpairs(mm, mm, 12), Error);
}

TEST_CASE("smallest_eigenpairs matches a dense oracle") {
  const GridDomain g = hessmooth::grid_from_predicate(6, 5, 0.2, [](double, double) { return true; });
  REQUIRE(g.num_nodes() == 30);
  const DiscreteEnergy e = fd_hessian_energy(build_fd_hessian(g));
  const EigenPairs ep = smallest_eigenpairs(e.Q, e.M, 6);
  const oracle::Eig ref = oracle::generalized_eigen(oracle::dense(e.Q), e.M.diagonal_entries());
  const double top = ref.values.maxCoeff();
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(ep.values[i] - ref.values[i]) <= 1e-8 * std::max(std::abs(ref.values[i]), 1e-8 * top) + 1e-12 * top);
  const DenseMatrix gram = ep.vectors.transpose() * e.M.diagonal_entries().asDiagonal() * ep.vectors;
  CHECK((gram - DenseMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
  for (int i = 0; i < 6; ++i) CHECK(ep.residuals[i] <= 1e-8 * e.Q.norm_inf());
}

TEST_CASE("assembled energies are exactly symmetric and PSD") {
  std::mt19937_64 rng(15);
  for (const DiscreteEnergy& e : all_energies()) {
    CHECK(e.Q.max_asymmetry() == 0.0);
    CHECK(e.M.is_diagonal());
    CHECK(e.M.diagonal_entries().minCoeff() > 0.0);
    const double qn = e.Q.norm_inf();
    for (int t = 0; t < 100; ++t) {
      const Vector x = oracle::random_vector(e.size(), rng());
      CHECK(e.Q.quadratic_form(x) >= -1e-10 * qn * x.squaredNorm());
    }
    if (!e.factor.empty()) {
      const SparseMatrix q2 = weighted_gram(e.factor.H, e.factor.weights);
      CHECK((oracle::dense(q2) - oracle::dense(e.Q)).cwiseAbs().maxCoeff() <= 1e-12 * qn);
    }
  }
}

TEST_CASE("energy gradient matches central differences") {
  const DiscreteEnergy e = fem_hessian_energy(build_fem_operators(fixtures::jittered_square(6, 2)));
  const Vector u = oracle::random_vector(e.size(), 16);
  const Vector d = oracle::random_vector(e.size(), 17);
  const double analytic = e.Q.multiply(u).dot(d);
  const double t = 1e-4;
  const double numeric =
      (0.5 * e.Q.quadratic_form(u + t * d) - 0.5 * e.Q.quadratic_form(u - t * d)) / (2 * t);
  CHECK(numeric == doctest::Approx(analytic).epsilon(1e-6));
}

TEST_CASE("SpdFactorization regularization and diagnostics") {
  const DiscreteEnergy e = build_fd_laplacian_energy(fixtures::full_grid(6), LaplacianBc::ZeroNeumann);
  const SpdFactorization reg(e.Q, 1e-8);
  CHECK(reg.min_pivot_ratio() > 0.0);
  const SparseMatrix a = e.Q + e.M;
  const SpdFactorization f(a, 0.0);
  const Vector b = oracle::random_vector(e.size(), 18);
  CHECK((a.multiply(f.solve(b)) - b).norm() <= 1e-10 * (a.norm_inf() * f.solve(b).norm() + b.norm()));
}
