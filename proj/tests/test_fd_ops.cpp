#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "hessmooth/error.hpp"
#include "hessmooth/fd_ops.hpp"
#include "oracle.hpp"

using namespace hessmooth;

namespace {

Vector sample(const GridDomain& g, const std::function<double(double, double)>& fn) {
  Vector u(g.num_nodes());
  for (Index k = 0; k < g.num_nodes(); ++k) {
    const auto p = g.position(k);
    u[k] = fn(p[0], p[1]);
  }
  return u;
}

GridDomain unit_spacing(Index n) {
  return grid_from_predicate(n, n, 1.0, [](double, double) { return true; });
}

using Fn = std::function<double(double, double)>;

std::vector<Fn> affine_basis() {
  return {[](double, double) { return 1.0; }, [](double x, double) { return x; },
          [](double, double y) { return y; }};
}

std::vector<GridDomain> small_grids() {
  return {fixtures::full_grid(9), fixtures::l_grid(13), fixtures::annulus_grid(24)};
}

// Row-major scan of mask neighbours, independent of the library's topology.
bool connected_interior(const GridDomain& g) {
  std::vector<Index> seen(g.num_nodes(), 0), stack{g.interior().front()};
  seen[stack[0]] = 1;
  Index count = 0;
  while (!stack.empty()) {
    const Index k = stack.back();
    stack.pop_back();
    ++count;
    const auto [i, j] = g.node_ij(k);
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const Index ii = i + di, jj = j + dj;
      if (ii < 0 || jj < 0 || ii >= g.ny() || jj >= g.nx() || !g.masked(ii, jj)) continue;
      const Index m = g.node_index(ii, jj);
      if (!g.is_interior(m) || seen[m]) continue;
      seen[m] = 1;
      stack.push_back(m);
    }
  }
  return count == static_cast<Index>(g.interior().size());
}

}  // namespace

TEST_CASE("stencils are exact on quadratics") {
  const GridDomain g = unit_spacing(6);
  const FdHessian fd = build_fd_hessian(g);
  const Index ni = fd.num_interior;
  REQUIRE(ni == 16);
  CHECK(fd.H.rows() == 3 * ni);

  const Vector hx2 = fd.H.multiply(sample(g, [](double x, double) { return x * x; }));
  for (Index r = 0; r < ni; ++r) {
    CHECK(hx2[r] == doctest::Approx(2.0));
    CHECK(std::abs(hx2[ni + r]) <= 1e-12);
    CHECK(std::abs(hx2[2 * ni + r]) <= 1e-12);
  }

  const WeightedOperator plain = fd.elementwise();
  const Vector hxy = plain.H.multiply(sample(g, [](double x, double y) { return x * y; }));
  for (Index r = 0; r < ni; ++r) {
    CHECK(std::abs(hxy[r]) <= 1e-12);
    CHECK(hxy[2 * ni + r] == doctest::Approx(1.0));
  }
  const Vector scaled = fd.H.multiply(sample(g, [](double x, double y) { return x * y; }));
  CHECK(scaled[2 * ni] == doctest::Approx(std::sqrt(2.0)));

  const Vector aff = fd.H.multiply(sample(g, [](double x, double y) { return 3 - x + 2 * y; }));
  CHECK(aff.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Hessian rows have the stencil sparsity") {
  for (const GridDomain& g : small_grids()) {
    const FdHessian fd = build_fd_hessian(g);
    const auto& s = fd.H.storage();
    const Index ni = fd.num_interior;
    for (Index r = 0; r < fd.H.rows(); ++r) {
      const Index count = s.outerIndexPtr()[r + 1] - s.outerIndexPtr()[r];
      double sum = 0.0, mag = 0.0;
      for (Index p = s.outerIndexPtr()[r]; p < s.outerIndexPtr()[r + 1]; ++p) {
        sum += s.valuePtr()[p];
        mag += std::abs(s.valuePtr()[p]);
      }
      CHECK(count == (r < 2 * ni ? 3 : 4));
      CHECK(std::abs(sum) <= 1e-14 * mag);
    }
    const double h = g.h();
    for (const auto& fn : affine_basis())
      CHECK(fd.H.multiply(sample(g, fn)).cwiseAbs().maxCoeff() <= 1e-12 / (h * h));
    for (Index r = 0; r < fd.row_weights.size(); ++r) CHECK(fd.row_weights[r] == h * h);
  }
}

TEST_CASE("Hessian energy") {
  const GridDomain g = unit_spacing(5);
  const DiscreteEnergy e = fd_hessian_energy(build_fd_hessian(g));
  CHECK(e.kind == EnergyKind::HessianNatural);
  CHECK(e.evaluate(sample(g, [](double x, double) { return x * x; })) ==
        doctest::Approx(4.0 * 9));
  CHECK(std::abs(e.evaluate(sample(g, [](double x, double y) { return 1 + x - y; })))
        <= 1e-12 * e.Q.norm_inf());
  for (Index k = 0; k < g.num_nodes(); ++k) CHECK(e.M.coeff(k, k) == 1.0);

  const GridDomain a = fixtures::annulus_grid(24);
  const FdHessian fd = build_fd_hessian(a);
  const DiscreteEnergy ea = fd_hessian_energy(fd);
  const Vector u = oracle::random_vector(a.num_nodes(), 3);
  const Vector hu = oracle::dense(fd.H) * u;
  const double ref = hu.cwiseProduct(hu).dot(fd.row_weights);
  CHECK(ea.evaluate(u) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("empty interior is rejected") {
  CHECK_THROWS_AS(grid_from_predicate(5, 5, 0.1, [](double x, double y) {
                    return x < 0.05 || y < 0.05;
                  }),
                  Error);
}

TEST_CASE("Laplacian kinds") {
  const GridDomain g = fixtures::full_grid(9);
  const DiscreteEnergy nat = build_fd_laplacian_energy(g, LaplacianBc::Natural);
  const DiscreteEnergy neu = build_fd_laplacian_energy(g, LaplacianBc::ZeroNeumann);
  CHECK(nat.kind == EnergyKind::LaplacianNatural);
  CHECK(neu.kind == EnergyKind::LaplacianZeroNeumann);
  const Vector one = Vector::Ones(g.num_nodes());
  CHECK(std::abs(nat.evaluate(one)) <= 1e-12 * nat.Q.norm_inf());
  CHECK(std::abs(neu.evaluate(one)) <= 1e-12 * neu.Q.norm_inf());
  const Vector x = sample(g, [](double x, double) { return x; });
  CHECK(std::abs(nat.evaluate(x)) <= 1e-12 * nat.Q.norm_inf());
  CHECK(neu.evaluate(x) > 1.0);
}

TEST_CASE("discrete harmonic functions have zero natural energy") {
  const GridDomain g = fixtures::l_grid(13);
  const WeightedOperator lap = build_fd_laplacian(g, LaplacianBc::Natural);
  const oracle::Mat l = oracle::dense(lap.H);
  std::vector<int> inner(g.interior().begin(), g.interior().end());
  std::vector<int> outer;
  for (Index k = 0; k < g.num_nodes(); ++k)
    if (!g.is_interior(k)) outer.push_back(k);
  const Vector fixed = oracle::random_vector(static_cast<int>(outer.size()), 4);
  const oracle::Mat a = l(Eigen::all, inner);
  const Vector rhs = -l(Eigen::all, outer) * fixed;
  const Vector free = oracle::gauss_solve(a, rhs);
  Vector u(g.num_nodes());
  u(inner) = free;
  u(outer) = fixed;
  const DiscreteEnergy nat = build_fd_laplacian_energy(g, LaplacianBc::Natural);
  CHECK(nat.evaluate(u) <= 1e-18);
}

TEST_CASE("numerical null spaces") {
  for (const GridDomain& g : small_grids()) {
    CAPTURE(g.num_nodes());
    REQUIRE(connected_interior(g));
    const DiscreteEnergy hess = fd_hessian_energy(build_fd_hessian(g));
    const DiscreteEnergy neu = build_fd_laplacian_energy(g, LaplacianBc::ZeroNeumann);
    const Vector m = hess.M.diagonal_entries();
    CHECK(oracle::null_dimension(oracle::dense(hess.Q), m, 1e-8) == 3);
    CHECK(oracle::null_dimension(oracle::dense(neu.Q), m, 1e-8) == 1);
    for (const auto& fn : affine_basis()) {
      const Vector u = sample(g, fn);
      CHECK(hess.Q.multiply(u).cwiseAbs().maxCoeff() <= 1e-12 * hess.Q.norm_inf());
    }
  }
  const GridDomain g5 = fixtures::full_grid(5);
  const DiscreteEnergy nat = build_fd_laplacian_energy(g5, LaplacianBc::Natural);
  CHECK(oracle::null_dimension(oracle::dense(nat.Q), nat.M.diagonal_entries(), 1e-8) ==
        g5.num_nodes() - static_cast<Index>(g5.interior().size()));
}

TEST_CASE("blend") {
  const GridDomain g = fixtures::annulus_grid(24);
  const DiscreteEnergy hess = fd_hessian_energy(build_fd_hessian(g));
  const DiscreteEnergy lap = build_fd_laplacian_energy(g, LaplacianBc::Natural);
  CHECK((oracle::dense(blend_energy(hess, lap, 1.0).Q) - oracle::dense(hess.Q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((oracle::dense(blend_energy(hess, lap, 0.0).Q) - oracle::dense(lap.Q)).cwiseAbs().maxCoeff() == 0.0);
  const DiscreteEnergy half = blend_energy(hess, lap, 0.5);
  CHECK(half.kind == EnergyKind::Blend);
  for (int t = 0; t < 5; ++t) {
    const Vector u = oracle::random_vector(g.num_nodes(), 20 + t);
    const double ref = 0.5 * (lap.evaluate(u) + hess.evaluate(u));
    CHECK(std::abs(half.evaluate(u) - ref) <= 1e-14 * ref);
  }
  const DiscreteEnergy neu = build_fd_laplacian_energy(g, LaplacianBc::ZeroNeumann);
  CHECK_THROWS_AS(blend_energy(hess, neu, 0.5), Error);
  CHECK_THROWS_AS(blend_energy(hess, lap, 1.5), Error);
  const DiscreteEnergy other = build_fd_laplacian_energy(fixtures::annulus_grid(25), LaplacianBc::Natural);
  CHECK_THROWS_AS(blend_energy(hess, other, 0.5), Error);
}

TEST_CASE("bending bar") {
  const Index n = 11;
  const double h = 0.1;
  const DiscreteEnergy bar = build_fd_bar_1d(n, h);
  Vector lin(n), quad(n);
  for (Index i = 0; i < n; ++i) {
    lin[i] = 2.0 - 3.0 * i * h;
    quad[i] = (i * h) * (i * h);
  }
  CHECK(std::abs(bar.evaluate(lin)) <= 1e-12 * bar.Q.norm_inf());
  CHECK(bar.evaluate(quad) == doctest::Approx(h * 4.0 * (n - 2)));
  CHECK_THROWS_AS(build_fd_bar_1d(4, 0.25), Error);
}

TEST_CASE("bending bar under uniform load converges at second order") {
  auto exact = [](double x) { return -(x * x * x * x - 2 * x * x * x + x) / 24.0; };
  std::vector<double> errors;
  for (Index n : {21, 41, 81}) {
    const double h = 1.0 / (n - 1);
    const DiscreteEnergy bar = build_fd_bar_1d(n, h);
    QuadraticProblem p;
    p.Q = &bar.Q;
    p.load = bar.M.diagonal_entries();
    p.constraints.add(0, 0.0);
    p.constraints.add(n - 1, 0.0);
    const Vector u = min_quadratic_eq(p);
    double err = 0.0;
    for (Index i = 0; i < n; ++i) err = std::max(err, std::abs(u[i] - exact(i * h)));
    errors.push_back(err);
  }
  CHECK(errors[0] < 1e-3);
  CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
  CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
}
