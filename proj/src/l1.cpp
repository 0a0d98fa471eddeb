#include <algorithm>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numbers>

#include "hessmooth/error.hpp"
#include "hessmooth/kernels.hpp"
#include "hessmooth/solve.hpp"

namespace hessmooth {

namespace {

double weighted_norm(const Vector& v, const Vector& w) {
  return std::sqrt((v.array().square() * w.array()).sum());
}

void check_problem(const L1Problem& p) {
  const Index n = p.op.H.cols();
  require(p.options.lambda > 0.0, "l1: lambda must be positive");
  require(p.options.rho >= 0.0, "l1: rho must be non-negative");
  require(p.options.eps_primal > 0.0 && p.options.eps_dual > 0.0,
          "l1: tolerances must be positive");
  require(p.options.max_iter >= 1, "l1: max_iter must be at least 1");
  require(p.options.adapt_interval >= 0, "l1: adapt_interval must be non-negative");
  require(p.options.adapt_factor > 1.0 && p.options.adapt_balance > 1.0,
          "l1: adapt_factor and adapt_balance must exceed 1");
  require(p.mass.size() == n && p.f.size() == n, "l1: data size mismatch");
  require(p.op.weights.size() == p.op.H.rows(), "l1: weight size mismatch");
  require((p.mass.array() > 0.0).all(), "l1: mass must be positive");
  require((p.op.weights.array() > 0.0).all(), "l1: weights must be positive");
}

}  // namespace

double l1_objective(const L1Problem& problem, const Vector& u) {
  const Vector hu = problem.op.H.multiply(u);
  const double l1 = (hu.array().abs() * problem.op.weights.array()).sum();
  const Vector r = u - problem.f;
  return problem.options.lambda * l1 +
         0.5 * (r.array().square() * problem.mass.array()).sum();
}

bool L1Result::certificate_holds(const SparseMatrix& H) const {
  const Vector hu = H.multiply(u);
  const double cutoff = 1e-6 * hu.cwiseAbs().maxCoeff();
  const Vector noise =
      SparseMatrix(SparseMatrix::Storage(H.storage().cwiseAbs())).multiply(u.cwiseAbs()) *
      (64.0 * std::numeric_limits<double>::epsilon());
  for (Index k = 0; k < hu.size(); ++k) {
    if (std::abs(dual[k]) > 1.0 + 1e-6) return false;
    if (z[k] != 0.0 && std::abs(hu[k]) > std::max(cutoff, noise[k])) {
      const double s = hu[k] > 0.0 ? 1.0 : -1.0;
      if (dual[k] * s < 1.0 - 1e-4) return false;
    }
  }
  return true;
}

L1Result l1_smooth(const L1Problem& problem) {
  check_problem(problem);
  const auto& opt = problem.options;
  const SparseMatrix& H = problem.op.H;
  const Vector& w = problem.op.weights;
  const double lambda = opt.lambda;
  double rho = opt.rho > 0.0 ? opt.rho : lambda;
  const SparseMatrix gram = weighted_gram(H, w);
  const SparseMatrix mass = SparseMatrix::diagonal(problem.mass);
  auto factorize = [&](double r) {
    SpdFactorization f(mass + gram.scaled(r), 0.0);
    if (!(f.min_pivot_ratio() > 0.0))
      fail(ErrorKind::SolverFailure, "l1: splitting system is not positive definite");
    return f;
  };
  SpdFactorization factor = factorize(rho);

  const Vector mf = problem.mass.cwiseProduct(problem.f);
  const double floor = 1e-12 * (1.0 + weighted_norm(problem.f, problem.mass));
  const Index rows = H.rows();
  const SparseMatrix h_abs(SparseMatrix::Storage(H.storage().cwiseAbs()));
  constexpr double kRound = 64.0 * std::numeric_limits<double>::epsilon();

  L1Result res;
  Vector z = Vector::Zero(rows);
  Vector y = Vector::Zero(rows);
  Vector u = problem.f;
  Vector hu(rows), v(rows), z_old(rows);
  int last_change = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    u = factor.solve(mf + H.multiply_transpose(w.cwiseProduct(z - y)).eval() * rho);
    hu = H.multiply(u);
    z_old = z;
    v = hu + y;
    z.resize(rows);
    kernels::soft_threshold(std::span<const double>(v.data(), rows), lambda / rho,
                            std::span<double>(z.data(), rows));
    y += hu - z;

    const double primal = weighted_norm(hu - z, w);
    const double dual =
        rho * H.multiply_transpose(w.cwiseProduct(z - z_old)).norm();
    const double scale_p = std::max(weighted_norm(hu, w), weighted_norm(z, w));
    const double scale_d = rho * H.multiply_transpose(w.cwiseProduct(y)).norm();
    const double tol_p = opt.eps_primal * scale_p + floor +
                         kRound * weighted_norm(h_abs.multiply(u.cwiseAbs()), w);
    const double tol_d = opt.eps_dual * scale_d + floor;
    res.primal_history.push_back(primal);
    res.dual_history.push_back(dual);
    res.objective_history.push_back(l1_objective(problem, u));
    res.iterations = it;
    if (primal <= tol_p && dual <= tol_d) {
      res.u = u;
      res.z = z;
      res.dual = y * (rho / lambda);
      res.rho = rho;
      res.objective = res.objective_history.back();
      return res;
    }

    if (opt.adapt_interval > 0 && it - last_change >= opt.adapt_interval) {
      const double rp = primal / std::max(scale_p, floor);
      const double rd = dual / std::max(scale_d, floor);
      double step = 1.0;
      if (rp > opt.adapt_balance * rd) step = opt.adapt_factor;
      else if (rd > opt.adapt_balance * rp) step = 1.0 / opt.adapt_factor;
      if (step != 1.0) {
        rho *= step;
        y /= step;
        factor = factorize(rho);
        last_change = it;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "l1: no convergence after %d iterations (primal residual %.3e, "
                "dual residual %.3e)",
                opt.max_iter, res.primal_history.back(), res.dual_history.back());
  fail(ErrorKind::SolverFailure, buf);
}

// ------------------------------------------------------------------ flow

namespace {

struct FlowOps {
  WeightedOperator op;
  Vector mass;
  std::vector<Index> row_vertex;  // vertex owning each operator row
};

FlowOps flow_operators(const TriMesh& mesh, FlowOperator kind) {
  const FemOperators fem = build_fem_operators(mesh);
  FlowOps out;
  out.mass = fem.M.diagonal_entries();
  if (kind == FlowOperator::Hessian) {
    out.op = fem_hessian_operator(fem);
    const auto ni = static_cast<Index>(fem.interior.size());
    for (Index g = 0; g < fem.dim * fem.dim; ++g)
      for (Index k = 0; k < ni; ++k) out.row_vertex.push_back(fem.interior[k]);
  } else {
    out.op.H = fem.L.row_scaled(out.mass.cwiseInverse());
    out.op.weights = out.mass;
    for (Index v = 0; v < mesh.num_vertices(); ++v) out.row_vertex.push_back(v);
  }
  return out;
}

Vector energy_density(const TriMesh& mesh, const FlowOps& ops) {
  Vector density = Vector::Zero(mesh.num_vertices());
  for (Index c = 0; c < mesh.dim(); ++c) {
    const Vector hx = ops.op.H.multiply(mesh.positions().col(c));
    for (Index r = 0; r < hx.size(); ++r)
      density[ops.row_vertex[r]] += std::abs(hx[r]);
  }
  return density;
}

}  // namespace

std::vector<FlowStep> l1_flow(const TriMesh& mesh, double lambda, Index steps,
                              FlowOperator kind, L1Options options) {
  require(mesh.dim() == 3, "flow: mesh must be 3D");
  require(steps >= 1, "flow: steps must be at least 1");
  require(lambda > 0.0, "flow: lambda must be positive");
  options.lambda = lambda;

  std::vector<FlowStep> out;
  FlowOps ops = flow_operators(mesh, kind);
  out.push_back({mesh, energy_density(mesh, ops)});
  for (Index s = 1; s <= steps; ++s) {
    const TriMesh& cur = out.back().mesh;
    try {
      DenseMatrix next(cur.num_vertices(), cur.dim());
      for (Index c = 0; c < cur.dim(); ++c) {
        L1Problem p{ops.op, ops.mass, cur.positions().col(c), options};
        next.col(c) = l1_smooth(p).u;
      }
      TriMesh moved = cur.with_positions(std::move(next));
      ops = flow_operators(moved, kind);
      Vector density = energy_density(moved, ops);
      out.push_back({std::move(moved), std::move(density)});
    } catch (const Error& e) {
      fail(e.kind(), "flow: step " + std::to_string(s) + ": " + e.what());
    }
  }
  return out;
}

double absolute_angle_defect(const TriMesh& mesh, double crease_angle) {
  const Index n = mesh.num_vertices();
  std::vector<Eigen::Vector3d> normals;
  normals.reserve(static_cast<std::size_t>(mesh.num_faces()));
  for (const auto& t : mesh.triangles())
    normals.push_back((mesh.vertex(t[1]) - mesh.vertex(t[0]))
                          .cross(mesh.vertex(t[2]) - mesh.vertex(t[0]))
                          .normalized());

  std::vector<char> crease(static_cast<std::size_t>(n), 0);
  for (const Edge& e : mesh.edges()) {
    if (e.is_boundary()) continue;
    const double c = std::clamp(normals[e.face[0]].dot(normals[e.face[1]]), -1.0, 1.0);
    if (std::acos(c) > crease_angle) crease[e.v[0]] = crease[e.v[1]] = 1;
  }

  Vector angle_sum = Vector::Zero(n);
  for (const auto& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d a = mesh.vertex(t[(k + 1) % 3]) - mesh.vertex(t[k]);
      const Eigen::Vector3d b = mesh.vertex(t[(k + 2) % 3]) - mesh.vertex(t[k]);
      angle_sum[t[k]] += std::atan2(a.cross(b).norm(), a.dot(b));
    }
  }
  double total = 0.0;
  for (Index v : mesh.interior_vertices())
    if (!crease[v]) total += std::abs(2.0 * std::numbers::pi - angle_sum[v]);
  return total;
}

}  // namespace hessmooth
