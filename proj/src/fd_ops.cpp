#include "hessmooth/fd_ops.hpp"

#include <cmath>
#include <numbers>

#include "hessmooth/error.hpp"

namespace hessmooth {

namespace {

struct FdBlocks {
  std::vector<Triplet> xx, yy, xy;
};

FdBlocks hessian_blocks(const GridDomain& grid) {
  const double ih2 = 1.0 / (grid.h() * grid.h());
  FdBlocks b;
  const auto& interior = grid.interior();
  for (std::size_t r = 0; r < interior.size(); ++r) {
    const auto row = static_cast<Index>(r);
    const auto [i, j] = grid.node_ij(interior[r]);
    auto node = [&](Index di, Index dj) {
      const Index k = grid.node_index(i + di, j + dj);
      if (k < 0) fail(ErrorKind::InvalidInput, "fd: interior stencil leaves mask");
      return k;
    };
    b.xx.push_back({row, node(0, -1), ih2});
    b.xx.push_back({row, node(0, 0), -2.0 * ih2});
    b.xx.push_back({row, node(0, 1), ih2});
    b.yy.push_back({row, node(-1, 0), ih2});
    b.yy.push_back({row, node(0, 0), -2.0 * ih2});
    b.yy.push_back({row, node(1, 0), ih2});
    const double q = 0.25 * ih2;
    b.xy.push_back({row, node(-1, -1), q});
    b.xy.push_back({row, node(-1, 1), -q});
    b.xy.push_back({row, node(1, -1), -q});
    b.xy.push_back({row, node(1, 1), q});
  }
  return b;
}

std::vector<Triplet> stack(std::initializer_list<const std::vector<Triplet>*> blocks,
                           Index rows_per_block,
                           std::initializer_list<double> scales) {
  std::vector<Triplet> out;
  Index offset = 0;
  auto s = scales.begin();
  for (const auto* blk : blocks) {
    for (const auto& t : *blk) out.push_back({t.row + offset, t.col, t.value * *s});
    offset += rows_per_block;
    ++s;
  }
  return out;
}


/// Rows of a stacked over rows of b, weights scaled by sa and sb.
WeightedOperator stack_operators(const WeightedOperator& a, double sa,
                                 const WeightedOperator& b, double sb) {
  std::vector<Triplet> t;
  Index offset = 0;
  for (const WeightedOperator* op : {&a, &b}) {
    const auto& st = op->H.storage();
    for (Index r = 0; r < st.outerSize(); ++r)
      for (SparseMatrix::Storage::InnerIterator it(st, r); it; ++it)
        t.push_back({offset + r, static_cast<Index>(it.col()), it.value()});
    offset += op->H.rows();
  }
  WeightedOperator out;
  out.H = SparseMatrix::from_triplets(offset, a.H.cols(), t);
  out.weights.resize(offset);
  out.weights << a.weights * sa, b.weights * sb;
  return out;
}

}  // namespace

FdHessian build_fd_hessian(const GridDomain& grid) {
  const auto ni = static_cast<Index>(grid.interior().size());
  require(ni > 0, "fd: empty interior");
  const FdBlocks b = hessian_blocks(grid);
  FdHessian fd;
  fd.num_interior = ni;
  fd.h = grid.h();
  fd.domain_id = grid.id();
  const auto t = stack({&b.xx, &b.yy, &b.xy}, ni, {1.0, 1.0, std::numbers::sqrt2});
  fd.H = SparseMatrix::from_triplets(3 * ni, grid.num_nodes(), t);
  fd.row_weights = Vector::Constant(3 * ni, grid.h() * grid.h());
  return fd;
}

WeightedOperator FdHessian::elementwise() const {
  const Index ni = num_interior;
  Vector unscale = Vector::Ones(3 * ni);
  unscale.tail(ni).setConstant(1.0 / std::numbers::sqrt2);
  WeightedOperator op;
  op.H = H.row_scaled(unscale);
  op.weights = Vector::Constant(3 * ni, h * h);
  op.weights.tail(ni).setConstant(2.0 * h * h);
  return op;
}

DiscreteEnergy fd_hessian_energy(const FdHessian& fd) {
  DiscreteEnergy e;
  e.Q = weighted_gram(fd.H, fd.row_weights);
  e.factor = {fd.H, fd.row_weights};
  e.M = SparseMatrix::diagonal(Vector::Constant(fd.H.cols(), fd.h * fd.h));
  e.kind = EnergyKind::HessianNatural;
  e.domain_id = fd.domain_id;
  return e;
}

WeightedOperator build_fd_laplacian(const GridDomain& grid, LaplacianBc bc) {
  require(!grid.interior().empty(), "fd: empty interior");
  const double ih2 = 1.0 / (grid.h() * grid.h());
  std::vector<Triplet> t;
  std::vector<Index> rows;
  if (bc == LaplacianBc::Natural) {
    rows = grid.interior();
  } else {
    for (Index k = 0; k < grid.num_nodes(); ++k) rows.push_back(k);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = static_cast<Index>(r);
    const Index k = rows[r];
    const auto [i, j] = grid.node_ij(k);
    // One axis of the second difference; a missing neighbor takes the value
    // mirrored from the opposite side.
    auto axis = [&](Index di, Index dj) {
      const Index lo = grid.node_index(i - di, j - dj);
      const Index hi = grid.node_index(i + di, j + dj);
      if (lo >= 0 && hi >= 0) {
        t.push_back({row, lo, ih2});
        t.push_back({row, hi, ih2});
        t.push_back({row, k, -2.0 * ih2});
      } else if (lo >= 0 || hi >= 0) {
        require(bc == LaplacianBc::ZeroNeumann, "fd: interior stencil leaves mask");
        t.push_back({row, lo >= 0 ? lo : hi, 2.0 * ih2});
        t.push_back({row, k, -2.0 * ih2});
      }
    };
    axis(0, 1);
    axis(1, 0);
  }
  WeightedOperator op;
  op.H = SparseMatrix::from_triplets(static_cast<Index>(rows.size()),
                                     grid.num_nodes(), t);
  op.weights = Vector::Constant(op.H.rows(), grid.h() * grid.h());
  return op;
}

DiscreteEnergy build_fd_laplacian_energy(const GridDomain& grid,
                                         LaplacianBc bc) {
  const WeightedOperator op = build_fd_laplacian(grid, bc);
  DiscreteEnergy e;
  e.Q = weighted_gram(op.H, op.weights);
  e.factor = op;
  e.M = SparseMatrix::diagonal(
      Vector::Constant(grid.num_nodes(), grid.h() * grid.h()));
  e.kind = bc == LaplacianBc::Natural ? EnergyKind::LaplacianNatural
                                      : EnergyKind::LaplacianZeroNeumann;
  e.domain_id = grid.id();
  return e;
}

DiscreteEnergy blend_energy(const DiscreteEnergy& hess,
                            const DiscreteEnergy& lap, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "blend: alpha must lie in [0, 1]");
  require(hess.kind == EnergyKind::HessianNatural,
          "blend: first energy must be the Hessian energy");
  require(lap.kind == EnergyKind::LaplacianNatural,
          "blend: second energy must be the natural Laplacian energy");
  require(hess.domain_id == lap.domain_id && hess.size() == lap.size(),
          "blend: energies live on different domains");
  DiscreteEnergy e;
  if (alpha == 1.0) {
    e.Q = hess.Q;
    e.factor = hess.factor;
  } else if (alpha == 0.0) {
    e.Q = lap.Q;
    e.factor = lap.factor;
  } else {
    e.Q = (lap.Q.scaled(1.0 - alpha) + hess.Q.scaled(alpha)).symmetrized();
    if (!hess.factor.empty() && !lap.factor.empty())
      e.factor = stack_operators(hess.factor, alpha, lap.factor, 1.0 - alpha);
  }
  e.M = hess.M;
  e.kind = EnergyKind::Blend;
  e.alpha = alpha;
  e.domain_id = hess.domain_id;
  return e;
}

WeightedOperator build_bar_operator(Index n, double h) {
  require(n >= 5, "bar: need at least 5 nodes");
  require(h > 0.0, "bar: spacing must be positive");
  const double ih2 = 1.0 / (h * h);
  std::vector<Triplet> t;
  for (Index i = 1; i + 1 < n; ++i) {
    t.push_back({i - 1, i - 1, ih2});
    t.push_back({i - 1, i, -2.0 * ih2});
    t.push_back({i - 1, i + 1, ih2});
  }
  WeightedOperator op;
  op.H = SparseMatrix::from_triplets(n - 2, n, t);
  op.weights = Vector::Constant(n - 2, h);
  return op;
}

DiscreteEnergy build_fd_bar_1d(Index n, double h) {
  const WeightedOperator op = build_bar_operator(n, h);
  Vector mass = Vector::Constant(n, h);
  mass[0] = mass[n - 1] = 0.5 * h;
  DiscreteEnergy e;
  e.Q = weighted_gram(op.H, op.weights);
  e.factor = op;
  e.M = SparseMatrix::diagonal(mass);
  e.kind = EnergyKind::HessianNatural;
  return e;
}

}  // namespace hessmooth
