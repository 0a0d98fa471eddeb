#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hessmooth/domain.hpp"

namespace fixtures {

using hessmooth::GridDomain;
using hessmooth::Index;
using hessmooth::TriMesh;

/// n x n nodes on the unit square.
inline GridDomain full_grid(Index n) {
  return hessmooth::grid_from_predicate(n, n, 1.0 / (n - 1),
                                        [](double, double) { return true; });
}

/// Annulus r in [0.25, 0.45] around (0.5, 0.5), n x n nodes on the unit square.
inline GridDomain annulus_grid(Index n) {
  return hessmooth::grid_from_predicate(n, n, 1.0 / (n - 1), [](double x, double y) {
    const double r = std::hypot(x - 0.5, y - 0.5);
    return r >= 0.25 && r <= 0.45;
  });
}

/// Unit square minus its upper-right quadrant.
inline GridDomain l_grid(Index n) {
  return hessmooth::grid_from_predicate(n, n, 1.0 / (n - 1), [](double x, double y) {
    return x <= 0.5 + 1e-12 || y <= 0.5 + 1e-12;
  });
}

/// Square mesh with interior vertices jittered by up to 20% of the spacing.
inline TriMesh jittered_square(Index n, std::uint64_t seed) {
  const TriMesh base = hessmooth::square_mesh(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.2 / n, 0.2 / n);
  hessmooth::DenseMatrix p = base.positions();
  for (Index v : base.interior_vertices()) {
    p(v, 0) += d(rng);
    p(v, 1) += d(rng);
  }
  return base.with_positions(p);
}

struct NamedMesh {
  std::string name;
  TriMesh mesh;
};

inline std::vector<NamedMesh> flat_meshes() {
  return {
      {"disk", hessmooth::disk_mesh(5)},
      {"square", hessmooth::square_mesh(8)},
      {"annulus", hessmooth::annulus_mesh(0.25, 0.45, 4, 32)},
      {"jittered-square", jittered_square(10, 3)},
  };
}

struct NamedGrid {
  std::string name;
  GridDomain grid;
};

inline std::vector<NamedGrid> grids() {
  return {
      {"full-9", full_grid(9)},
      {"annulus-64", annulus_grid(64)},
      {"l-shape-13", l_grid(13)},
  };
}

/// Node coordinates as (x, y) pairs.
inline std::vector<std::array<double, 2>> coords(const GridDomain& g) {
  std::vector<std::array<double, 2>> c;
  for (Index k = 0; k < g.num_nodes(); ++k) c.push_back(g.position(k));
  return c;
}

inline std::vector<std::array<double, 2>> coords(const TriMesh& m) {
  std::vector<std::array<double, 2>> c;
  for (Index v = 0; v < m.num_vertices(); ++v)
    c.push_back({m.positions()(v, 0), m.positions()(v, 1)});
  return c;
}

}  // namespace fixtures
