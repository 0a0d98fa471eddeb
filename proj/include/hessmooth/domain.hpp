#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "hessmooth/sparse.hpp"

namespace hessmooth {

struct Constraint {
  Index index;
  double value;
};

/// Fixed-value constraints. Indices are unique and in range once validated.
struct ConstraintSet {
  std::vector<Constraint> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  void add(Index index, double value) { entries.push_back({index, value}); }
  /// Throws InvalidInput for duplicates or indices outside [0, n).
  void validate(Index n) const;
};

/// Masked regular 2D grid. Node (i, j) sits at x = j*h, y = i*h; i indexes
/// rows, j columns. Unknowns live on masked nodes only, numbered row-major.
class GridDomain {
 public:
  /// Builds from a row-major mask of ny rows by nx columns. Masked nodes
  /// that lie in no interior node's 8-neighborhood are dropped: no stencil
  /// reaches them.
  static GridDomain from_mask(Index nx, Index ny, double h,
                              std::vector<bool> mask);

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  double h() const { return h_; }
  std::uint64_t id() const { return id_; }

  bool masked(Index i, Index j) const;
  Index num_nodes() const { return static_cast<Index>(node_ij_.size()); }
  /// Flat unknown index of grid node (i, j), or -1 if outside the mask.
  Index node_index(Index i, Index j) const;
  std::array<Index, 2> node_ij(Index node) const { return node_ij_[node]; }
  std::array<double, 2> position(Index node) const;

  const std::vector<Index>& interior() const { return interior_; }
  bool is_interior(Index node) const { return is_interior_[node] != 0; }
  /// Masked nodes that are not interior.
  std::vector<Index> boundary_nodes() const;
  const std::vector<bool>& mask() const { return mask_; }

 private:
  Index nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  std::uint64_t id_ = 0;
  std::vector<bool> mask_;
  std::vector<Index> flat_to_node_;
  std::vector<std::array<Index, 2>> node_ij_;
  std::vector<Index> interior_;
  std::vector<char> is_interior_;
};

/// Interior test used by GridDomain: all 8 neighbors inside the mask.
std::vector<std::array<Index, 2>> interior_cells(Index nx, Index ny,
                                                 const std::vector<bool>& mask);

struct Edge {
  std::array<Index, 2> v;          // v[0] < v[1]
  std::array<Index, 2> face{-1, -1};
  std::array<Index, 2> opposite{-1, -1};  // vertex across the edge in face[k]
  bool is_boundary() const { return face[1] < 0; }
};

/// Indexed triangle mesh in 2D or 3D. Validated and immutable.
class TriMesh {
 public:
  /// positions: n x d with d in {2, 3}. 2D faces with negative signed area
  /// are flipped to counter-clockwise.
  static TriMesh create(DenseMatrix positions,
                        std::vector<std::array<Index, 3>> triangles);

  Index dim() const { return static_cast<Index>(positions_.cols()); }
  Index num_vertices() const { return static_cast<Index>(positions_.rows()); }
  Index num_faces() const { return static_cast<Index>(triangles_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  std::uint64_t id() const { return id_; }

  const DenseMatrix& positions() const { return positions_; }
  const std::vector<std::array<Index, 3>>& triangles() const {
    return triangles_;
  }
  const std::vector<Edge>& edges() const { return edges_; }
  /// face_edges()[f][k] is the edge opposite corner k of face f.
  const std::vector<std::array<Index, 3>>& face_edges() const {
    return face_edges_;
  }
  const std::vector<double>& face_areas() const { return face_areas_; }
  const std::vector<Index>& boundary_vertices() const { return boundary_; }
  const std::vector<Index>& interior_vertices() const { return interior_; }
  bool is_boundary(Index v) const { return is_boundary_[v] != 0; }

  double total_area() const;
  double bbox_diagonal() const;
  double mean_edge_length() const;
  Eigen::Vector3d vertex(Index v) const;

  /// Same connectivity, new positions (re-validated).
  TriMesh with_positions(DenseMatrix positions) const;

 private:
  std::uint64_t id_ = 0;
  DenseMatrix positions_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<Index, 3>> face_edges_;
  std::vector<double> face_areas_;
  std::vector<Index> boundary_;
  std::vector<Index> interior_;
  std::vector<char> is_boundary_;
};

/// Relative area threshold (times bbox diagonal squared) below which a face
/// is rejected as degenerate.
inline constexpr double kDegenerateAreaTol = 1e-14;

// Generators.

/// Structured annulus: nr+1 rings of ntheta vertices each.
TriMesh annulus_mesh(double r0, double r1, Index nr, Index ntheta);
/// Regular triangulation of [0, size]^2 with n cells per side. Diagonals
/// point towards the nearest corner, so for n >= 2 every triangle touches an
/// interior vertex.
TriMesh square_mesh(Index n, double size = 1.0);
/// Unit disk from concentric rings (6k vertices on ring k).
TriMesh disk_mesh(Index rings, double radius = 1.0);
/// Subdivided icosahedron projected to the unit sphere (20 * 4^level faces).
TriMesh icosphere(Index level);
/// Lifts a 2D mesh to 3D with z = 0.
TriMesh lift_to_3d(const TriMesh& mesh);

/// Grid mask of the predicate sampled at node positions.
GridDomain grid_from_predicate(
    Index nx, Index ny, double h,
    const std::function<bool(double x, double y)>& inside);

struct PgmImage {
  Index width = 0;
  Index height = 0;
  int maxval = 255;
  std::vector<int> pixels;  // row-major
};

PgmImage parse_pgm(std::string_view bytes);
/// Pixels >= threshold are inside. Row r of the image is grid row i = r.
GridDomain grid_from_mask(const PgmImage& image, double h, int threshold);

/// Nearest node for each point (ties to the lowest index). Grid points are
/// rejected beyond 2h, mesh points beyond 2x the mean edge length.
ConstraintSet snap_points(const GridDomain& grid,
                          std::span<const std::array<double, 3>> points,
                          std::span<const double> values);
ConstraintSet snap_points(const TriMesh& mesh,
                          std::span<const std::array<double, 3>> points,
                          std::span<const double> values);

}  // namespace hessmooth
