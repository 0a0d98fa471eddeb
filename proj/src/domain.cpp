#include "hessmooth/domain.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "hessmooth/error.hpp"

namespace hessmooth {

namespace {

std::uint64_t next_domain_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

void ConstraintSet::validate(Index n) const {
  std::set<Index> seen;
  for (const auto& c : entries) {
    require(c.index >= 0 && c.index < n,
            "constraints: index " + std::to_string(c.index) + " out of range");
    require(seen.insert(c.index).second,
            "constraints: duplicate index " + std::to_string(c.index));
  }
}

// ---------------------------------------------------------------- grids

std::vector<std::array<Index, 2>> interior_cells(
    Index nx, Index ny, const std::vector<bool>& mask) {
  std::vector<std::array<Index, 2>> out;
  auto at = [&](Index i, Index j) {
    return mask[static_cast<std::size_t>(i) * nx + j];
  };
  for (Index i = 1; i + 1 < ny; ++i) {
    for (Index j = 1; j + 1 < nx; ++j) {
      bool all = true;
      for (Index di = -1; di <= 1 && all; ++di)
        for (Index dj = -1; dj <= 1 && all; ++dj) all = at(i + di, j + dj);
      if (all) out.push_back({i, j});
    }
  }
  return out;
}

GridDomain GridDomain::from_mask(Index nx, Index ny, double h,
                                 std::vector<bool> mask) {
  require(nx >= 3 && ny >= 3, "grid: need at least 3 nodes per axis");
  require(h > 0.0 && std::isfinite(h), "grid: spacing h must be positive");
  require(mask.size() == static_cast<std::size_t>(nx) * ny,
          "grid: mask size does not match nx*ny");

  const auto cells = interior_cells(nx, ny, mask);
  require(!cells.empty(), "grid: empty interior");

  std::vector<bool> support(mask.size(), false);
  for (const auto& [i, j] : cells)
    for (Index di = -1; di <= 1; ++di)
      for (Index dj = -1; dj <= 1; ++dj)
        support[static_cast<std::size_t>(i + di) * nx + (j + dj)] = true;

  GridDomain g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.h_ = h;
  g.id_ = next_domain_id();
  g.mask_ = std::move(support);
  g.flat_to_node_.assign(g.mask_.size(), -1);
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      const auto flat = static_cast<std::size_t>(i) * nx + j;
      if (!g.mask_[flat]) continue;
      g.flat_to_node_[flat] = static_cast<Index>(g.node_ij_.size());
      g.node_ij_.push_back({i, j});
    }
  }
  g.is_interior_.assign(g.node_ij_.size(), 0);
  for (const auto& [i, j] : cells) {
    const Index k = g.node_index(i, j);
    g.interior_.push_back(k);
    g.is_interior_[k] = 1;
  }
  return g;
}

bool GridDomain::masked(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= ny_ || j >= nx_) return false;
  return mask_[static_cast<std::size_t>(i) * nx_ + j];
}

Index GridDomain::node_index(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= ny_ || j >= nx_) return -1;
  return flat_to_node_[static_cast<std::size_t>(i) * nx_ + j];
}

std::array<double, 2> GridDomain::position(Index node) const {
  const auto [i, j] = node_ij_[node];
  return {j * h_, i * h_};
}

std::vector<Index> GridDomain::boundary_nodes() const {
  std::vector<Index> out;
  for (Index k = 0; k < num_nodes(); ++k)
    if (!is_interior_[k]) out.push_back(k);
  return out;
}

GridDomain grid_from_predicate(
    Index nx, Index ny, double h,
    const std::function<bool(double, double)>& inside) {
  std::vector<bool> mask(static_cast<std::size_t>(nx) * ny);
  for (Index i = 0; i < ny; ++i)
    for (Index j = 0; j < nx; ++j)
      mask[static_cast<std::size_t>(i) * nx + j] = inside(j * h, i * h);
  return GridDomain::from_mask(nx, ny, h, std::move(mask));
}

// ---------------------------------------------------------------- PGM

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::string_view s) : s_(s) {}

  void skip_ws_and_comments() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* what) {
    skip_ws_and_comments();
    int v = 0;
    auto res = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    require(res.ec == std::errc() && res.ptr != s_.data() + pos_,
            std::string("pgm: malformed ") + what);
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return v;
  }

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

PgmImage parse_pgm(std::string_view bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P' &&
              (bytes[1] == '2' || bytes[1] == '5'),
          "pgm: not a P2/P5 PGM file");
  const bool binary = bytes[1] == '5';
  PgmReader rd(bytes.substr(2));
  PgmImage img;
  img.width = rd.read_int("width");
  img.height = rd.read_int("height");
  img.maxval = rd.read_int("maxval");
  require(img.width > 0 && img.height > 0, "pgm: non-positive dimensions");
  require(img.maxval > 0 && img.maxval < 65536, "pgm: maxval out of range");
  const auto count = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(count);
  if (!binary) {
    for (auto& p : img.pixels) {
      p = rd.read_int("pixel");
      require(p >= 0 && p <= img.maxval, "pgm: pixel exceeds maxval");
    }
    return img;
  }
  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t p = rd.pos() + 2 + 1;
  const std::size_t bpp = img.maxval < 256 ? 1 : 2;
  require(bytes.size() >= p + count * bpp, "pgm: truncated raster");
  for (std::size_t k = 0; k < count; ++k) {
    int v = static_cast<unsigned char>(bytes[p + k * bpp]);
    if (bpp == 2)
      v = (v << 8) | static_cast<unsigned char>(bytes[p + k * bpp + 1]);
    img.pixels[k] = v;
  }
  return img;
}

GridDomain grid_from_mask(const PgmImage& image, double h, int threshold) {
  std::vector<bool> mask(image.pixels.size());
  for (std::size_t k = 0; k < mask.size(); ++k)
    mask[k] = image.pixels[k] >= threshold;
  return GridDomain::from_mask(image.width, image.height, h, std::move(mask));
}

// ---------------------------------------------------------------- meshes

namespace {

double bbox_diag(const DenseMatrix& p) {
  if (p.rows() == 0) return 0.0;
  return (p.colwise().maxCoeff() - p.colwise().minCoeff()).norm();
}

Eigen::Vector3d row3(const DenseMatrix& p, Index v) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (Index c = 0; c < p.cols(); ++c) out[c] = p(v, c);
  return out;
}

}  // namespace

TriMesh TriMesh::create(DenseMatrix positions,
                        std::vector<std::array<Index, 3>> triangles) {
  require(positions.cols() == 2 || positions.cols() == 3,
          "mesh: positions must have 2 or 3 columns");
  require(positions.allFinite(), "mesh: non-finite vertex position");
  require(!triangles.empty(), "mesh: no faces");
  const auto n = static_cast<Index>(positions.rows());

  TriMesh m;
  m.id_ = next_domain_id();
  m.positions_ = std::move(positions);
  m.triangles_ = std::move(triangles);

  const double diag = bbox_diag(m.positions_);
  const double min_area = kDegenerateAreaTol * diag * diag;
  m.face_areas_.resize(m.triangles_.size());
  for (std::size_t f = 0; f < m.triangles_.size(); ++f) {
    auto& t = m.triangles_[f];
    for (Index v : t)
      require(v >= 0 && v < n, "mesh: face " + std::to_string(f) +
                                   " references vertex out of range");
    const Eigen::Vector3d a = row3(m.positions_, t[0]);
    const Eigen::Vector3d e1 = row3(m.positions_, t[1]) - a;
    const Eigen::Vector3d e2 = row3(m.positions_, t[2]) - a;
    const Eigen::Vector3d cr = e1.cross(e2);
    if (m.positions_.cols() == 2 && cr.z() < 0.0) std::swap(t[1], t[2]);
    const double area = 0.5 * cr.norm();
    if (!(area > min_area))
      fail(ErrorKind::InvalidInput,
           "mesh: degenerate (zero-area) face " + std::to_string(f));
    m.face_areas_[f] = area;
  }

  std::map<std::pair<Index, Index>, Index> edge_of;
  m.face_edges_.resize(m.triangles_.size());
  for (std::size_t f = 0; f < m.triangles_.size(); ++f) {
    const auto& t = m.triangles_[f];
    for (int k = 0; k < 3; ++k) {
      const Index a = t[(k + 1) % 3], b = t[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_of.try_emplace(
          {key.first, key.second}, static_cast<Index>(m.edges_.size()));
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        m.edges_.push_back(e);
      }
      Edge& e = m.edges_[it->second];
      if (e.face[0] < 0) {
        e.face[0] = static_cast<Index>(f);
        e.opposite[0] = t[k];
      } else if (e.face[1] < 0) {
        e.face[1] = static_cast<Index>(f);
        e.opposite[1] = t[k];
      } else {
        fail(ErrorKind::InvalidInput,
             "mesh: non-manifold edge (" + std::to_string(key.first) + ", " +
                 std::to_string(key.second) + ") shared by more than 2 faces");
      }
      m.face_edges_[f][k] = it->second;
    }
  }

  m.is_boundary_.assign(static_cast<std::size_t>(n), 0);
  for (const auto& e : m.edges_)
    if (e.is_boundary()) m.is_boundary_[e.v[0]] = m.is_boundary_[e.v[1]] = 1;
  for (Index v = 0; v < n; ++v)
    (m.is_boundary_[v] ? m.boundary_ : m.interior_).push_back(v);
  return m;
}

double TriMesh::total_area() const {
  double s = 0.0;
  for (double a : face_areas_) s += a;
  return s;
}

double TriMesh::bbox_diagonal() const { return bbox_diag(positions_); }

double TriMesh::mean_edge_length() const {
  double s = 0.0;
  for (const auto& e : edges_)
    s += (positions_.row(e.v[0]) - positions_.row(e.v[1])).norm();
  return edges_.empty() ? 0.0 : s / static_cast<double>(edges_.size());
}

Eigen::Vector3d TriMesh::vertex(Index v) const { return row3(positions_, v); }

TriMesh TriMesh::with_positions(DenseMatrix positions) const {
  require(positions.rows() == positions_.rows(),
          "mesh: vertex count mismatch");
  return create(std::move(positions), triangles_);
}

TriMesh annulus_mesh(double r0, double r1, Index nr, Index ntheta) {
  require(r0 > 0.0 && r0 < r1, "annulus_mesh: need 0 < r0 < r1");
  require(nr >= 1, "annulus_mesh: need nr >= 1");
  require(ntheta >= 3, "annulus_mesh: need ntheta >= 3");
  DenseMatrix p((nr + 1) * ntheta, 2);
  for (Index k = 0; k <= nr; ++k) {
    const double r = r0 + (r1 - r0) * k / nr;
    for (Index j = 0; j < ntheta; ++j) {
      const double th = 2.0 * std::numbers::pi * j / ntheta;
      p(k * ntheta + j, 0) = r * std::cos(th);
      p(k * ntheta + j, 1) = r * std::sin(th);
    }
  }
  std::vector<std::array<Index, 3>> tris;
  for (Index k = 0; k < nr; ++k) {
    for (Index j = 0; j < ntheta; ++j) {
      const Index a = k * ntheta + j;
      const Index b = k * ntheta + (j + 1) % ntheta;
      const Index c = (k + 1) * ntheta + (j + 1) % ntheta;
      const Index d = (k + 1) * ntheta + j;
      tris.push_back({a, c, b});
      tris.push_back({a, d, c});
    }
  }
  return TriMesh::create(std::move(p), std::move(tris));
}

TriMesh square_mesh(Index n, double size) {
  require(n >= 1, "square_mesh: need n >= 1");
  DenseMatrix p((n + 1) * (n + 1), 2);
  for (Index i = 0; i <= n; ++i)
    for (Index j = 0; j <= n; ++j) {
      p(i * (n + 1) + j, 0) = size * j / n;
      p(i * (n + 1) + j, 1) = size * i / n;
    }
  std::vector<std::array<Index, 3>> tris;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index a = i * (n + 1) + j, b = a + 1, c = a + n + 2, d = a + n + 1;
      if ((2 * i < n) == (2 * j < n)) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  return TriMesh::create(std::move(p), std::move(tris));
}

TriMesh disk_mesh(Index rings, double radius) {
  require(rings >= 1, "disk_mesh: need rings >= 1");
  std::vector<std::array<double, 2>> pts{{0.0, 0.0}};
  std::vector<Index> ring_start{0};
  std::vector<Index> ring_size{1};
  for (Index k = 1; k <= rings; ++k) {
    ring_start.push_back(static_cast<Index>(pts.size()));
    ring_size.push_back(6 * k);
    const double r = radius * k / rings;
    for (Index j = 0; j < 6 * k; ++j) {
      const double th = 2.0 * std::numbers::pi * j / (6 * k);
      pts.push_back({r * std::cos(th), r * std::sin(th)});
    }
  }
  std::vector<std::array<Index, 3>> tris;
  // Sweep two consecutive rings by angle, always advancing the ring whose
  // next vertex comes first.
  for (Index k = 1; k <= rings; ++k) {
    const Index ni = ring_size[k - 1], no = ring_size[k];
    const Index si = ring_start[k - 1], so = ring_start[k];
    if (ni == 1) {
      for (Index j = 0; j < no; ++j)
        tris.push_back({si, so + j, so + (j + 1) % no});
      continue;
    }
    Index a = 0, b = 0;
    while (a < ni || b < no) {
      const double next_in = static_cast<double>(a + 1) / ni;
      const double next_out = static_cast<double>(b + 1) / no;
      if (b < no && (a >= ni || next_out <= next_in)) {
        tris.push_back({si + a % ni, so + b, so + (b + 1) % no});
        ++b;
      } else {
        tris.push_back({si + a, so + b % no, si + (a + 1) % ni});
        ++a;
      }
    }
  }
  DenseMatrix p(static_cast<Index>(pts.size()), 2);
  for (std::size_t v = 0; v < pts.size(); ++v) {
    p(static_cast<Index>(v), 0) = pts[v][0];
    p(static_cast<Index>(v), 1) = pts[v][1];
  }
  return TriMesh::create(std::move(p), std::move(tris));
}

TriMesh icosphere(Index level) {
  require(level >= 0 && level <= 6, "icosphere: level out of range");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v{
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<Index, 3>> f{
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Index l = 0; l < level; ++l) {
    std::map<std::pair<Index, Index>, Index> mid;
    auto midpoint = [&](Index a, Index b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find({key.first, key.second});
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<Index>(v.size() - 1);
      mid.emplace(std::make_pair(key.first, key.second), id);
      return id;
    };
    std::vector<std::array<Index, 3>> nf;
    for (const auto& tri : f) {
      const Index ab = midpoint(tri[0], tri[1]);
      const Index bc = midpoint(tri[1], tri[2]);
      const Index ca = midpoint(tri[2], tri[0]);
      nf.push_back({tri[0], ab, ca});
      nf.push_back({tri[1], bc, ab});
      nf.push_back({tri[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    f = std::move(nf);
  }
  DenseMatrix p(static_cast<Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i)
    p.row(static_cast<Index>(i)) = v[i].transpose();
  return TriMesh::create(std::move(p), std::move(f));
}

TriMesh lift_to_3d(const TriMesh& mesh) {
  DenseMatrix p = DenseMatrix::Zero(mesh.num_vertices(), 3);
  p.leftCols(mesh.dim()) = mesh.positions();
  return TriMesh::create(std::move(p), mesh.triangles());
}

// ---------------------------------------------------------------- snapping

namespace {

template <typename DistFn>
ConstraintSet snap_generic(Index n, std::span<const std::array<double, 3>> pts,
                           std::span<const double> values, double max_dist,
                           DistFn dist2) {
  require(pts.size() == values.size(),
          "snap_points: points and values differ in length");
  ConstraintSet out;
  std::set<Index> used;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    Index best = -1;
    double best_d = INFINITY;
    for (Index v = 0; v < n; ++v) {
      const double d = dist2(v, pts[p]);
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    require(best >= 0 && std::sqrt(best_d) <= max_dist,
            "snap_points: point " + std::to_string(p) +
                " is too far from the domain");
    require(used.insert(best).second,
            "snap_points: points " + std::to_string(p) +
                " and an earlier point snap to the same node " +
                std::to_string(best));
    out.add(best, values[p]);
  }
  return out;
}

}  // namespace

ConstraintSet snap_points(const GridDomain& grid,
                          std::span<const std::array<double, 3>> points,
                          std::span<const double> values) {
  return snap_generic(grid.num_nodes(), points, values, 2.0 * grid.h(),
                      [&](Index v, const std::array<double, 3>& q) {
                        const auto x = grid.position(v);
                        const double dx = x[0] - q[0], dy = x[1] - q[1];
                        return dx * dx + dy * dy;
                      });
}

ConstraintSet snap_points(const TriMesh& mesh,
                          std::span<const std::array<double, 3>> points,
                          std::span<const double> values) {
  const auto& p = mesh.positions();
  return snap_generic(mesh.num_vertices(), points, values,
                      2.0 * mesh.mean_edge_length(),
                      [&](Index v, const std::array<double, 3>& q) {
                        double s = 0.0;
                        for (Index c = 0; c < p.cols(); ++c) {
                          const double d = p(v, c) - q[c];
                          s += d * d;
                        }
                        if (p.cols() == 2) s += q[2] * q[2];
                        return s;
                      });
}

}  // namespace hessmooth
