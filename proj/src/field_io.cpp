#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hessmooth/error.hpp"
#include "hessmooth/io.hpp"

namespace hessmooth {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t c = line.find(',', start);
    std::string_view cell = line.substr(start, c - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    out.push_back(cell);
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

double cell_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size() &&
              std::isfinite(v),
          "csv: malformed number on line " + std::to_string(line + 1));
  return v;
}

std::array<double, 2> value_range(const Vector& u,
                                  std::optional<std::array<double, 2>> range) {
  if (range) return *range;
  if (u.size() == 0) return {0.0, 1.0};
  return {u.minCoeff(), u.maxCoeff()};
}

int to_gray(double v, const std::array<double, 2>& r) {
  const double span = r[1] - r[0];
  const double t = span > 0.0 ? (v - r[0]) / span : 0.0;
  return static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
}

}  // namespace

PointSamples parse_point_csv(std::string_view text, bool with_values) {
  const auto lines = split_lines(text);
  require(!lines.empty(), "csv: empty file");
  const auto header = split_commas(lines[0]);
  PointSamples out;
  const std::vector<std::string_view> h2 =
      with_values ? std::vector<std::string_view>{"x", "y", "value"}
                  : std::vector<std::string_view>{"x", "y"};
  const std::vector<std::string_view> h3 =
      with_values ? std::vector<std::string_view>{"x", "y", "z", "value"}
                  : std::vector<std::string_view>{"x", "y", "z"};
  if (header == h2) {
    out.dim = 2;
  } else if (header == h3) {
    out.dim = 3;
  } else {
    fail(ErrorKind::InvalidInput,
         with_values ? "csv: expected header x,y[,z],value"
                     : "csv: expected header x,y[,z]");
  }
  const std::size_t ncols = header.size();
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_commas(lines[l]);
    require(cells.size() == ncols,
            "csv: wrong column count on line " + std::to_string(l + 1));
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int c = 0; c < out.dim; ++c) p[c] = cell_double(cells[c], l);
    out.points.push_back(p);
    if (with_values) out.values.push_back(cell_double(cells.back(), l));
  }
  return out;
}

std::string field_csv(const Vector& u) {
  std::string out = "index,value\n";
  for (Index i = 0; i < u.size(); ++i)
    out += std::to_string(i) + "," + format_double(u[i]) + "\n";
  return out;
}

Vector parse_field_csv(std::string_view text, Index expected_size) {
  const auto lines = split_lines(text);
  require(!lines.empty() && split_commas(lines[0]) ==
                                std::vector<std::string_view>{"index", "value"},
          "field csv: expected header index,value");
  Vector u = Vector::Constant(expected_size, NAN);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_commas(lines[l]);
    require(cells.size() == 2,
            "field csv: wrong column count on line " + std::to_string(l + 1));
    const double idx = cell_double(cells[0], l);
    require(idx >= 0 && idx < expected_size && idx == std::floor(idx),
            "field csv: bad index on line " + std::to_string(l + 1));
    u[static_cast<Index>(idx)] = cell_double(cells[1], l);
  }
  require(u.allFinite(), "field csv: missing entries");
  return u;
}

std::string grid_heatmap_pgm(const GridDomain& grid, const Vector& u,
                             std::optional<std::array<double, 2>> range) {
  require(u.size() == grid.num_nodes(), "heatmap: field size mismatch");
  const auto r = value_range(u, range);
  std::string out = "P5\n" + std::to_string(grid.nx()) + " " +
                    std::to_string(grid.ny()) + "\n255\n";
  for (Index i = 0; i < grid.ny(); ++i)
    for (Index j = 0; j < grid.nx(); ++j) {
      const Index k = grid.node_index(i, j);
      out.push_back(static_cast<char>(k < 0 ? 0 : to_gray(u[k], r)));
    }
  return out;
}

std::string mesh_scalar_ply(const TriMesh& mesh, const Vector& u,
                            std::optional<std::array<double, 2>> range) {
  require(u.size() == mesh.num_vertices(), "ply: field size mismatch");
  const auto r = value_range(u, range);
  std::string out = "ply\nformat ascii 1.0\nelement vertex " +
                    std::to_string(mesh.num_vertices()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n"
                    "property uchar red\nproperty uchar green\n"
                    "property uchar blue\nelement face " +
                    std::to_string(mesh.num_faces()) +
                    "\nproperty list uchar int vertex_indices\nend_header\n";
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    const auto p = mesh.vertex(v);
    const std::string g = std::to_string(to_gray(u[v], r));
    out += format_double(p.x()) + " " + format_double(p.y()) + " " +
           format_double(p.z()) + " " + g + " " + g + " " + g + "\n";
  }
  for (const auto& t : mesh.triangles())
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " +
           std::to_string(t[2]) + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace hessmooth
