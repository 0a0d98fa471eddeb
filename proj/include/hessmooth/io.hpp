#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hessmooth/domain.hpp"

namespace hessmooth {

enum class MeshFormat { Off, Obj };

/// ASCII OFF/OBJ, triangles only. 3D inputs whose z coordinates are all
/// exactly zero load as 2D meshes.
TriMesh parse_mesh(std::string_view bytes, MeshFormat format);
/// Format from the file extension (.off / .obj, case-insensitive).
MeshFormat mesh_format_from_path(std::string_view path);
/// OFF with three coordinates per vertex; doubles in shortest round-trip form.
std::string serialize_off(const TriMesh& mesh);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

struct PointSamples {
  std::vector<std::array<double, 3>> points;  // z = 0 for 2D rows
  std::vector<double> values;
  int dim = 2;
};

/// CSV with header `x,y,value` or `x,y,z,value`. When `with_values` is
/// false the header is `x,y` / `x,y,z` and values are left empty.
PointSamples parse_point_csv(std::string_view text, bool with_values = true);

/// `index,value` rows.
std::string field_csv(const Vector& u);
Vector parse_field_csv(std::string_view text, Index expected_size);

/// Heatmap over the full grid raster (P5); nodes outside the mask are 0.
/// Values map linearly from [lo, hi] to [0, 255], clamped.
std::string grid_heatmap_pgm(const GridDomain& grid, const Vector& u,
                             std::optional<std::array<double, 2>> range = {});
/// ASCII PLY 1.0 with `x y z red green blue`, scalar as grayscale.
std::string mesh_scalar_ply(const TriMesh& mesh, const Vector& u,
                            std::optional<std::array<double, 2>> range = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hessmooth
