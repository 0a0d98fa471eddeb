#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include "hessmooth/error.hpp"
#include "hessmooth/io.hpp"

namespace hessmooth {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    const std::size_t b = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > b) out.push_back(line.substr(b, i - b));
  }
  return out;
}

/// Lines with comments (#...) stripped; blank lines dropped.
std::vector<std::vector<std::string_view>> token_lines(std::string_view text) {
  std::vector<std::vector<std::string_view>> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (auto h = line.find('#'); h != std::string_view::npos)
      line = line.substr(0, h);
    auto toks = split_ws(line);
    if (!toks.empty()) lines.push_back(std::move(toks));
    start = end + 1;
  }
  return lines;
}

double to_double(std::string_view s, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          std::string(what) + ": malformed number '" + std::string(s) + "'");
  return v;
}

long to_long(std::string_view s, const char* what) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          std::string(what) + ": malformed integer '" + std::string(s) + "'");
  return v;
}

TriMesh finish(const std::vector<std::array<double, 3>>& verts,
               std::vector<std::array<Index, 3>> faces) {
  const bool flat = std::all_of(verts.begin(), verts.end(),
                                [](const auto& p) { return p[2] == 0.0; });
  const Index d = flat ? 2 : 3;
  DenseMatrix p(static_cast<Index>(verts.size()), d);
  for (std::size_t v = 0; v < verts.size(); ++v)
    for (Index c = 0; c < d; ++c) p(static_cast<Index>(v), c) = verts[v][c];
  return TriMesh::create(std::move(p), std::move(faces));
}

TriMesh parse_off(std::string_view text) {
  auto lines = token_lines(text);
  require(!lines.empty(), "off: empty file");
  std::size_t li = 0;
  auto& head = lines[0];
  require(head[0].substr(0, 3) == "OFF", "off: missing OFF header");
  std::vector<std::string_view> counts;
  if (head[0].size() > 3) {
    fail(ErrorKind::InvalidInput, "off: unsupported header variant");
  }
  if (head.size() > 1) {
    counts.assign(head.begin() + 1, head.end());
    li = 1;
  } else {
    require(lines.size() > 1, "off: missing element counts");
    counts = lines[1];
    li = 2;
  }
  require(counts.size() >= 2, "off: malformed element counts");
  const long nv = to_long(counts[0], "off");
  const long nf = to_long(counts[1], "off");
  require(nv > 0 && nf > 0, "off: non-positive element counts");
  require(lines.size() >= li + static_cast<std::size_t>(nv + nf),
          "off: file truncated");
  std::vector<std::array<double, 3>> verts(static_cast<std::size_t>(nv));
  for (long v = 0; v < nv; ++v) {
    const auto& t = lines[li++];
    require(t.size() >= 3, "off: vertex " + std::to_string(v) +
                               " needs 3 coordinates");
    for (int c = 0; c < 3; ++c) verts[v][c] = to_double(t[c], "off");
  }
  std::vector<std::array<Index, 3>> faces;
  for (long f = 0; f < nf; ++f) {
    const auto& t = lines[li++];
    const long k = to_long(t[0], "off");
    require(k == 3, "off: face " + std::to_string(f) + " is not a triangle");
    require(t.size() >= 4, "off: face " + std::to_string(f) + " truncated");
    std::array<Index, 3> tri{};
    for (int c = 0; c < 3; ++c) {
      const long idx = to_long(t[1 + c], "off");
      require(idx >= 0 && idx < nv, "off: face " + std::to_string(f) +
                                        " index out of range");
      tri[c] = static_cast<Index>(idx);
    }
    faces.push_back(tri);
  }
  return finish(verts, std::move(faces));
}

TriMesh parse_obj(std::string_view text) {
  std::vector<std::array<double, 3>> verts;
  std::vector<std::array<Index, 3>> faces;
  for (const auto& t : token_lines(text)) {
    if (t[0] == "v") {
      require(t.size() >= 3, "obj: vertex needs at least 2 coordinates");
      std::array<double, 3> p{0.0, 0.0, 0.0};
      for (std::size_t c = 0; c < std::min<std::size_t>(3, t.size() - 1); ++c)
        p[c] = to_double(t[1 + c], "obj");
      verts.push_back(p);
    } else if (t[0] == "f") {
      require(t.size() == 4, "obj: face " + std::to_string(faces.size()) +
                                 " is not a triangle");
      std::array<Index, 3> tri{};
      for (int c = 0; c < 3; ++c) {
        std::string_view s = t[1 + c];
        s = s.substr(0, s.find('/'));
        long idx = to_long(s, "obj");
        if (idx < 0) idx = static_cast<long>(verts.size()) + idx + 1;
        require(idx >= 1 && idx <= static_cast<long>(verts.size()),
                "obj: face " + std::to_string(faces.size()) +
                    " index out of range");
        tri[c] = static_cast<Index>(idx - 1);
      }
      faces.push_back(tri);
    }
    // vt, vn, g, o, s, usemtl, mtllib: ignored.
  }
  require(!verts.empty(), "obj: no vertices");
  return finish(verts, std::move(faces));
}

}  // namespace

TriMesh parse_mesh(std::string_view bytes, MeshFormat format) {
  return format == MeshFormat::Off ? parse_off(bytes) : parse_obj(bytes);
}

MeshFormat mesh_format_from_path(std::string_view path) {
  std::string ext;
  if (auto dot = path.rfind('.'); dot != std::string_view::npos)
    ext = std::string(path.substr(dot + 1));
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == "off") return MeshFormat::Off;
  if (ext == "obj") return MeshFormat::Obj;
  fail(ErrorKind::InvalidInput,
       "mesh: unknown extension for '" + std::string(path) + "'");
}

std::string serialize_off(const TriMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.num_vertices()) + " " +
         std::to_string(mesh.num_faces()) + " 0\n";
  const auto& p = mesh.positions();
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    for (Index c = 0; c < 3; ++c) {
      out += format_double(c < p.cols() ? p(v, c) : 0.0);
      out += c == 2 ? '\n' : ' ';
    }
  }
  for (const auto& t : mesh.triangles())
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " +
           std::to_string(t[2]) + "\n";
  return out;
}

}  // namespace hessmooth
