#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "specpart/surface_fem.hpp"

namespace specpart {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error("cannot parse mesh " + path.string() + ": " + what);
}

TriMesh build(const std::filesystem::path& path, const std::vector<std::array<double, 3>>& verts,
              const std::vector<std::array<int, 3>>& faces) {
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) << verts[i][0], verts[i][1], verts[i][2];
  mesh.triangles.resize(static_cast<Index>(faces.size()), 3);
  for (size_t t = 0; t < faces.size(); ++t) mesh.triangles.row(t) << faces[t][0], faces[t][1], faces[t][2];
  try {
    validate_mesh(mesh);
  } catch (const std::invalid_argument& e) {
    parse_error(path, e.what());
  }
  return mesh;
}

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

TriMesh load_off(const std::filesystem::path& path, std::istream& in) {
  std::string line;
  if (!next_content_line(in, line) || line.rfind("OFF", 0) != 0) parse_error(path, "missing OFF header");
  std::istringstream rest(line.substr(3));
  Index nv = -1, nf = -1, ne = 0;
  if (!(rest >> nv >> nf >> ne)) {
    if (!next_content_line(in, line)) parse_error(path, "missing counts");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) parse_error(path, "bad counts line");
  }
  if (nv <= 0 || nf <= 0) parse_error(path, "empty mesh");
  std::vector<std::array<double, 3>> verts(nv);
  for (Index i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) parse_error(path, "truncated vertex list");
    std::istringstream ls(line);
    if (!(ls >> verts[i][0] >> verts[i][1] >> verts[i][2])) parse_error(path, "bad vertex line");
  }
  std::vector<std::array<int, 3>> faces(nf);
  for (Index f = 0; f < nf; ++f) {
    if (!next_content_line(in, line)) parse_error(path, "truncated face list");
    std::istringstream ls(line);
    int count = 0;
    if (!(ls >> count)) parse_error(path, "bad face line");
    if (count != 3) parse_error(path, "triangles only");
    if (!(ls >> faces[f][0] >> faces[f][1] >> faces[f][2])) parse_error(path, "bad face line");
  }
  return build(path, verts, faces);
}

TriMesh load_obj(const std::filesystem::path& path, std::istream& in) {
  std::vector<std::array<double, 3>> verts;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(ls >> p[0] >> p[1] >> p[2])) parse_error(path, "bad vertex line");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<int> ids;
      std::string token;
      while (ls >> token) {
        // "v", "v/vt", "v//vn", "v/vt/vn"; negative indices are relative.
        const int id = std::stoi(token.substr(0, token.find('/')));
        ids.push_back(id > 0 ? id - 1 : static_cast<int>(verts.size()) + id);
      }
      if (ids.size() != 3) parse_error(path, "triangles only");
      faces.push_back({ids[0], ids[1], ids[2]});
    }
  }
  if (verts.empty() || faces.empty()) parse_error(path, "empty mesh");
  return build(path, verts, faces);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(17);
  return out;
}

}  // namespace

TriMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".off") return load_off(path, in);
  if (ext == ".obj") return load_obj(path, in);
  throw std::runtime_error("unsupported mesh format '" + ext + "' (expected .off or .obj)");
}

void save_obj(const std::filesystem::path& path, const TriMesh& mesh) {
  auto out = open_for_write(path);
  for (Index i = 0; i < mesh.vertex_count(); ++i) {
    out << "v " << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    out << "f " << mesh.triangles(t, 0) + 1 << ' ' << mesh.triangles(t, 1) + 1 << ' ' << mesh.triangles(t, 2) + 1
        << '\n';
  }
}

void save_off(const std::filesystem::path& path, const TriMesh& mesh) {
  auto out = open_for_write(path);
  out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  for (Index i = 0; i < mesh.vertex_count(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2) << '\n';
  }
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2) << '\n';
  }
}

void save_ply(const std::filesystem::path& path, const TriMesh& mesh, std::span<const int> labels) {
  if (!labels.empty() && static_cast<Index>(labels.size()) != mesh.vertex_count()) {
    throw std::invalid_argument("label count does not match vertex count");
  }
  auto out = open_for_write(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertex_count() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (!labels.empty()) out << "property int label\n";
  out << "element face " << mesh.triangle_count() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (Index i = 0; i < mesh.vertex_count(); ++i) {
    out << mesh.vertices(i, 0) << ' ' << mesh.vertices(i, 1) << ' ' << mesh.vertices(i, 2);
    if (!labels.empty()) out << ' ' << labels[i];
    out << '\n';
  }
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    out << "3 " << mesh.triangles(t, 0) << ' ' << mesh.triangles(t, 1) << ' ' << mesh.triangles(t, 2) << '\n';
  }
}

}  // namespace specpart
