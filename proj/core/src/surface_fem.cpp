#include "specpart/surface_fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace specpart {
namespace {

using Vec3 = Eigen::Vector3d;

Vec3 vertex(const TriMesh& mesh, Index i) { return mesh.vertices.row(i).transpose(); }

double bbox_diagonal2(const TriMesh& mesh) {
  if (mesh.vertex_count() == 0) return 0.0;
  const Vec3 lo = mesh.vertices.colwise().minCoeff().transpose();
  const Vec3 hi = mesh.vertices.colwise().maxCoeff().transpose();
  return (hi - lo).squaredNorm();
}

}  // namespace

std::vector<std::pair<Index, Index>> mesh_edges(const TriMesh& mesh) {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(3 * mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = mesh.triangles(t, e);
      Index b = mesh.triangles(t, (e + 1) % 3);
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

Adjacency mesh_adjacency(const TriMesh& mesh) {
  const auto edges = mesh_edges(mesh);
  return Adjacency::from_edges(mesh.vertex_count(), edges);
}

bool is_closed(const TriMesh& mesh) {
  std::map<std::pair<Index, Index>, int> uses;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      Index a = mesh.triangles(t, e);
      Index b = mesh.triangles(t, (e + 1) % 3);
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  return !uses.empty() && std::all_of(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 2; });
}

Index euler_characteristic(const TriMesh& mesh) {
  return mesh.vertex_count() - static_cast<Index>(mesh_edges(mesh).size()) + mesh.triangle_count();
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = vertex(mesh, mesh.triangles(t, 0));
    const Vec3 b = vertex(mesh, mesh.triangles(t, 1));
    const Vec3 c = vertex(mesh, mesh.triangles(t, 2));
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

double enclosed_volume(const TriMesh& mesh) {
  // Divergence theorem with F = x/3: each triangle contributes x_c . n A / 3.
  double volume = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = vertex(mesh, mesh.triangles(t, 0));
    const Vec3 b = vertex(mesh, mesh.triangles(t, 1));
    const Vec3 c = vertex(mesh, mesh.triangles(t, 2));
    volume += a.dot(b.cross(c)) / 6.0;
  }
  return volume;
}

void validate_mesh(const TriMesh& mesh, bool require_closed) {
  if (mesh.vertex_count() == 0 || mesh.triangle_count() == 0) throw std::invalid_argument("empty mesh");
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int v = mesh.triangles(t, e);
      if (v < 0 || v >= mesh.vertex_count()) {
        throw std::invalid_argument("triangle " + std::to_string(t) + " has out-of-range vertex index " +
                                    std::to_string(v));
      }
    }
  }
  const double min_area = 1e-14 * bbox_diagonal2(mesh);
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Vec3 a = vertex(mesh, mesh.triangles(t, 0));
    const Vec3 b = vertex(mesh, mesh.triangles(t, 1));
    const Vec3 c = vertex(mesh, mesh.triangles(t, 2));
    if (0.5 * (b - a).cross(c - a).norm() <= min_area) {
      throw std::invalid_argument("degenerate triangle " + std::to_string(t));
    }
  }
  if (require_closed && !is_closed(mesh)) {
    throw std::invalid_argument("mesh is not a closed manifold (non-manifold or boundary edge)");
  }
}

TriMesh generate_sphere(int subdivisions, double radius) {
  if (subdivisions < 0) throw std::invalid_argument("subdivisions must be non-negative");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                             {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                             {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces.swap(refined);
  }
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = radius * verts[i].transpose();
  mesh.triangles.resize(static_cast<Index>(faces.size()), 3);
  for (size_t t = 0; t < faces.size(); ++t) {
    mesh.triangles.row(t) << faces[t][0], faces[t][1], faces[t][2];
  }
  return mesh;
}

TriMesh generate_torus(double major_radius, double minor_radius, int nu, int nv) {
  if (!(major_radius > minor_radius && minor_radius > 0.0)) {
    throw std::invalid_argument("torus needs R > r > 0");
  }
  if (nu < 3 || nv < 3) throw std::invalid_argument("torus lattice needs at least 3 x 3 points");
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(nu) * nv, 3);
  for (int i = 0; i < nu; ++i) {
    const double u = 2.0 * std::numbers::pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double v = 2.0 * std::numbers::pi * j / nv;
      const double ring = major_radius + minor_radius * std::cos(v);
      mesh.vertices.row(i * nv + j) << ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v);
    }
  }
  mesh.triangles.resize(2 * static_cast<Index>(nu) * nv, 3);
  Index t = 0;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int a = i * nv + j;
      const int b = ((i + 1) % nu) * nv + j;
      const int c = ((i + 1) % nu) * nv + (j + 1) % nv;
      const int d = i * nv + (j + 1) % nv;
      mesh.triangles.row(t++) << a, b, c;
      mesh.triangles.row(t++) << a, c, d;
    }
  }
  return mesh;
}

TriMesh generate_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi, int n) {
  if (n < 1) throw std::invalid_argument("box faces need at least one subdivision");
  std::map<std::array<int, 3>, int> ids;
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  auto node = [&](std::array<int, 3> ijk) {
    const auto it = ids.find(ijk);
    if (it != ids.end()) return it->second;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = lo[a] + (hi[a] - lo[a]) * ijk[a] / n;
    verts.push_back(p);
    ids.emplace(ijk, static_cast<int>(verts.size()) - 1);
    return static_cast<int>(verts.size()) - 1;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          std::array<int, 3> c00{}, c10{}, c11{}, c01{};
          for (auto* c : {&c00, &c10, &c11, &c01}) (*c)[axis] = side * n;
          c00[u] = i;     c00[v] = j;
          c10[u] = i + 1; c10[v] = j;
          c11[u] = i + 1; c11[v] = j + 1;
          c01[u] = i;     c01[v] = j + 1;
          const int a = node(c00), b = node(c10), c = node(c11), d = node(c01);
          // (u, v, axis) is right-handed, so u x v points along +axis.
          if (side == 1) {
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
          } else {
            faces.push_back({a, c, b});
            faces.push_back({a, d, c});
          }
        }
      }
    }
  }
  TriMesh mesh;
  mesh.vertices.resize(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(i) = verts[i].transpose();
  mesh.triangles.resize(static_cast<Index>(faces.size()), 3);
  for (size_t t = 0; t < faces.size(); ++t) mesh.triangles.row(t) << faces[t][0], faces[t][1], faces[t][2];
  return mesh;
}

FemPair assemble_mass_stiffness(const TriMesh& mesh) {
  const Index n = mesh.vertex_count();
  const double min_area = 1e-14 * bbox_diagonal2(mesh);
  std::vector<Eigen::Triplet<double, int>> mass;
  std::vector<Eigen::Triplet<double, int>> stiff;
  mass.reserve(9 * mesh.triangle_count());
  stiff.reserve(9 * mesh.triangle_count());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const std::array<int, 3> idx{mesh.triangles(t, 0), mesh.triangles(t, 1), mesh.triangles(t, 2)};
    const std::array<Vec3, 3> p{vertex(mesh, idx[0]), vertex(mesh, idx[1]), vertex(mesh, idx[2])};
    const Vec3 normal = (p[1] - p[0]).cross(p[2] - p[0]);
    const double area = 0.5 * normal.norm();
    if (area <= min_area) throw std::invalid_argument("degenerate triangle " + std::to_string(t));
    // Cotangent of the angle at vertex k weights the opposite edge (i, j).
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3;
      const int j = (k + 2) % 3;
      const Vec3 e1 = p[i] - p[k];
      const Vec3 e2 = p[j] - p[k];
      const double cot = e1.dot(e2) / e1.cross(e2).norm();
      const double w = 0.5 * cot;
      stiff.emplace_back(idx[i], idx[j], -w);
      stiff.emplace_back(idx[j], idx[i], -w);
      stiff.emplace_back(idx[i], idx[i], w);
      stiff.emplace_back(idx[j], idx[j], w);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) mass.emplace_back(idx[a], idx[b], area / (a == b ? 6.0 : 12.0));
    }
  }
  FemPair out;
  out.mass.resize(n, n);
  out.mass.setFromTriplets(mass.begin(), mass.end());
  out.mass.makeCompressed();
  out.stiffness.resize(n, n);
  out.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  out.stiffness.makeCompressed();
  return out;
}

Neighborhood surface_neighborhood(const Eigen::Ref<const Eigen::VectorXd>& density, const Adjacency& adjacency,
                                  int hops, double threshold) {
  return computational_neighborhood(density, adjacency, hops, threshold);
}

}  // namespace specpart
