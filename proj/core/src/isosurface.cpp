#include "specpart/isosurface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace specpart {
namespace {

constexpr double kMinFraction = 1e-4;
constexpr const char* kAxisName[3] = {"x", "y", "z"};

// Tensor-product sample lattice: the grid plus padding, possibly unrolled.
struct Lattice {
  int dim = 3;
  std::array<int, 3> size{1, 1, 1};
  std::array<std::vector<double>, 3> coord;
  std::vector<double> values;

  Index id(int i, int j, int k) const {
    return i + static_cast<Index>(size[0]) * (j + static_cast<Index>(size[1]) * k);
  }
  Index total() const { return static_cast<Index>(size[0]) * size[1] * size[2]; }
  Point position(Index node) const {
    const int i = static_cast<int>(node % size[0]);
    const int j = static_cast<int>((node / size[0]) % size[1]);
    const int k = static_cast<int>(node / (static_cast<Index>(size[0]) * size[1]));
    return {coord[0][i], coord[1][j], coord[2][k]};
  }
};

// First slab of the longest circular run of slabs with no node above level.
int seam_slab(const std::vector<char>& occupied) {
  const int n = static_cast<int>(occupied.size());
  int best_start = -1;
  int best_len = 0;
  for (int s = 0; s < n; ++s) {
    if (occupied[s] || !occupied[(s + n - 1) % n]) continue;
    int len = 0;
    while (len < n && !occupied[(s + len) % n]) ++len;
    if (len > best_len) {
      best_len = len;
      best_start = s;
    }
  }
  if (best_start >= 0) return best_start;
  // Every slab is empty, or every slab is occupied.
  return 0;
}

Lattice build_lattice(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& density, double level) {
  if (density.size() != grid.size()) throw std::invalid_argument("density does not match grid");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie strictly between 0 and 1");

  const int dim = grid.dim();
  const double h = grid.spacing();
  const Point origin = grid.position(Index{0});
  const auto& shape = grid.shape();

  bool any_inside = false;
  std::array<std::vector<char>, 3> occupied;
  for (int a = 0; a < dim; ++a) occupied[a].assign(shape[a], 0);
  for (Index node = 0; node < grid.size(); ++node) {
    if (density[node] <= level) continue;
    any_inside = true;
    const auto ijk = grid.multi_index(node);
    for (int a = 0; a < dim; ++a) occupied[a][ijk[a]] = 1;
  }
  if (!any_inside) throw IsosurfaceError("level set is empty: no node above " + std::to_string(level));

  Lattice lat;
  lat.dim = dim;
  // source[a][s]: grid index along axis a of lattice slab s, -1 for padding.
  std::array<std::vector<int>, 3> source;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      lat.coord[a] = {0.0};
      source[a] = {0};
      continue;
    }
    const int n = shape[a];
    if (grid.periodic()) {
      const int g = seam_slab(occupied[a]);
      if (occupied[a][g]) {
        throw IsosurfaceError(std::string("cell wraps around the periodic box along ") + kAxisName[a] +
                              "; its level set is not closed");
      }
      for (int s = 0; s <= n; ++s) {
        lat.coord[a].push_back(origin[a] + (g + s) * h);
        source[a].push_back((g + s) % n);
      }
    } else {
      lat.coord[a].push_back(origin[a] - 2.0 * h);
      source[a].push_back(-1);
      for (int s = 0; s < n; ++s) {
        lat.coord[a].push_back(origin[a] + s * h);
        source[a].push_back(s);
      }
      lat.coord[a].push_back(origin[a] + (n + 1) * h);
      source[a].push_back(-1);
    }
    lat.size[a] = static_cast<int>(lat.coord[a].size());
  }

  const double below = std::nextafter(level, -std::numeric_limits<double>::infinity());
  lat.values.assign(lat.total(), 0.0);
  for (int k = 0; k < lat.size[2]; ++k) {
    for (int j = 0; j < lat.size[1]; ++j) {
      for (int i = 0; i < lat.size[0]; ++i) {
        const int si = source[0][i], sj = source[1][j], sk = source[2][k];
        if (si < 0 || sj < 0 || sk < 0) continue;
        double v = density[grid.index({si, sj, sk})];
        if (v == level) v = below;
        lat.values[lat.id(i, j, k)] = v;
      }
    }
  }
  return lat;
}

// Crossing vertices keyed by the lattice edge they lie on.
class VertexPool {
 public:
  VertexPool(const Lattice& lat, double level) : lat_(lat), level_(level) {}

  int crossing(Index a, Index b) {
    if (a > b) std::swap(a, b);
    const auto key = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(lat_.total()) +
                     static_cast<std::uint64_t>(b);
    auto [it, fresh] = ids_.try_emplace(key, static_cast<int>(points_.size()));
    if (fresh) {
      const double va = lat_.values[a];
      const double vb = lat_.values[b];
      const double t = std::clamp((level_ - va) / (vb - va), kMinFraction, 1.0 - kMinFraction);
      const Point pa = lat_.position(a);
      const Point pb = lat_.position(b);
      points_.push_back({pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), pa[2] + t * (pb[2] - pa[2])});
    }
    return it->second;
  }
  const std::vector<Point>& points() const { return points_; }

 private:
  const Lattice& lat_;
  double level_;
  std::unordered_map<std::uint64_t, int> ids_;
  std::vector<Point> points_;
};

// Per-axis mirror of the cube split: cubes in the upper half of each axis are
// reflected so the shared diagonal always runs through the outer lattice
// corner. Depends on one index per axis, so neighboring splits still conform.
int mirror(int index, int cubes) { return 2 * index >= cubes ? 1 : 0; }

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Point centroid(const Lattice& lat, std::span<const Index> nodes) {
  Point c{0.0, 0.0, 0.0};
  for (Index n : nodes) {
    const Point p = lat.position(n);
    for (int a = 0; a < 3; ++a) c[a] += p[a] / static_cast<double>(nodes.size());
  }
  return c;
}

}  // namespace

TriMesh extract_isosurface(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& density, double level) {
  if (grid.dim() != 3) throw std::invalid_argument("isosurface extraction needs a 3D grid");
  const Lattice lat = build_lattice(grid, density, level);
  VertexPool pool(lat, level);
  std::vector<std::array<int, 3>> tris;

  // Corner c of a cube is offset (c & 1, c >> 1 & 1, c >> 2 & 1).
  constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                               {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

  auto emit = [&](int p0, int p1, int p2, const Point& outward) {
    const auto& pts = pool.points();
    const Point n = cross(sub(pts[p1], pts[p0]), sub(pts[p2], pts[p0]));
    if (dot(n, outward) < 0.0) std::swap(p1, p2);
    tris.push_back({p0, p1, p2});
  };

  for (int k = 0; k + 1 < lat.size[2]; ++k) {
    for (int j = 0; j + 1 < lat.size[1]; ++j) {
      for (int i = 0; i + 1 < lat.size[0]; ++i) {
        const int rx = mirror(i, lat.size[0] - 1), ry = mirror(j, lat.size[1] - 1), rz = mirror(k, lat.size[2] - 1);
        std::array<Index, 8> corner;
        int inside_count = 0;
        for (int c = 0; c < 8; ++c) {
          corner[c] = lat.id(i + ((c & 1) ^ rx), j + (((c >> 1) & 1) ^ ry), k + (((c >> 2) & 1) ^ rz));
          inside_count += lat.values[corner[c]] > level;
        }
        if (inside_count == 0 || inside_count == 8) continue;

        for (const auto& tet : kTets) {
          std::array<Index, 4> in{}, out{};
          int ni = 0, no = 0;
          for (int c : tet) {
            if (lat.values[corner[c]] > level) {
              in[ni++] = corner[c];
            } else {
              out[no++] = corner[c];
            }
          }
          if (ni == 0 || no == 0) continue;
          const Point outward = sub(centroid(lat, std::span(out.data(), no)), centroid(lat, std::span(in.data(), ni)));
          if (ni == 1 || no == 1) {
            const Index apex = ni == 1 ? in[0] : out[0];
            const auto& base = ni == 1 ? out : in;
            emit(pool.crossing(apex, base[0]), pool.crossing(apex, base[1]), pool.crossing(apex, base[2]), outward);
          } else {
            // Quad with cyclic corners (in0,out0) (in0,out1) (in1,out1) (in1,out0).
            const int q0 = pool.crossing(in[0], out[0]);
            const int q1 = pool.crossing(in[0], out[1]);
            const int q2 = pool.crossing(in[1], out[1]);
            const int q3 = pool.crossing(in[1], out[0]);
            emit(q0, q1, q2, outward);
            emit(q0, q2, q3, outward);
          }
        }
      }
    }
  }

  TriMesh mesh;
  const auto& pts = pool.points();
  mesh.vertices.resize(static_cast<Index>(pts.size()), 3);
  for (std::size_t v = 0; v < pts.size(); ++v) {
    for (int a = 0; a < 3; ++a) mesh.vertices(static_cast<Index>(v), a) = pts[v][a];
  }
  mesh.triangles.resize(static_cast<Index>(tris.size()), 3);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int a = 0; a < 3; ++a) mesh.triangles(static_cast<Index>(t), a) = tris[t][a];
  }
  if (!is_closed(mesh)) throw IsosurfaceError("extracted level set is not closed");
  return mesh;
}

std::vector<Segment> extract_contour(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& density,
                                     double level) {
  if (grid.dim() != 2) throw std::invalid_argument("contour extraction needs a 2D grid");
  const Lattice lat = build_lattice(grid, density, level);
  std::vector<Segment> segments;

  auto crossing = [&](Index a, Index b) {
    if (a > b) std::swap(a, b);
    const double va = lat.values[a];
    const double vb = lat.values[b];
    const double t = std::clamp((level - va) / (vb - va), 0.0, 1.0);
    const Point pa = lat.position(a);
    const Point pb = lat.position(b);
    return std::array<double, 2>{pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])};
  };

  constexpr int kTris[2][3] = {{0, 1, 3}, {0, 2, 3}};
  for (int j = 0; j + 1 < lat.size[1]; ++j) {
    for (int i = 0; i + 1 < lat.size[0]; ++i) {
      const int rx = mirror(i, lat.size[0] - 1), ry = mirror(j, lat.size[1] - 1);
      std::array<Index, 4> corner;
      for (int c = 0; c < 4; ++c) corner[c] = lat.id(i + ((c & 1) ^ rx), j + (((c >> 1) & 1) ^ ry), 0);
      for (const auto& tri : kTris) {
        std::array<Index, 3> in{}, out{};
        int ni = 0, no = 0;
        for (int c : tri) {
          if (lat.values[corner[c]] > level) {
            in[ni++] = corner[c];
          } else {
            out[no++] = corner[c];
          }
        }
        if (ni == 0 || no == 0) continue;
        const Index apex = ni == 1 ? in[0] : out[0];
        const auto& base = ni == 1 ? out : in;
        const auto p = crossing(apex, base[0]);
        const auto q = crossing(apex, base[1]);
        segments.push_back({p[0], p[1], q[0], q[1]});
      }
    }
  }
  return segments;
}

}  // namespace specpart
