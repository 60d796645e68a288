#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "specpart/neighborhood.hpp"
#include "specpart/sparse.hpp"

namespace specpart {

/// Triangulated surface: vertex coordinates and index triples.
struct TriMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> triangles;

  Index vertex_count() const { return vertices.rows(); }
  Index triangle_count() const { return triangles.rows(); }
};

/// Unique undirected edges (a < b), sorted.
std::vector<std::pair<Index, Index>> mesh_edges(const TriMesh& mesh);
/// Vertices sharing an edge.
Adjacency mesh_adjacency(const TriMesh& mesh);
/// Every edge is shared by exactly two triangles.
bool is_closed(const TriMesh& mesh);
Index euler_characteristic(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);
/// Signed volume enclosed by a closed, outward-oriented mesh (sum of x.n/3).
double enclosed_volume(const TriMesh& mesh);

/// Index range and non-degeneracy (area > 1e-14 * bbox diagonal^2). With
/// `require_closed`, also checks that the surface is a closed 2-manifold.
/// Throws std::invalid_argument describing the first violation.
void validate_mesh(const TriMesh& mesh, bool require_closed = false);

/// Icosahedron subdivided `subdivisions` times by edge midpoints and projected
/// to the sphere: 10 * 4^s + 2 vertices.
TriMesh generate_sphere(int subdivisions, double radius = 1.0);

/// Parametric torus with major radius R and minor radius r on an nu x nv lattice.
TriMesh generate_torus(double major_radius, double minor_radius, int nu, int nv);

/// Axis-aligned box surface with each face split into n x n quads (two triangles each).
TriMesh generate_box(const std::array<double, 3>& lo, const std::array<double, 3>& hi, int n);

/// OFF or OBJ (triangles only), chosen by extension.
TriMesh load_mesh(const std::filesystem::path& path);
void save_obj(const std::filesystem::path& path, const TriMesh& mesh);
void save_off(const std::filesystem::path& path, const TriMesh& mesh);
/// ASCII PLY; optional per-vertex integer labels as a "label" property.
void save_ply(const std::filesystem::path& path, const TriMesh& mesh, std::span<const int> labels = {});

/// P1 mass (consistent) and stiffness matrices.
struct FemPair {
  SparseOperator mass;
  SparseOperator stiffness;
};

/// Throws std::invalid_argument on degenerate triangles.
FemPair assemble_mass_stiffness(const TriMesh& mesh);

/// Computational neighborhood on a triangulation: vertices within `hops`
/// edges of {density > threshold}.
Neighborhood surface_neighborhood(const Eigen::Ref<const Eigen::VectorXd>& density, const Adjacency& mesh_adjacency,
                                  int hops = 5, double threshold = 0.01);

}  // namespace specpart
