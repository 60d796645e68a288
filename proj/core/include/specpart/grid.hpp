#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "specpart/sparse.hpp"

namespace specpart {

enum class BoundaryMode { kDirichletBox, kPeriodic };

const char* to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

using Point = std::array<double, 3>;

/// Axis-aligned box. Only the first `dim` coordinates are meaningful.
struct Box {
  int dim = 2;
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};

  double extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// A region D together with its bounding box D'. Grids are laid over D' and
/// nodes outside D are masked out.
class DomainSpec {
 public:
  using Predicate = std::function<bool(const Point&)>;

  static DomainSpec box(const Box& box);
  /// Disk in 2D, ball in 3D.
  static DomainSpec ball(int dim, const Point& center, double radius);
  static DomainSpec ellipse(const Point& center, double semi_x, double semi_y);
  /// Simple polygon (any orientation), even-odd rule.
  static DomainSpec polygon(std::vector<std::array<double, 2>> vertices);
  /// Equilateral triangle with one side on the x axis starting at the origin.
  static DomainSpec equilateral_triangle(double side);
  /// Convex hull of four points.
  static DomainSpec tetrahedron(const std::array<Point, 4>& vertices);
  static DomainSpec regular_tetrahedron(double edge);
  /// Arbitrary membership test inside an explicit bounding box.
  static DomainSpec implicit(const Box& bounds, Predicate inside, std::string name = "implicit");

  int dim() const { return bounds_.dim; }
  const Box& bounds() const { return bounds_; }
  const std::string& kind() const { return kind_; }
  bool contains(const Point& p) const { return inside_(p); }

 private:
  DomainSpec(std::string kind, Box bounds, Predicate inside)
      : kind_(std::move(kind)), bounds_(bounds), inside_(std::move(inside)) {}

  std::string kind_;
  Box bounds_;
  Predicate inside_;
};

/// Uniform finite-difference grid over a box.
///
/// In Dirichlet-box mode the nodes are the interior points of the box (the
/// zero boundary layer is implicit); in periodic mode the box is a torus and
/// node 0 sits on the lower corner. Nodes are numbered lexicographically with
/// x fastest.
class Grid {
 public:
  Grid(int dim, std::array<int, 3> shape, double spacing, Point origin, BoundaryMode mode,
       std::vector<std::uint8_t> mask);

  int dim() const { return dim_; }
  const std::array<int, 3>& shape() const { return shape_; }
  double spacing() const { return spacing_; }
  BoundaryMode boundary_mode() const { return mode_; }
  bool periodic() const { return mode_ == BoundaryMode::kPeriodic; }
  Index size() const { return size_; }
  Index in_domain_count() const { return in_domain_count_; }

  const std::vector<std::uint8_t>& mask() const { return mask_; }
  bool in_domain(Index node) const { return mask_[node] != 0; }

  Index index(const std::array<int, 3>& ijk) const {
    return ijk[0] + static_cast<Index>(shape_[0]) * (ijk[1] + static_cast<Index>(shape_[1]) * ijk[2]);
  }
  std::array<int, 3> multi_index(Index node) const;
  Point position(Index node) const;
  /// Position of the node with lattice coordinates ijk (need not be in range).
  Point position(const std::array<double, 3>& ijk) const;

  /// Node weight h^dim used for discrete integrals.
  double cell_volume() const;
  /// Bounding box D': the walls in Dirichlet mode, the period cell otherwise.
  Box extent() const;

 private:
  int dim_;
  std::array<int, 3> shape_;
  double spacing_;
  Point origin_;  // position of node (0, 0, 0)
  BoundaryMode mode_;
  std::vector<std::uint8_t> mask_;
  Index size_;
  Index in_domain_count_;
};

/// Lays a grid with `resolution` nodes along x over the domain's bounding box.
/// The remaining axes get as many nodes as the common spacing allows; the box
/// is extended upward if needed so that the spacing stays uniform. Throws
/// std::invalid_argument when resolution < 3 or the mask is empty.
Grid build_grid(const DomainSpec& domain, int resolution, BoundaryMode mode);

/// Standard (2 dim)/h^2 diagonal, -1/h^2 off-diagonal stencil. Dirichlet rows
/// drop out-of-box neighbors, periodic rows wrap.
SparseOperator assemble_laplacian(const Grid& grid);

/// Order-1 node adjacency derived from the Laplacian sparsity pattern.
Adjacency adjacency(const Grid& grid);

}  // namespace specpart
