#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "specpart/grid.hpp"
#include "specpart/surface_fem.hpp"

namespace specpart {

class IsosurfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed, outward-oriented triangulation of {density = level} on a 3D grid.
///
/// Each lattice cube is split into six tetrahedra around the diagonal that
/// points toward the nearest lattice corner (a conforming split, so the
/// result is watertight) and crossings are placed
/// by linear interpolation along tetrahedron edges. Normals point from the
/// side where density > level to the side where it is below.
///
/// Dirichlet grids are padded with a zero layer one spacing outside each wall,
/// so a saturated node next to the wall yields a crossing on the wall itself.
/// Periodic grids are unrolled so that the widest empty slab along each axis
/// becomes the seam; a cell that occupies every slab of some axis cannot be
/// closed and raises IsosurfaceError, as does an empty level set.
TriMesh extract_isosurface(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& density, double level = 0.5);

/// Segment (x0, y0, x1, y1) of a 2D level curve.
using Segment = std::array<double, 4>;

/// Level curve of a density on a 2D grid, same padding and seam rules.
std::vector<Segment> extract_contour(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& density,
                                     double level = 0.5);

}  // namespace specpart
