#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "specpart/grid.hpp"

namespace specpart {

DomainSpec DomainSpec::box(const Box& box) {
  for (int a = 0; a < box.dim; ++a) {
    if (!(box.hi[a] > box.lo[a])) throw std::invalid_argument("box must have positive extent");
  }
  return DomainSpec("box", box, [box](const Point& p) {
    for (int a = 0; a < box.dim; ++a) {
      if (p[a] < box.lo[a] || p[a] > box.hi[a]) return false;
    }
    return true;
  });
}

DomainSpec DomainSpec::ball(int dim, const Point& center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Box bounds{dim, center, center};
  for (int a = 0; a < dim; ++a) {
    bounds.lo[a] -= radius;
    bounds.hi[a] += radius;
  }
  return DomainSpec(dim == 2 ? "disk" : "ball", bounds, [dim, center, radius](const Point& p) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (p[a] - center[a]) * (p[a] - center[a]);
    return r2 <= radius * radius;
  });
}

DomainSpec DomainSpec::ellipse(const Point& center, double semi_x, double semi_y) {
  if (!(semi_x > 0.0 && semi_y > 0.0)) throw std::invalid_argument("ellipse semi-axes must be positive");
  Box bounds{2, {center[0] - semi_x, center[1] - semi_y, 0.0}, {center[0] + semi_x, center[1] + semi_y, 0.0}};
  return DomainSpec("ellipse", bounds, [=](const Point& p) {
    const double x = (p[0] - center[0]) / semi_x;
    const double y = (p[1] - center[1]) / semi_y;
    return x * x + y * y <= 1.0;
  });
}

DomainSpec DomainSpec::polygon(std::vector<std::array<double, 2>> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  Box bounds{2, {vertices[0][0], vertices[0][1], 0.0}, {vertices[0][0], vertices[0][1], 0.0}};
  for (const auto& v : vertices) {
    for (int a = 0; a < 2; ++a) {
      bounds.lo[a] = std::min(bounds.lo[a], v[a]);
      bounds.hi[a] = std::max(bounds.hi[a], v[a]);
    }
  }
  return DomainSpec("polygon", bounds, [verts = std::move(vertices)](const Point& p) {
    bool inside = false;
    for (size_t i = 0, j = verts.size() - 1; i < verts.size(); j = i++) {
      const auto& a = verts[i];
      const auto& b = verts[j];
      if ((a[1] > p[1]) != (b[1] > p[1])) {
        const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
        if (p[0] < x) inside = !inside;
      }
    }
    return inside;
  });
}

DomainSpec DomainSpec::equilateral_triangle(double side) {
  auto spec = polygon({{0.0, 0.0}, {side, 0.0}, {0.5 * side, 0.5 * std::sqrt(3.0) * side}});
  spec.kind_ = "triangle";
  return spec;
}

DomainSpec DomainSpec::tetrahedron(const std::array<Point, 4>& v) {
  Box bounds{3, v[0], v[0]};
  for (const auto& p : v) {
    for (int a = 0; a < 3; ++a) {
      bounds.lo[a] = std::min(bounds.lo[a], p[a]);
      bounds.hi[a] = std::max(bounds.hi[a], p[a]);
    }
  }
  auto sub = [](const Point& a, const Point& b) { return Point{a[0] - b[0], a[1] - b[1], a[2] - b[2]}; };
  auto det = [](const Point& a, const Point& b, const Point& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
  };
  const double vol = det(sub(v[1], v[0]), sub(v[2], v[0]), sub(v[3], v[0]));
  if (std::abs(vol) < 1e-14) throw std::invalid_argument("degenerate tetrahedron");
  return DomainSpec("tetrahedron", bounds, [=](const Point& p) {
    // Barycentric signs: p is inside iff each face sees it on the same side as the opposite vertex.
    for (int f = 0; f < 4; ++f) {
      std::array<Point, 4> w = v;
      w[f] = p;
      const double s = det(sub(w[1], w[0]), sub(w[2], w[0]), sub(w[3], w[0]));
      if (s * vol < -1e-14 * std::abs(vol)) return false;
    }
    return true;
  });
}

DomainSpec DomainSpec::regular_tetrahedron(double edge) {
  const double h_face = 0.5 * std::sqrt(3.0) * edge;
  const double height = std::sqrt(2.0 / 3.0) * edge;
  const std::array<Point, 4> v{Point{0.0, 0.0, 0.0}, Point{edge, 0.0, 0.0}, Point{0.5 * edge, h_face, 0.0},
                               Point{0.5 * edge, h_face / 3.0, height}};
  auto spec = tetrahedron(v);
  spec.kind_ = "regular_tetrahedron";
  return spec;
}

DomainSpec DomainSpec::implicit(const Box& bounds, Predicate inside, std::string name) {
  if (!inside) throw std::invalid_argument("implicit domain needs a predicate");
  return DomainSpec(std::move(name), bounds, std::move(inside));
}

}  // namespace specpart
