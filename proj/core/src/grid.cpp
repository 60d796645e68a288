#include "specpart/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace specpart {

const char* to_string(BoundaryMode mode) {
  return mode == BoundaryMode::kPeriodic ? "periodic" : "dirichlet";
}

BoundaryMode boundary_mode_from_string(const std::string& name) {
  if (name == "dirichlet" || name == "dirichlet-box") return BoundaryMode::kDirichletBox;
  if (name == "periodic") return BoundaryMode::kPeriodic;
  throw std::invalid_argument("unknown boundary mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Adjacency

Adjacency::Adjacency(std::vector<Index> offsets, std::vector<Index> targets)
    : offsets_(std::move(offsets)), targets_(std::move(targets)) {}

Adjacency Adjacency::from_operator(const SparseOperator& op) {
  const Index n = op.rows();
  std::vector<Index> offsets(n + 1, 0);
  std::vector<Index> targets;
  targets.reserve(op.nonZeros());
  // Symmetric pattern: column j lists the neighbors of j.
  for (Index j = 0; j < n; ++j) {
    for (SparseOperator::InnerIterator it(op, j); it; ++it) {
      if (it.row() != j && it.value() != 0.0) targets.push_back(it.row());
    }
    std::sort(targets.begin() + offsets[j], targets.end());
    targets.erase(std::unique(targets.begin() + offsets[j], targets.end()), targets.end());
    offsets[j + 1] = static_cast<Index>(targets.size());
  }
  return Adjacency(std::move(offsets), std::move(targets));
}

Adjacency Adjacency::from_edges(Index node_count, std::span<const std::pair<Index, Index>> edges) {
  std::vector<std::vector<Index>> rows(node_count);
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw std::out_of_range("edge index out of range");
    }
    rows[a].push_back(b);
    rows[b].push_back(a);
  }
  std::vector<Index> offsets(node_count + 1, 0);
  std::vector<Index> targets;
  for (Index i = 0; i < node_count; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    targets.insert(targets.end(), row.begin(), row.end());
    offsets[i + 1] = static_cast<Index>(targets.size());
  }
  return Adjacency(std::move(offsets), std::move(targets));
}

bool Adjacency::adjacent(Index a, Index b) const {
  const auto row = neighbors(a);
  return std::binary_search(row.begin(), row.end(), b);
}

void write_matrix_market(std::ostream& out, const SparseOperator& op) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << op.rows() << ' ' << op.cols() << ' ' << op.nonZeros() << '\n';
  out.precision(17);
  for (Index j = 0; j < op.outerSize(); ++j) {
    for (SparseOperator::InnerIterator it(op, j); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

double symmetry_defect(const SparseOperator& op) {
  const SparseOperator diff = op - SparseOperator(op.transpose());
  double scale = 0.0;
  for (Index j = 0; j < op.outerSize(); ++j) {
    for (SparseOperator::InnerIterator it(op, j); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  double defect = 0.0;
  for (Index j = 0; j < diff.outerSize(); ++j) {
    for (SparseOperator::InnerIterator it(diff, j); it; ++it) defect = std::max(defect, std::abs(it.value()));
  }
  return scale > 0.0 ? defect / scale : defect;
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int dim, std::array<int, 3> shape, double spacing, Point origin, BoundaryMode mode,
           std::vector<std::uint8_t> mask)
    : dim_(dim), shape_(shape), spacing_(spacing), origin_(origin), mode_(mode), mask_(std::move(mask)) {
  if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("grid dimension must be 2 or 3");
  if (!(spacing_ > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (dim_ == 2) shape_[2] = 1;
  for (int a = 0; a < dim_; ++a) {
    if (shape_[a] < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  }
  size_ = static_cast<Index>(shape_[0]) * shape_[1] * shape_[2];
  if (static_cast<Index>(mask_.size()) != size_) throw std::invalid_argument("mask size does not match grid");
  in_domain_count_ = std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; });
  if (in_domain_count_ == 0) throw std::invalid_argument("domain does not intersect grid");
}

std::array<int, 3> Grid::multi_index(Index node) const {
  std::array<int, 3> ijk{};
  ijk[0] = static_cast<int>(node % shape_[0]);
  node /= shape_[0];
  ijk[1] = static_cast<int>(node % shape_[1]);
  ijk[2] = static_cast<int>(node / shape_[1]);
  return ijk;
}

Point Grid::position(Index node) const {
  const auto ijk = multi_index(node);
  return position(std::array<double, 3>{double(ijk[0]), double(ijk[1]), double(ijk[2])});
}

Point Grid::position(const std::array<double, 3>& ijk) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + ijk[a] * spacing_;
  return p;
}

double Grid::cell_volume() const { return std::pow(spacing_, dim_); }

Box Grid::extent() const {
  Box box;
  box.dim = dim_;
  for (int a = 0; a < dim_; ++a) {
    if (periodic()) {
      box.lo[a] = origin_[a];
      box.hi[a] = origin_[a] + shape_[a] * spacing_;
    } else {
      box.lo[a] = origin_[a] - spacing_;
      box.hi[a] = origin_[a] + shape_[a] * spacing_;
    }
  }
  return box;
}

Grid build_grid(const DomainSpec& domain, int resolution, BoundaryMode mode) {
  if (resolution < 3) throw std::invalid_argument("resolution must be at least 3");
  const Box& box = domain.bounds();
  const int dim = domain.dim();
  const bool periodic = mode == BoundaryMode::kPeriodic;
  const double h = periodic ? box.extent(0) / resolution : box.extent(0) / (resolution + 1);

  std::array<int, 3> shape{resolution, 1, 1};
  for (int a = 1; a < dim; ++a) {
    const double ratio = box.extent(a) / h;
    if (periodic) {
      const double rounded = std::round(ratio);
      if (std::abs(ratio - rounded) > 1e-6) {
        throw std::invalid_argument("periodic box extents are not commensurate with the spacing");
      }
      shape[a] = static_cast<int>(rounded);
    } else {
      shape[a] = static_cast<int>(std::ceil(ratio - 1e-9)) - 1;
    }
    if (shape[a] < 3) throw std::invalid_argument("resolution must give at least 3 nodes per axis");
  }

  Point origin{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) origin[a] = periodic ? box.lo[a] : box.lo[a] + h;

  const Index count = static_cast<Index>(shape[0]) * shape[1] * shape[2];
  std::vector<std::uint8_t> mask(count, 0);
  for (Index node = 0; node < count; ++node) {
    Point p{0.0, 0.0, 0.0};
    Index rest = node;
    for (int a = 0; a < 3; ++a) {
      const int c = static_cast<int>(rest % shape[a]);
      rest /= shape[a];
      if (a < dim) p[a] = origin[a] + c * h;
    }
    mask[node] = domain.contains(p) ? 1 : 0;
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw std::invalid_argument("domain does not intersect grid");
  }
  return Grid(dim, shape, h, origin, mode, std::move(mask));
}

SparseOperator assemble_laplacian(const Grid& grid) {
  const Index n = grid.size();
  const int dim = grid.dim();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  const auto& shape = grid.shape();

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<size_t>(n) * (2 * dim + 1));
  for (Index node = 0; node < n; ++node) {
    const auto ijk = grid.multi_index(node);
    triplets.emplace_back(node, node, 2.0 * dim * inv_h2);
    for (int a = 0; a < dim; ++a) {
      for (int step : {-1, 1}) {
        auto nb = ijk;
        nb[a] += step;
        if (nb[a] < 0 || nb[a] >= shape[a]) {
          if (!grid.periodic()) continue;
          nb[a] = (nb[a] + shape[a]) % shape[a];
        }
        triplets.emplace_back(node, grid.index(nb), -inv_h2);
      }
    }
  }
  SparseOperator lap(n, n);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  lap.makeCompressed();
  return lap;
}

Adjacency adjacency(const Grid& grid) { return Adjacency::from_operator(assemble_laplacian(grid)); }

}  // namespace specpart
