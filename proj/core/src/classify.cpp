#include "specpart/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace specpart {

bool CellAdjacencyGraph::adjacent(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges.begin(), edges.end(), std::pair{i, j});
}

CellAdjacencyGraph count_cell_neighbors(const Eigen::Ref<const Eigen::MatrixXd>& densities,
                                        const Adjacency& adjacency, double level) {
  if (densities.rows() != adjacency.size()) throw std::invalid_argument("densities do not match adjacency");
  const int n = static_cast<int>(densities.cols());
  const Index nodes = densities.rows();

  // Cells above level at each node, CSR layout.
  std::vector<Index> offsets(nodes + 1, 0);
  std::vector<int> members;
  std::vector<char> seen(n, 0);
  for (Index x = 0; x < nodes; ++x) {
    for (int i = 0; i < n; ++i) {
      if (densities(x, i) > level) {
        members.push_back(i);
        seen[i] = 1;
      }
    }
    offsets[x + 1] = static_cast<Index>(members.size());
  }

  std::vector<char> linked(static_cast<std::size_t>(n) * n, 0);
  for (Index x = 0; x < nodes; ++x) {
    if (offsets[x] == offsets[x + 1]) continue;
    for (Index y : adjacency.neighbors(x)) {
      if (y <= x) continue;
      for (Index a = offsets[x]; a < offsets[x + 1]; ++a) {
        for (Index b = offsets[y]; b < offsets[y + 1]; ++b) {
          const int i = members[a];
          const int j = members[b];
          if (i == j) continue;
          linked[static_cast<std::size_t>(std::min(i, j)) * n + std::max(i, j)] = 1;
        }
      }
    }
  }

  CellAdjacencyGraph g;
  g.cells = n;
  g.neighbor_counts.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!seen[i]) g.empty_cells.push_back(i);
    for (int j = i + 1; j < n; ++j) {
      if (!linked[static_cast<std::size_t>(i) * n + j]) continue;
      g.edges.emplace_back(i, j);
      ++g.neighbor_counts[i];
      ++g.neighbor_counts[j];
    }
  }
  return g;
}

SpectralSignature spectral_signature(const TriMesh& mesh, int k, const EigOptions& options) {
  if (k < 2) throw std::invalid_argument("signature needs k >= 2");
  validate_mesh(mesh, true);
  if (mesh.vertex_count() <= k) throw std::invalid_argument("mesh has too few vertices for the requested k");
  const FemPair fem = assemble_mass_stiffness(mesh);
  const EigSpectrum spectrum = smallest_eigpairs(fem.stiffness, &fem.mass, k, options);

  SpectralSignature sig;
  sig.eigenvalues.assign(spectrum.values.data(), spectrum.values.data() + spectrum.values.size());
  std::sort(sig.eigenvalues.begin(), sig.eigenvalues.end());
  sig.vector = Eigen::Map<const Eigen::VectorXd>(sig.eigenvalues.data(), k);
  const double norm = sig.vector.norm();
  if (!(norm > 0.0)) throw std::runtime_error("signature has zero norm");
  sig.vector /= norm;
  return sig;
}

double signature_distance(const SpectralSignature& a, const SpectralSignature& b) {
  if (a.vector.size() != b.vector.size()) throw std::invalid_argument("signatures have different lengths");
  return (a.vector - b.vector).norm();
}

int ClassPartition::class_count() const {
  return assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
}

std::vector<int> ClassPartition::class_sizes() const {
  std::vector<int> sizes(class_count(), 0);
  for (int c : assignment) ++sizes[c];
  return sizes;
}

ClassPartition classify_cells(std::span<const SpectralSignature> signatures, double epsilon) {
  const int n = static_cast<int>(signatures.size());
  ClassPartition out;
  out.distances = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = signature_distance(signatures[i], signatures[j]);
      out.distances(i, j) = out.distances(j, i) = d;
      if (d < epsilon) {
        const int ri = find(i), rj = find(j);
        parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<int> label(n, -1);
  int classes = 0;
  out.assignment.resize(n);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (label[r] < 0) label[r] = classes++;
    out.assignment[i] = label[r];
  }
  return out;
}

double scale_invariant_eigenvalue(double lambda1, double volume) {
  if (!(lambda1 > 0.0)) throw std::invalid_argument("eigenvalue must be positive");
  if (!(volume > 0.0)) throw std::invalid_argument("volume must be positive");
  return lambda1 * std::cbrt(volume * volume);
}

std::vector<int> argmax_labels(const Eigen::Ref<const Eigen::MatrixXd>& densities, std::span<const std::uint8_t> mask) {
  std::vector<int> labels(densities.rows(), -1);
  for (Index x = 0; x < densities.rows(); ++x) {
    if (!mask.empty() && !mask[x]) continue;
    int best = 0;
    for (int i = 1; i < densities.cols(); ++i) {
      if (densities(x, i) > densities(x, best)) best = i;
    }
    labels[x] = best;
  }
  return labels;
}

}  // namespace specpart
