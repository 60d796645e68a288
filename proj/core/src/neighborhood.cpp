#include "specpart/neighborhood.hpp"

#include <algorithm>

namespace specpart {

Reachability neighbors_up_to_order(const Adjacency& adjacency, int order) {
  if (order < 1) throw std::invalid_argument("neighbor order must be at least 1");
  const Index n = adjacency.size();
  std::vector<Index> offsets(n + 1, 0);
  std::vector<Index> targets;
  std::vector<Index> frontier;
  std::vector<Index> next;
  std::vector<Index> stamp(n, -1);
  for (Index src = 0; src < n; ++src) {
    const size_t row_begin = targets.size();
    stamp[src] = src;
    frontier.assign(1, src);
    for (int round = 0; round < order && !frontier.empty(); ++round) {
      next.clear();
      for (Index u : frontier) {
        for (Index v : adjacency.neighbors(u)) {
          if (stamp[v] == src) continue;
          stamp[v] = src;
          next.push_back(v);
          targets.push_back(v);
        }
      }
      frontier.swap(next);
    }
    std::sort(targets.begin() + row_begin, targets.end());
    offsets[src + 1] = static_cast<Index>(targets.size());
  }
  return Reachability(order, Adjacency(std::move(offsets), std::move(targets)));
}

std::vector<Index> hop_ball(const Adjacency& adjacency, std::span<const Index> seeds, int order) {
  if (order < 0) throw std::invalid_argument("hop order must be non-negative");
  std::vector<std::uint8_t> seen(adjacency.size(), 0);
  std::vector<Index> ball;
  std::vector<Index> frontier;
  for (Index s : seeds) {
    if (!seen[s]) {
      seen[s] = 1;
      frontier.push_back(s);
      ball.push_back(s);
    }
  }
  std::vector<Index> next;
  for (int round = 0; round < order && !frontier.empty(); ++round) {
    next.clear();
    for (Index u : frontier) {
      for (Index v : adjacency.neighbors(u)) {
        if (seen[v]) continue;
        seen[v] = 1;
        next.push_back(v);
        ball.push_back(v);
      }
    }
    frontier.swap(next);
  }
  std::sort(ball.begin(), ball.end());
  return ball;
}

Neighborhood::Neighborhood(std::vector<Index> sorted_nodes) : nodes_(std::move(sorted_nodes)) {
  if (!std::is_sorted(nodes_.begin(), nodes_.end()) ||
      std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    throw std::invalid_argument("neighborhood nodes must be sorted and unique");
  }
}

Index Neighborhood::local(Index global) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), global);
  if (it == nodes_.end() || *it != global) return -1;
  return static_cast<Index>(it - nodes_.begin());
}

Eigen::VectorXd Neighborhood::restrict_vector(const Eigen::Ref<const Eigen::VectorXd>& full) const {
  Eigen::VectorXd out(size());
  for (Index i = 0; i < size(); ++i) out[i] = full[nodes_[i]];
  return out;
}

Eigen::VectorXd Neighborhood::extend_vector(const Eigen::Ref<const Eigen::VectorXd>& local, Index full_size) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(full_size);
  for (Index i = 0; i < size(); ++i) out[nodes_[i]] = local[i];
  return out;
}

Neighborhood computational_neighborhood(const Eigen::Ref<const Eigen::VectorXd>& density,
                                        const Adjacency& adjacency, int order, double threshold) {
  if (density.size() != adjacency.size()) throw std::invalid_argument("density size does not match adjacency");
  std::vector<Index> support;
  for (Index i = 0; i < density.size(); ++i) {
    if (density[i] > threshold) support.push_back(i);
  }
  if (support.empty()) throw CellVanished();
  return Neighborhood(hop_ball(adjacency, support, order));
}

SparseOperator restrict_operator(const SparseOperator& op, const Neighborhood& neighborhood) {
  const auto nodes = neighborhood.nodes();
  const Index m = neighborhood.size();
  if (m > 0 && (nodes.front() < 0 || nodes.back() >= op.rows())) {
    throw std::out_of_range("neighborhood index out of operator range");
  }
  std::vector<int> local_of(op.rows(), -1);
  for (Index i = 0; i < m; ++i) local_of[nodes[i]] = static_cast<int>(i);

  SparseOperator sub(m, m);
  std::vector<int> counts(m, 0);
  for (Index lj = 0; lj < m; ++lj) {
    for (SparseOperator::InnerIterator it(op, nodes[lj]); it; ++it) {
      if (local_of[it.row()] >= 0) ++counts[lj];
    }
  }
  sub.reserve(counts);
  for (Index lj = 0; lj < m; ++lj) {
    for (SparseOperator::InnerIterator it(op, nodes[lj]); it; ++it) {
      const int li = local_of[it.row()];
      if (li >= 0) sub.insert(li, lj) = it.value();
    }
  }
  sub.makeCompressed();
  return sub;
}

}  // namespace specpart
