#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "casc/common.hpp"

namespace casc {

/// One undirected edge as it appears in an input list: endpoints and weight.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Undirected graph stored as a symmetric sparse adjacency matrix.
/// Row-major storage so that iterating the neighbors of node i costs
/// O(degree(i)). Weights are nonnegative; the structure is exactly
/// symmetric by construction and duplicate input entries are summed.
class SparseGraph {
public:
  using Adjacency = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseGraph() = default;

  SparseGraph(int n_nodes, Adjacency adjacency)
      : n_nodes_(n_nodes), adjacency_(std::move(adjacency)) {
    degrees_ = adjacency_ * Eigen::VectorXd::Ones(n_nodes_);
  }

  int n_nodes() const { return n_nodes_; }
  const Adjacency& adjacency() const { return adjacency_; }

  /// degrees[i] = sum_j A_ij (weighted; a self-loop counts once).
  const Eigen::VectorXd& degrees() const { return degrees_; }

  double total_weight() const { return degrees_.sum() / 2.0; }

  /// Number of stored off-diagonal pairs / 2 + self-loops.
  std::int64_t n_edges() const {
    std::int64_t loops = 0;
    for (int i = 0; i < n_nodes_; ++i) {
      if (adjacency_.coeff(i, i) != 0.0) ++loops;
    }
    return (adjacency_.nonZeros() - loops) / 2 + loops;
  }

  /// y = A x without materializing anything dense.
  void apply_adjacency(const Eigen::Ref<const Eigen::VectorXd>& x,
                       Eigen::Ref<Eigen::VectorXd> y) const {
    y.noalias() = adjacency_ * x;
  }

private:
  int n_nodes_ = 0;
  Adjacency adjacency_;
  Eigen::VectorXd degrees_;
};

/// Builds a symmetrized graph from an edge list. An input entry (i, j, w)
/// contributes weight w at both (i, j) and (j, i); duplicates are summed;
/// self-loops are kept as given and enter the degree once.
inline SparseGraph build_graph(const std::vector<Edge>& edges, int n_nodes) {
  if (n_nodes < 0) throw InputError("build_graph: n_nodes must be nonnegative");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.i < 0 || e.i >= n_nodes || e.j < 0 || e.j >= n_nodes) {
      throw InputError("build_graph: edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                       ") out of range for n_nodes=" + std::to_string(n_nodes));
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw InputError("build_graph: negative or non-finite edge weight");
    }
    triplets.emplace_back(e.i, e.j, e.weight);
    if (e.i != e.j) triplets.emplace_back(e.j, e.i, e.weight);
  }
  SparseGraph::Adjacency adj(n_nodes, n_nodes);
  adj.setFromTriplets(triplets.begin(), triplets.end());  // sums duplicates
  adj.makeCompressed();
  return SparseGraph(n_nodes, std::move(adj));
}

/// Average node degree, the default regularizer tau.
inline double default_tau(const SparseGraph& graph) {
  if (graph.n_nodes() < 1) throw InputError("default_tau: empty graph has no nodes");
  return graph.degrees().sum() / static_cast<double>(graph.n_nodes());
}

}  // namespace casc
