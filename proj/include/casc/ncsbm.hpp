#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "casc/common.hpp"
#include "casc/covariates.hpp"
#include "casc/graph.hpp"

namespace casc {

/// Node-contextualized stochastic blockmodel: contiguous blocks Z, symmetric
/// edge-probability matrix B, and Bernoulli covariate expectation matrix M.
struct NcsbmParams {
  int n_nodes = 0;
  int k_blocks = 0;
  std::vector<int> block_sizes;  // length K, sums to N
  Eigen::MatrixXd B;             // K x K, entries in [0, 1], symmetric
  Eigen::MatrixXd M;             // K x R, entries in [0, 1] (Bernoulli means)
  bool b_rank_deficient = false;  // |det B| <= 1e-12; flagged, not fatal

  int n_covariates() const { return static_cast<int>(M.cols()); }

  /// Block label of each node: contiguous ranges in block order.
  Eigen::VectorXi block_labels() const {
    Eigen::VectorXi z(n_nodes);
    int node = 0;
    for (int b = 0; b < k_blocks; ++b) {
      for (int c = 0; c < block_sizes[static_cast<size_t>(b)]; ++c) z[node++] = b;
    }
    return z;
  }

  void validate() const {
    if (n_nodes < 1 || k_blocks < 1) throw InputError("ncsbm: N and K must be positive");
    if (static_cast<int>(block_sizes.size()) != k_blocks) throw InputError("ncsbm: need K block sizes");
    int total = 0;
    for (int s : block_sizes) {
      if (s < 1) throw InputError("ncsbm: block sizes must be >= 1");
      total += s;
    }
    if (total != n_nodes) throw InputError("ncsbm: block sizes must sum to N");
    if (B.rows() != k_blocks || B.cols() != k_blocks) throw InputError("ncsbm: B must be K x K");
    if (M.rows() != k_blocks) throw InputError("ncsbm: M must have K rows");
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        if (B(i, j) < 0.0 || B(i, j) > 1.0) throw InputError("ncsbm: B entries must lie in [0, 1]");
        if (std::abs(B(i, j) - B(j, i)) > 1e-15) throw InputError("ncsbm: B must be symmetric");
      }
    }
    for (Eigen::Index i = 0; i < M.size(); ++i) {
      const double v = M.data()[i];
      if (v < 0.0 || v > 1.0) throw InputError("ncsbm: M entries must lie in [0, 1]");
    }
  }
};

/// floor(N/K) per block with the remainder spread over the first blocks.
inline std::vector<int> equal_block_sizes(int n, int k) {
  if (n < k || k < 1) throw InputError("equal_block_sizes: need N >= K >= 1");
  std::vector<int> sizes(static_cast<size_t>(k), n / k);
  for (int i = 0; i < n % k; ++i) ++sizes[static_cast<size_t>(i)];
  return sizes;
}

/// Block matrices of the simulation designs: B has p on the diagonal and q
/// off it (swapped for the non-assortative variant), and M places m1 where
/// the covariate index matches the block (pattern tiled across columns when
/// R is a multiple of K, and truncated otherwise) and m2 elsewhere.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> make_design_matrices(double p, double q,
                                                                        double m1, double m2,
                                                                        int k, int r,
                                                                        bool assortative) {
  for (double v : {p, q, m1, m2}) {
    if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
      throw InputError("make_design_matrices: probabilities must lie in [0, 1]");
    }
  }
  if (k < 1 || r < 1) throw InputError("make_design_matrices: K and R must be positive");
  const double diag = assortative ? p : q;
  const double off = assortative ? q : p;
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(k, k, off);
  b.diagonal().setConstant(diag);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, r, m2);
  for (int col = 0; col < r; ++col) m(col % k, col) = m1;
  return {b, m};
}

inline NcsbmParams make_ncsbm_params(int n, int k, Eigen::MatrixXd b, Eigen::MatrixXd m,
                                     std::vector<int> block_sizes = {}) {
  NcsbmParams params;
  params.n_nodes = n;
  params.k_blocks = k;
  params.block_sizes = block_sizes.empty() ? equal_block_sizes(n, k) : std::move(block_sizes);
  params.B = std::move(b);
  params.M = std::move(m);
  params.validate();
  params.b_rank_deficient = std::abs(params.B.determinant()) <= 1e-12;
  return params;
}

struct NcsbmSample {
  SparseGraph graph;
  CovariateMatrix covariates;
  Eigen::VectorXi z;  // block labels the graph was drawn from
};

/// Draws a graph and covariates from the model. Edges are independent
/// Bernoulli over unordered pairs (no self-loops); covariates are Bernoulli
/// with block-determined means. When covariate_membership is given the
/// covariates follow it instead of Z (the misspecified design).
inline NcsbmSample sample_ncsbm(const NcsbmParams& params, std::uint64_t seed,
                                const Eigen::VectorXi* covariate_membership = nullptr) {
  params.validate();
  const int n = params.n_nodes;
  const int r = params.n_covariates();
  Eigen::VectorXi z = params.block_labels();
  const Eigen::VectorXi& y = covariate_membership ? *covariate_membership : z;
  if (y.size() != n) throw InputError("sample_ncsbm: covariate membership length != N");

  auto rng = make_rng(derive_seed(seed, 0x67a9));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  edges.reserve(static_cast<size_t>(0.6 * params.B.mean() * n * n / 2 + 64));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (unit(rng) < params.B(z[i], z[j])) edges.push_back({i, j, 1.0});
    }
  }

  auto cov_rng = make_rng(derive_seed(seed, 0x2b1c));
  Eigen::MatrixXd x(n, r);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < r; ++c) {
      x(i, c) = unit(cov_rng) < params.M(y[i], c) ? 1.0 : 0.0;
    }
  }

  NcsbmSample sample;
  sample.graph = build_graph(edges, n);
  sample.covariates = make_covariates(std::move(x));
  sample.covariates.bound = 1.0;  // Bernoulli support bound, independent of the draw
  sample.z = std::move(z);
  return sample;
}

/// Reassigns ceil((1 - agreement) * N) uniformly chosen nodes to a uniformly
/// chosen *different* block, leaving the rest equal to z.
inline Eigen::VectorXi misspecify_membership(const Eigen::VectorXi& z, int k_blocks,
                                             double agreement, std::uint64_t seed) {
  const int n = static_cast<int>(z.size());
  if (k_blocks < 2) throw InputError("misspecify_membership: needs K >= 2");
  if (agreement < 1.0 / k_blocks - 1e-12 || agreement > 1.0 + 1e-12) {
    throw InputError("misspecify_membership: agreement must lie in [1/K, 1]");
  }
  const int n_flip = static_cast<int>(std::ceil((1.0 - agreement) * n - 1e-12));
  Eigen::VectorXi y = z;
  if (n_flip <= 0) return y;

  auto rng = make_rng(seed);
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n_flip; ++i) {  // partial Fisher-Yates
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(pick(rng))]);
  }
  std::uniform_int_distribution<int> other(0, k_blocks - 2);
  for (int i = 0; i < n_flip; ++i) {
    const int node = order[static_cast<size_t>(i)];
    int label = other(rng);
    if (label >= z[node]) ++label;
    y[node] = label;
  }
  return y;
}

/// Population adjacency Z B Z^T; the diagonal keeps its expectation.
inline Eigen::MatrixXd population_adjacency(const NcsbmParams& params) {
  const Eigen::VectorXi z = params.block_labels();
  Eigen::MatrixXd a(params.n_nodes, params.n_nodes);
  for (int i = 0; i < params.n_nodes; ++i) {
    for (int j = 0; j < params.n_nodes; ++j) a(i, j) = params.B(z[i], z[j]);
  }
  return a;
}

/// E(X X^T) = ZM (ZM)^T + diag of summed Bernoulli variances M(1 - M).
inline Eigen::MatrixXd population_covariate_gram(const NcsbmParams& params) {
  const Eigen::VectorXi z = params.block_labels();
  const int n = params.n_nodes;
  Eigen::MatrixXd chi(n, params.n_covariates());
  for (int i = 0; i < n; ++i) chi.row(i) = params.M.row(z[i]);
  Eigen::MatrixXd gram = chi * chi.transpose();
  for (int i = 0; i < n; ++i) {
    double var = 0.0;
    for (int c = 0; c < params.n_covariates(); ++c) {
      const double m = params.M(z[i], c);
      var += m * (1.0 - m);
    }
    gram(i, i) += var;
  }
  return gram;
}

/// Mean population degree; the natural tau for population computations.
inline double population_default_tau(const NcsbmParams& params) {
  double total = 0.0;
  for (int b = 0; b < params.k_blocks; ++b) {
    double row = 0.0;
    for (int c = 0; c < params.k_blocks; ++c) {
      row += params.B(b, c) * params.block_sizes[static_cast<size_t>(c)];
    }
    total += row * params.block_sizes[static_cast<size_t>(b)];
  }
  return total / params.n_nodes;
}

/// Dense population version of the covariate-assisted operator,
///   (D + tau I)^{-1/2} A (D + tau I)^{-1} A (D + tau I)^{-1/2} + alpha E(XX^T),
/// with A = Z B Z^T and D its row sums. Guarded to N <= 2000.
inline Eigen::MatrixXd population_laplacian(const NcsbmParams& params, double alpha, double tau) {
  params.validate();
  if (params.n_nodes > 2000) {
    throw InputError("population_laplacian: N > 2000 would materialize too large a matrix");
  }
  if (alpha < 0.0 || tau < 0.0) throw InputError("population_laplacian: alpha, tau must be >= 0");
  Eigen::MatrixXd a = population_adjacency(params);
  Eigen::VectorXd deg = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    const double dt = deg[i] + tau;
    if (dt <= 0.0) throw NumericalError("population_laplacian: zero regularized degree");
    inv_sqrt[i] = 1.0 / std::sqrt(dt);
  }
  // half = D_t^{-1/2} A D_t^{-1/2}; squaring it gives D_t^{-1/2} A D_t^{-1} A D_t^{-1/2}.
  Eigen::MatrixXd half = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  Eigen::MatrixXd lap = half * half;
  if (alpha > 0.0) lap += alpha * population_covariate_gram(params);
  return lap;
}

}  // namespace casc
