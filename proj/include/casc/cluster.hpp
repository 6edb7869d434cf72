#pragma once

#include <Eigen/Core>

#include <cmath>
#include <utility>

#include "casc/covariates.hpp"
#include "casc/eigensolve.hpp"
#include "casc/graph.hpp"
#include "casc/kmeans.hpp"
#include "casc/operators.hpp"

namespace casc {

/// End-to-end spectral clustering output: labels, the k-means geometry on the
/// spectral embedding, and the eigensolver diagnostics that produced it.
struct ClusteringResult {
  Eigen::VectorXi labels;
  Eigen::MatrixXd centroids;  // K x K (rows live in the embedding space)
  double wcss = 0.0;
  EigenResult eigen;
  OperatorSpec spec;
  bool row_normalized = false;
  int zero_rows = 0;  // rows zeroed by normalization
};

/// Computes the n x K spectral embedding for a spec: eigenvectors of the
/// symmetric operators, left singular vectors for CCA, and singular vectors
/// of X itself for COV.
inline EigenResult spectral_embedding(const SparseGraph& graph, const CovariateMatrix* covariates,
                                      const OperatorSpec& spec, int k, SolverConfig scfg) {
  spec.validate();
  scfg.k = k;
  const int n = graph.n_nodes();
  if (uses_covariates(spec.kind)) {
    if (covariates == nullptr) throw InputError("spectral_embedding: method requires covariates");
    if (covariates->n_nodes() != n) throw InputError("spectral_embedding: covariate rows != n_nodes");
  }

  switch (spec.kind) {
    case OperatorKind::RSC: {
      LaplacianOp lap(graph, spec.tau);
      return top_k_symmetric(
          [&](const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) {
            lap.apply(v, y);
          },
          n, scfg);
    }
    case OperatorKind::ACASC:
    case OperatorKind::CASC: {
      LaplacianOp lap(graph, spec.tau);
      const bool squared = spec.kind == OperatorKind::CASC;
      const double alpha = spec.alpha;
      EigenResult result = top_k_symmetric(
          [&, squared, alpha](const Eigen::Ref<const Eigen::VectorXd>& v,
                              Eigen::Ref<Eigen::VectorXd> y) {
            Eigen::VectorXd t(v.size());
            lap.apply(v, t);
            if (squared) {
              Eigen::VectorXd t2(v.size());
              lap.apply(t, t2);
              t = std::move(t2);
            }
            Eigen::VectorXd g(v.size());
            covariates->apply_gram(v, g);
            y = t + alpha * g;
          },
          n, scfg);
#ifndef NDEBUG
      if (squared && result.eigenvalues.size() > 0) {
        // lambda_1(LL + alpha XX^T) <= ||L||^2 + alpha lambda_1(XX^T) <= 1 + alpha lambda_1(XX^T)
        SolverConfig one = scfg;
        one.k = 1;
        const double cov_top =
            top_k_symmetric(
                [&](const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) {
                  covariates->apply_gram(v, y);
                },
                n, one)
                .eigenvalues[0];
        if (result.eigenvalues[0] > 1.0 + alpha * cov_top + 1e-8) {
          throw NumericalError("spectral_embedding: spectrum exceeds its interlacing bound");
        }
      }
#endif
      return result;
    }
    case OperatorKind::CCA: {
      if (covariates->n_covariates() < k) {
        throw InputError("spectral_embedding: CCA requires at least K covariates");
      }
      LaplacianOp lap(graph, spec.tau);
      const int r = covariates->n_covariates();
      LinearOp fwd = [&](const Eigen::Ref<const Eigen::VectorXd>& v,
                         Eigen::Ref<Eigen::VectorXd> y) {
        Eigen::VectorXd t = covariates->values * v;
        lap.apply(t, y);
      };
      LinearOp tr = [&](const Eigen::Ref<const Eigen::VectorXd>& v,
                        Eigen::Ref<Eigen::VectorXd> y) {
        Eigen::VectorXd t(v.size());
        lap.apply(v, t);
        y = covariates->values.transpose() * t;
      };
      return top_k_left_singular(fwd, tr, n, r, scfg);
    }
    case OperatorKind::COV: {
      const int r = covariates->n_covariates();
      if (r < 1) throw InputError("spectral_embedding: COV requires covariates");
      if (k > std::min(n, r)) {
        throw InputError("spectral_embedding: COV requires at least K covariates");
      }
      LinearOp fwd = [&](const Eigen::Ref<const Eigen::VectorXd>& v,
                         Eigen::Ref<Eigen::VectorXd> y) { y = covariates->values * v; };
      LinearOp tr = [&](const Eigen::Ref<const Eigen::VectorXd>& v,
                        Eigen::Ref<Eigen::VectorXd> y) { y = covariates->values.transpose() * v; };
      return top_k_left_singular(fwd, tr, n, r, scfg);
    }
  }
  throw InputError("spectral_embedding: invalid operator kind");
}

/// k-means over the rows of an embedding, with optional row normalization.
inline ClusteringResult cluster_rows(Eigen::MatrixXd embedding, const KmeansConfig& kcfg,
                                     bool normalize_rows) {
  ClusteringResult result;
  result.row_normalized = normalize_rows;
  if (normalize_rows) embedding = row_normalize(embedding, &result.zero_rows);
  KmeansResult km = kmeans(embedding, kcfg);
  result.labels = std::move(km.labels);
  result.centroids = std::move(km.centroids);
  result.wcss = km.wcss;
  return result;
}

/// The full pipeline for any operator spec: top-K spectral embedding,
/// optional row normalization, k-means with restarts. Solver non-convergence
/// is propagated through result.eigen.converged rather than thrown.
inline ClusteringResult spectral_cluster(const SparseGraph& graph,
                                         const CovariateMatrix* covariates,
                                         const OperatorSpec& spec, const KmeansConfig& kcfg,
                                         bool normalize_rows, const SolverConfig& scfg = {}) {
  EigenResult eigen = spectral_embedding(graph, covariates, spec, kcfg.k, scfg);
  ClusteringResult result = cluster_rows(eigen.eigenvectors, kcfg, normalize_rows);
  result.eigen = std::move(eigen);
  result.spec = spec;
  return result;
}

}  // namespace casc
