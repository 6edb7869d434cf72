#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "casc/covariates.hpp"
#include "casc/graph.hpp"

namespace casc {

/// Which similarity operator the spectral step diagonalizes.
enum class OperatorKind {
  RSC,    // L_tau
  ACASC,  // L_tau + alpha X X^T
  CASC,   // L_tau L_tau + alpha X X^T
  CCA,    // L_tau X (rectangular; left singular vectors)
  COV,    // X X^T (via singular vectors of X)
};

inline const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::RSC: return "rsc";
    case OperatorKind::ACASC: return "acasc";
    case OperatorKind::CASC: return "casc";
    case OperatorKind::CCA: return "cca";
    case OperatorKind::COV: return "cov";
  }
  return "?";
}

inline OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "rsc") return OperatorKind::RSC;
  if (s == "acasc") return OperatorKind::ACASC;
  if (s == "casc") return OperatorKind::CASC;
  if (s == "cca") return OperatorKind::CCA;
  if (s == "cov") return OperatorKind::COV;
  throw InputError("unknown method '" + s + "' (expected rsc|acasc|casc|cca|cov)");
}

struct OperatorSpec {
  OperatorKind kind = OperatorKind::RSC;
  double alpha = 0.0;  // ignored for RSC, CCA, COV
  double tau = 0.0;

  void validate() const {
    if (alpha < 0.0 || !std::isfinite(alpha)) throw InputError("OperatorSpec: alpha must be >= 0");
    if (tau < 0.0 || !std::isfinite(tau)) throw InputError("OperatorSpec: tau must be >= 0");
  }
};

inline bool uses_covariates(OperatorKind kind) { return kind != OperatorKind::RSC; }

/// Regularized Laplacian as a matrix-free operator: caches the inverse
/// square roots of the regularized degrees so repeated applications cost
/// O(|E| + N) each. Immutable after construction; safe to share across
/// threads.
class LaplacianOp {
public:
  LaplacianOp(const SparseGraph& graph, double tau) : graph_(&graph) {
    if (tau < 0.0) throw InputError("laplacian: tau must be >= 0");
    const Eigen::VectorXd& d = graph.degrees();
    inv_sqrt_ = Eigen::VectorXd(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double dt = d[i] + tau;
      if (dt <= 0.0) {
        throw NumericalError("laplacian: zero regularized degree at node " + std::to_string(i) +
                             " (tau = 0 with an isolated node)");
      }
      inv_sqrt_[i] = 1.0 / std::sqrt(dt);
    }
  }

  int size() const { return graph_->n_nodes(); }

  /// y = D_tau^{-1/2} A D_tau^{-1/2} v
  void apply(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) const {
    Eigen::VectorXd u = inv_sqrt_.cwiseProduct(v);
    Eigen::VectorXd w(v.size());
    graph_->apply_adjacency(u, w);
    y = inv_sqrt_.cwiseProduct(w);
  }

private:
  const SparseGraph* graph_;
  Eigen::VectorXd inv_sqrt_;
};

/// One-shot regularized Laplacian product D_tau^{-1/2} A D_tau^{-1/2} v.
inline Eigen::VectorXd laplacian_apply(const SparseGraph& graph, double tau,
                                       const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != graph.n_nodes()) throw InputError("laplacian_apply: vector length != n_nodes");
  LaplacianOp op(graph, tau);
  Eigen::VectorXd y(v.size());
  op.apply(v, y);
  return y;
}

/// Applies the selected symmetric similarity operator to v as composed
/// sparse/low-rank products (no N x N matrix is ever formed):
///   RSC    L v
///   ACASC  L v + alpha X (X^T v)
///   CASC   L (L v) + alpha X (X^T v)
///   COV    X (X^T v)
inline Eigen::VectorXd operator_apply(const OperatorSpec& spec, const SparseGraph& graph,
                                      const CovariateMatrix* covariates,
                                      const Eigen::Ref<const Eigen::VectorXd>& v) {
  spec.validate();
  if (v.size() != graph.n_nodes()) throw InputError("operator_apply: vector length != n_nodes");
  if (spec.kind == OperatorKind::CCA) {
    throw InputError("operator_apply: CCA is rectangular; use cca_apply");
  }
  if (uses_covariates(spec.kind)) {
    if (covariates == nullptr) throw InputError("operator_apply: operator requires covariates");
    if (covariates->n_nodes() != graph.n_nodes()) {
      throw InputError("operator_apply: covariate rows != n_nodes");
    }
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(v.size());
  if (spec.kind != OperatorKind::COV) {
    LaplacianOp lap(graph, spec.tau);
    lap.apply(v, y);
    if (spec.kind == OperatorKind::CASC) {
      Eigen::VectorXd y2(v.size());
      lap.apply(y, y2);
      y = std::move(y2);
    }
  }
  if (spec.kind == OperatorKind::ACASC || spec.kind == OperatorKind::CASC) {
    Eigen::VectorXd g(v.size());
    covariates->apply_gram(v, g);
    y += spec.alpha * g;
  } else if (spec.kind == OperatorKind::COV) {
    covariates->apply_gram(v, y);
  }
  return y;
}

/// Rectangular CCA operator L_tau X. Forward maps R -> N, transposed maps
/// N -> R; the pair feeds the singular-vector solver.
inline Eigen::VectorXd cca_apply(const SparseGraph& graph, double tau,
                                 const CovariateMatrix& covariates,
                                 const Eigen::Ref<const Eigen::VectorXd>& v, bool transpose) {
  LaplacianOp lap(graph, tau);
  if (!transpose) {
    if (v.size() != covariates.n_covariates()) throw InputError("cca_apply: expected length-R vector");
    Eigen::VectorXd t = covariates.values * v;
    Eigen::VectorXd y(t.size());
    lap.apply(t, y);
    return y;
  }
  if (v.size() != graph.n_nodes()) throw InputError("cca_apply: expected length-N vector");
  Eigen::VectorXd t(v.size());
  lap.apply(v, t);
  return covariates.values.transpose() * t;
}

}  // namespace casc
