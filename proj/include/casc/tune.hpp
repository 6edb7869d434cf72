#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "casc/cluster.hpp"
#include "casc/covariates.hpp"
#include "casc/eigensolve.hpp"
#include "casc/graph.hpp"
#include "casc/operators.hpp"

namespace casc {

struct TuningGridPoint {
  double alpha = 0.0;
  double wcss = 0.0;
  bool solver_converged = false;
  bool ok = false;  // excluded from the argmin when false
  std::string error;
};

struct TuningResult {
  double alpha_star = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double alpha_init = 0.0;  // the balance point lambda_1(LL)/lambda_1(XX^T)
  bool alpha_max_unbounded = false;
  std::vector<TuningGridPoint> grid;
  Eigen::VectorXd laplacian_sq_spectrum;  // graph-part spectrum (L_tau L_tau; L_tau for acasc)
  Eigen::VectorXd covariate_spectrum;     // top max(R, K+1) eigenvalues of X X^T
};

inline EigenResult laplacian_squared_spectrum(const SparseGraph& graph, double tau, int k,
                                              SolverConfig scfg = {}) {
  LaplacianOp lap(graph, tau);
  scfg.k = k;
  return top_k_symmetric(
      [&](const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) {
        Eigen::VectorXd t(v.size());
        lap.apply(v, t);
        lap.apply(t, y);
      },
      graph.n_nodes(), scfg);
}

inline EigenResult laplacian_spectrum(const SparseGraph& graph, double tau, int k,
                                      SolverConfig scfg = {}) {
  LaplacianOp lap(graph, tau);
  scfg.k = k;
  return top_k_symmetric(
      [&](const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) {
        lap.apply(v, y);
      },
      graph.n_nodes(), scfg);
}

inline EigenResult covariate_gram_spectrum(const CovariateMatrix& covariates, int k,
                                           SolverConfig scfg = {}) {
  scfg.k = k;
  return top_k_symmetric(
      [&](const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Ref<Eigen::VectorXd> y) {
        covariates.apply_gram(v, y);
      },
      covariates.n_nodes(), scfg);
}

/// Balance point for the tuning parameter: the alpha at which the leading
/// eigenvalues of L_tau L_tau and alpha X X^T are equal.
inline double alpha_init(const SparseGraph& graph, const CovariateMatrix& covariates, double tau,
                         SolverConfig scfg = {}) {
  scfg.k = 1;
  const double lap_top = laplacian_squared_spectrum(graph, tau, 1, scfg).eigenvalues[0];
  const double cov_top = covariate_gram_spectrum(covariates, 1, scfg).eigenvalues[0];
  if (!(cov_top > 0.0)) throw InputError("alpha_init: covariates are all zero");
  return std::max(0.0, lap_top) / cov_top;
}

struct AlphaRange {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  bool unbounded_above = false;  // zero denominator; alpha_max was substituted with 10 * alpha_0
};

namespace detail {

inline AlphaRange alpha_range_from_spectra(const Eigen::VectorXd& lap_sq,
                                           const Eigen::VectorXd& cov, int n_covariates, int k) {
  const double lambda1_x = cov[0];
  if (!(lambda1_x > 0.0)) throw InputError("alpha_range: covariates are all zero");
  const double lambda1_l = std::max(0.0, lap_sq[0]);
  const double alpha0 = lambda1_l / lambda1_x;

  AlphaRange range;
  const double gap_l = std::max(0.0, lap_sq[k - 1] - lap_sq[k]);
  range.alpha_min = gap_l / lambda1_x;

  double denom;
  if (n_covariates <= k) {
    denom = cov[n_covariates - 1];
  } else {
    denom = cov[k - 1] - cov[k];
  }
  denom = std::max(0.0, denom);
  if (denom <= 1e-12 * lambda1_x) {
    range.unbounded_above = true;
    range.alpha_max = 10.0 * alpha0;
  } else {
    range.alpha_max = lambda1_l / denom;
  }
  range.alpha_max = std::max(range.alpha_max, range.alpha_min);
  return range;
}

}  // namespace detail

/// The interval of alpha values over which the leading eigenspace of the
/// CASC operator can change discontinuously; the search for alpha is
/// restricted to it.
inline AlphaRange alpha_range(const SparseGraph& graph, const CovariateMatrix& covariates,
                              double tau, int k, SolverConfig scfg = {}) {
  const int n = graph.n_nodes();
  if (k < 1) throw InputError("alpha_range: K must be >= 1");
  if (k + 1 > n) throw InputError("alpha_range: needs K + 1 <= N");
  const int r = covariates.n_covariates();
  const Eigen::VectorXd lap_sq = laplacian_squared_spectrum(graph, tau, k + 1, scfg).eigenvalues;
  const int kx = std::min(n, std::max(r, k + 1));
  const Eigen::VectorXd cov = covariate_gram_spectrum(covariates, kx, scfg).eigenvalues;
  return detail::alpha_range_from_spectra(lap_sq, cov, r, k);
}

/// Chooses alpha by minimizing the k-means objective of the clustering over
/// a geometric grid spanning [max(alpha_min, 1e-4 alpha_0), alpha_max]. The
/// grid always contains both endpoints and alpha_0; when alpha_min is exactly
/// zero, alpha = 0 is evaluated as an extra point. The same k-means seed is
/// used at every grid point so wcss differences reflect alpha only. Grid
/// points whose solve fails are recorded and excluded from the argmin.
///
/// `kind` selects which covariate-assisted operator is being tuned: CASC
/// (the default; interval computed from the L_tau L_tau spectrum exactly as
/// the formulas state) or ACASC (the degree-one analog, with L_tau taking
/// the place of L_tau L_tau and the objective evaluated on the ACASC
/// embedding).
inline TuningResult tune_alpha(const SparseGraph& graph, const CovariateMatrix& covariates,
                               double tau, int k, const KmeansConfig& kcfg, int grid_size = 20,
                               SolverConfig scfg = {}, OperatorKind kind = OperatorKind::CASC) {
  if (grid_size < 2) throw InputError("tune_alpha: grid_size must be >= 2");
  if (kind != OperatorKind::CASC && kind != OperatorKind::ACASC) {
    throw InputError("tune_alpha: only casc and acasc take a tuning parameter");
  }
  const int n = graph.n_nodes();
  if (k + 1 > n) throw InputError("tune_alpha: needs K + 1 <= N");
  const int r = covariates.n_covariates();

  TuningResult result;
  {
    const EigenResult graph_part =
        kind == OperatorKind::CASC ? laplacian_squared_spectrum(graph, tau, std::min(n, k + 1), scfg)
                                   : laplacian_spectrum(graph, tau, std::min(n, k + 1), scfg);
    const int kx = std::min(n, std::max(r, k + 1));
    const EigenResult cov = covariate_gram_spectrum(covariates, kx, scfg);
    result.laplacian_sq_spectrum = graph_part.eigenvalues;
    result.covariate_spectrum = cov.eigenvalues;
  }
  const double lambda1_x = result.covariate_spectrum[0];
  if (!(lambda1_x > 0.0)) throw InputError("tune_alpha: covariates are all zero");
  const double alpha0 = std::max(0.0, result.laplacian_sq_spectrum[0]) / lambda1_x;
  result.alpha_init = alpha0;

  const AlphaRange range =
      detail::alpha_range_from_spectra(result.laplacian_sq_spectrum, result.covariate_spectrum,
                                       r, k);
  result.alpha_min = range.alpha_min;
  result.alpha_max = range.alpha_max;
  result.alpha_max_unbounded = range.unbounded_above;

  // Geometric grid; a zero lower endpoint is replaced by 1e-4 * alpha_0 to
  // keep the spacing well-defined, with alpha = 0 kept as an extra point.
  std::vector<double> alphas;
  double lo = std::max(range.alpha_min, 1e-4 * alpha0);
  double hi = range.alpha_max;
  const bool zero_lower = range.alpha_min <= 0.0;
  if (hi <= 0.0) {
    alphas.push_back(0.0);
  } else {
    if (lo <= 0.0) lo = hi * 1e-8;
    if (lo > hi) lo = hi;
    for (int i = 0; i < grid_size; ++i) {
      const double t = grid_size == 1 ? 0.0 : static_cast<double>(i) / (grid_size - 1);
      alphas.push_back(lo * std::pow(hi / lo, t));
    }
    if (alpha0 >= lo && alpha0 <= hi) alphas.push_back(alpha0);
    if (zero_lower) alphas.push_back(0.0);
  }
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end(),
                           [](double a, double b) {
                             return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
                           }),
               alphas.end());

  double best_wcss = std::numeric_limits<double>::infinity();
  double best_alpha = alphas.front();
  bool any_ok = false;
  for (double alpha : alphas) {
    TuningGridPoint point;
    point.alpha = alpha;
    try {
      OperatorSpec spec{kind, alpha, tau};
      ClusteringResult cr = spectral_cluster(graph, &covariates, spec, kcfg, false, scfg);
      point.wcss = cr.wcss;
      point.solver_converged = cr.eigen.converged;
      point.ok = cr.eigen.converged;
      if (!cr.eigen.converged) point.error = "eigensolver did not converge";
    } catch (const std::exception& e) {
      point.ok = false;
      point.error = e.what();
    }
    if (point.ok && point.wcss < best_wcss) {
      best_wcss = point.wcss;
      best_alpha = alpha;
      any_ok = true;
    }
    result.grid.push_back(std::move(point));
  }
  if (!any_ok) throw NumericalError("tune_alpha: every grid point failed");
  result.alpha_star = best_alpha;
  return result;
}

}  // namespace casc
