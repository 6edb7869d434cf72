#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "casc/common.hpp"
#include "casc/ncsbm.hpp"

namespace casc {

/// Computable quantities from the concentration and mis-clustering theorems.
struct TheoryReport {
  double kappa = 0.0;         // max covariate-variance imbalance across blocks
  double lambda_K_BP = 0.0;   // K-th eigenvalue of B~ P~
  bool block_condition_ok = false;     // lambda_K(B~ P~) > 2 alpha kappa
  double d_min = 0.0;         // minimum population degree
  double varpi = 0.0;
  double S_bound = 0.0;       // 3 alpha N J^2
  double delta = 0.0;         // 12 (d + tau)^{-1/2} + varpi^{1/2}
  double lambda_K = 0.0;      // K-th eigenvalue fed to the rate bound
  std::string lambda_K_source;  // "population_closed_form" | "population_dense" | "sample"
  int P_max = 0;              // largest block size
  double bound_value = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  bool degree_condition = false;   // d + tau > 3 log(8N/eps)
  bool covariate_noise_condition = false;  // varpi / S^2 > 3 log(8N/eps)
  bool eigengap_condition = false;   // delta sqrt(3 log(8N/eps)) <= lambda_K / 2
};

struct LowerBoundReport {
  double gamma = 0.0;            // summed KL divergence of the covariates
  double delta_threshold = 0.0;  // required separation B11 - B12
  bool vacuous = false;          // nonpositive inner brace; threshold reported as 0
  bool graph_insufficient = false;       // Remark condition on the graph; needs b12
  bool graph_condition_evaluated = false;
  bool covariates_insufficient = false;  // Gamma < (1/2 - eps/2 - 1/N) log 2
  bool gamma_infinite = false;           // a KL term hit a {0,1} boundary
};

struct BlockConditionResult {
  double kappa = 0.0;
  double lambda_K_BP = 0.0;
  bool ok = false;
};

/// Checks the eigenvector/block-membership equivalence condition
/// lambda_K(B~ P~) > 2 alpha kappa on the population quantities, where
///   B~ = D_B^{-1/2} B Z^T (D + tau I)^{-1} Z B D_B^{-1/2} + alpha M M^T,
///   D_B = diag(B Z^T 1 + tau),  P~ = Z^T Z,
/// and kappa is the largest deviation of a block's summed covariate variance
/// from the across-block mean.
inline BlockConditionResult check_block_condition(const NcsbmParams& params, double alpha, double tau) {
  params.validate();
  if (params.n_nodes > 2000) throw InputError("check_block_condition: N > 2000 (population guard)");
  const int k = params.k_blocks;
  Eigen::VectorXd sizes(k);
  for (int b = 0; b < k; ++b) sizes[b] = params.block_sizes[static_cast<size_t>(b)];

  // Block degrees d_b = sum_c B_bc n_c; all nodes in a block share them.
  Eigen::VectorXd block_degree = params.B * sizes;
  Eigen::VectorXd db_inv_sqrt(k), zdz(k);
  for (int b = 0; b < k; ++b) {
    const double reg = block_degree[b] + tau;
    if (reg <= 0.0) throw NumericalError("check_block_condition: zero regularized degree");
    db_inv_sqrt[b] = 1.0 / std::sqrt(reg);
    zdz[b] = sizes[b] / reg;  // (Z^T (D + tau I)^{-1} Z)_bb
  }
  Eigen::MatrixXd btilde = db_inv_sqrt.asDiagonal() * params.B * zdz.asDiagonal() * params.B *
                               db_inv_sqrt.asDiagonal() +
                           alpha * params.M * params.M.transpose();

  // lambda_K(B~ P~) through the symmetric similarity P~^{1/2} B~ P~^{1/2}.
  Eigen::VectorXd p_sqrt = sizes.cwiseSqrt();
  Eigen::MatrixXd sym = p_sqrt.asDiagonal() * btilde * p_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("check_block_condition: eigendecomposition failed");

  Eigen::VectorXd block_var(k);
  for (int b = 0; b < k; ++b) {
    double v = 0.0;
    for (int c = 0; c < params.n_covariates(); ++c) {
      const double m = params.M(b, c);
      v += m * (1.0 - m);
    }
    block_var[b] = v;
  }
  const double mean_var = block_var.mean();

  BlockConditionResult result;
  result.kappa = (block_var.array() - mean_var).abs().maxCoeff();
  result.lambda_K_BP = es.eigenvalues()[0];  // smallest of the K eigenvalues
  result.ok = result.lambda_K_BP > 2.0 * alpha * result.kappa;
  return result;
}

/// Concentration-theorem quantities for Bernoulli covariates:
///   varpi = 8 alpha^2 sum_k sum_i [ chi_ik^(2) * sum_l (chi_lk^(2) - chi_lk^2) + chi_ik^(4) ]
/// with all Bernoulli moments chi^(p) equal to the mean, S = 3 alpha N J^2
/// (J = 1), and delta = 12 (d + tau)^{-1/2} + varpi^{1/2}. Conditions (ii)
/// and (iii) are evaluated exactly as stated; the ratio varpi / S^2 is
/// alpha-free, so condition (iii) is well-defined at alpha = 0.
inline TheoryReport concentration_quantities(const NcsbmParams& params, double alpha, double tau,
                                        double epsilon) {
  params.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("concentration: epsilon must lie in (0, 1)");
  const int k = params.k_blocks;
  const int r = params.n_covariates();
  const int n = params.n_nodes;

  TheoryReport report;
  report.epsilon = epsilon;

  Eigen::VectorXd sizes(k);
  for (int b = 0; b < k; ++b) sizes[b] = params.block_sizes[static_cast<size_t>(b)];
  Eigen::VectorXd block_degree = params.B * sizes;
  report.d_min = block_degree.minCoeff();
  report.P_max = *std::max_element(params.block_sizes.begin(), params.block_sizes.end());

  // Column sums over nodes reduce to block-size-weighted sums over M rows.
  double varpi_core = 0.0;  // varpi / (8 alpha^2)
  for (int c = 0; c < r; ++c) {
    double col_var = 0.0;  // sum_l (chi_lc^(2) - chi_lc^2)
    for (int b = 0; b < k; ++b) {
      const double m = params.M(b, c);
      col_var += sizes[b] * (m - m * m);
    }
    for (int b = 0; b < k; ++b) {
      const double m = params.M(b, c);
      varpi_core += sizes[b] * (m * col_var + m);
    }
  }
  report.varpi = 8.0 * alpha * alpha * varpi_core;
  report.S_bound = 3.0 * alpha * n;  // J = 1 for Bernoulli covariates
  report.delta = 12.0 / std::sqrt(report.d_min + tau) + std::sqrt(report.varpi);

  const double log_term = 3.0 * std::log(8.0 * n / epsilon);
  report.degree_condition = report.d_min + tau > log_term;
  report.covariate_noise_condition = varpi_core > 0.0 ? (8.0 * varpi_core) / (9.0 * double(n) * n) > log_term
                                          : true;
  return report;
}

/// Mis-clustering rate bound c0 K P delta^2 log(8N/eps) / (N lambda_K^2)
/// with c0 = 192, plus the eigengap condition (iv).
inline double misclustering_bound(double delta, int k, int p_max, int n, double lambda_k,
                             double epsilon, bool* eigengap_condition = nullptr) {
  if (!(lambda_k > 0.0)) throw InputError("misclustering_bound: lambda_K must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("misclustering_bound: epsilon in (0, 1)");
  constexpr double c0 = 192.0;  // 3 * 2^6
  const double log_term = std::log(8.0 * n / epsilon);
  if (eigengap_condition) {
    *eigengap_condition = delta * std::sqrt(3.0 * log_term) <= lambda_k / 2.0;
  }
  return c0 * k * p_max * delta * delta * log_term / (n * lambda_k * lambda_k);
}

/// Closed-form population eigengap under the equal-block design:
///   {(p-q) / (p + (K-1) q + K tau / N)}^2 + alpha N R (m1 - m2)^2 / K^2.
inline double population_eigengap_closedform(double p, double q, double m1, double m2, int k,
                                             int n, int r, double alpha, double tau) {
  const double denom = p + (k - 1) * q + static_cast<double>(k) * tau / n;
  if (denom <= 0.0) throw InputError("population_eigengap_closedform: zero denominator");
  const double graph_term = (p - q) / denom;
  return graph_term * graph_term +
         alpha * static_cast<double>(n) * r * (m1 - m2) * (m1 - m2) / (static_cast<double>(k) * k);
}

/// Required block-probability separation for recovery with probability
/// 1 - epsilon, plus the two insufficiency conditions. A nonpositive inner
/// brace makes the bound vacuous (threshold 0, flagged). The graph condition
/// needs B12; when absent it is reported unevaluated.
inline LowerBoundReport recovery_lower_bound(double b11, int n, double gamma, double epsilon,
                                             std::optional<double> b12 = std::nullopt) {
  if (!(b11 > 0.0 && b11 < 1.0)) throw InputError("recovery_lower_bound: B11 must lie in (0, 1)");
  if (n < 8) throw InputError("recovery_lower_bound: requires N >= 8");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("recovery_lower_bound: epsilon in (0, 1)");
  if (gamma < 0.0) throw InputError("recovery_lower_bound: Gamma must be >= 0");

  constexpr double log2 = 0.6931471805599453094172321214581766;
  LowerBoundReport report;
  report.gamma = gamma;
  report.gamma_infinite = std::isinf(gamma);

  const double brace = 0.5 * log2 * (1.0 - epsilon) - gamma - log2 / n;
  const double inner = (2.0 / n) * brace;
  if (inner <= 0.0) {
    report.vacuous = true;
    report.delta_threshold = 0.0;
  } else {
    report.delta_threshold = b11 * (1.0 - b11) / (1.0 / std::sqrt(inner) + (1.0 - b11));
  }

  report.covariates_insufficient = gamma < (0.5 - epsilon / 2.0 - 1.0 / n) * log2;

  if (b12.has_value()) {
    report.graph_condition_evaluated = true;
    const double base = (1.0 - epsilon - 2.0 / n) * log2;
    if (base > 0.0) {
      const double rhs =
          b11 * (1.0 - b11) / std::sqrt(static_cast<double>(n)) / (1.0 / std::sqrt(base) + (1.0 - b11));
      report.graph_insufficient = (b11 - *b12) < rhs;
    } else {
      report.graph_insufficient = false;
    }
  }
  return report;
}

/// Summed KL divergence of Bernoulli covariates between the two blocks,
/// using the block-1 branch KL(a || b) = a log(a/b) + (1-a) log((1-a)/(1-b)).
/// Entries at 0 or 1 make a term infinite; reported as +inf.
inline double bernoulli_gamma(const Eigen::MatrixXd& m) {
  if (m.rows() != 2) throw InputError("bernoulli_gamma: restricted to K = 2 blocks");
  double gamma = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double a = m(0, c);
    const double b = m(1, c);
    if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) {
      throw InputError("bernoulli_gamma: entries must lie in [0, 1]");
    }
    if (a == b) continue;  // zero divergence, even at the boundary
    if (a <= 0.0 || a >= 1.0 || b <= 0.0 || b >= 1.0) {
      return std::numeric_limits<double>::infinity();
    }
    gamma += a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  }
  return gamma;
}

/// Everything the `bounds` command reports: Lemma-1 check, concentration
/// quantities, and the rate bound with lambda_K from the population closed
/// form (equal blocks) or the dense population operator otherwise.
inline TheoryReport theory_report(const NcsbmParams& params, double alpha, double tau,
                                  double epsilon) {
  TheoryReport report = concentration_quantities(params, alpha, tau, epsilon);
  const BlockConditionResult block = check_block_condition(params, alpha, tau);
  report.kappa = block.kappa;
  report.lambda_K_BP = block.lambda_K_BP;
  report.block_condition_ok = block.ok;

  // Equal blocks + the tiled design pattern admit the closed form; otherwise
  // take the dense population eigengap.
  const int k = params.k_blocks;
  const int r = params.n_covariates();
  bool closed_form_ok = params.n_nodes % k == 0;
  for (int b = 0; b < k && closed_form_ok; ++b) {
    closed_form_ok = params.block_sizes[static_cast<size_t>(b)] == params.n_nodes / k;
  }
  double p = params.B(0, 0), q = k > 1 ? params.B(0, 1) : params.B(0, 0);
  double m1 = params.M(0, 0), m2 = r > 1 ? params.M(0, 1) : params.M(0, 0);
  if (closed_form_ok) {
    auto [b_ref, m_ref] = make_design_matrices(std::clamp(p, 0.0, 1.0), std::clamp(q, 0.0, 1.0),
                                               std::clamp(m1, 0.0, 1.0), std::clamp(m2, 0.0, 1.0),
                                               k, r, true);
    closed_form_ok = b_ref.isApprox(params.B, 1e-12) && m_ref.isApprox(params.M, 1e-12);
  }
  if (closed_form_ok) {
    report.lambda_K =
        population_eigengap_closedform(p, q, m1, m2, k, params.n_nodes, r, alpha, tau);
    report.lambda_K_source = "population_closed_form";
  } else {
    Eigen::MatrixXd pop = population_laplacian(params, alpha, tau);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pop);
    const Eigen::Index n = pop.rows();
    report.lambda_K = es.eigenvalues()[n - k] - (n - k - 1 >= 0 ? es.eigenvalues()[n - k - 1] : 0.0);
    report.lambda_K_source = "population_dense";
  }
  if (report.lambda_K > 0.0) {
    bool iv = false;
    report.bound_value = misclustering_bound(report.delta, k, report.P_max, params.n_nodes,
                                        report.lambda_K, epsilon, &iv);
    report.eigengap_condition = iv;
  }
  return report;
}

}  // namespace casc
