#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>

#include "casc/common.hpp"

namespace casc {

/// Matrix-free symmetric operator: writes W*in into out.
using LinearOp =
    std::function<void(const Eigen::Ref<const Eigen::VectorXd>&, Eigen::Ref<Eigen::VectorXd>)>;

struct SolverConfig {
  int k = 1;
  double tol = 1e-10;
  int max_iterations = 20000;  // cap on operator applications
  int block_size = 0;          // Krylov basis size per cycle; 0 = automatic
  std::uint64_t seed = 12345;
  int dense_threshold = 600;  // n at or below which the operator is materialized and solved densely
};

/// Top-k eigenpairs (or singular triplets, for the rectangular solver) of a
/// symmetric operator. Eigenvalues are sorted descending and eigenvector
/// columns have unit norm.
struct EigenResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;    // n x k
  Eigen::VectorXd residual_norms;  // ||W u - lambda u|| per reported pair
  int iterations = 0;              // operator applications performed
  bool converged = false;
  bool dense_path = false;
  bool tie_at_k = false;  // |lambda_k - lambda_{k+1}| <= 1e-10; ties resolved by solver order
  double next_eigenvalue = std::numeric_limits<double>::quiet_NaN();  // (k+1)-th estimate, if seen
};

namespace detail {

inline Eigen::VectorXd random_unit_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

// Two-pass classical Gram-Schmidt of w against the first m columns of V.
inline void orthogonalize(const Eigen::MatrixXd& V, int m, Eigen::VectorXd& w,
                          Eigen::VectorXd* coeffs) {
  if (m == 0) {
    if (coeffs) coeffs->resize(0);
    return;
  }
  Eigen::VectorXd c = V.leftCols(m).transpose() * w;
  w.noalias() -= V.leftCols(m) * c;
  Eigen::VectorXd c2 = V.leftCols(m).transpose() * w;
  w.noalias() -= V.leftCols(m) * c2;
  if (coeffs) *coeffs = c + c2;
}

// Normalizes the reported vectors, recomputes true residuals and the tie
// diagnostic. Costs k extra operator applications.
inline void finalize_result(const LinearOp& apply, int n, EigenResult& result) {
  const int k = static_cast<int>(result.eigenvalues.size());
  result.residual_norms.resize(k);
  Eigen::VectorXd w(n);
  for (int i = 0; i < k; ++i) {
    const double norm = result.eigenvectors.col(i).norm();
    if (norm > 0.0) result.eigenvectors.col(i) /= norm;
    apply(result.eigenvectors.col(i), w);
    ++result.iterations;
    result.residual_norms[i] = (w - result.eigenvalues[i] * result.eigenvectors.col(i)).norm();
  }
  if (std::isfinite(result.next_eigenvalue) && k >= 1) {
    result.tie_at_k = std::abs(result.eigenvalues[k - 1] - result.next_eigenvalue) <= 1e-10;
  }
}

inline bool residuals_ok(const EigenResult& result, double tol) {
  for (Eigen::Index i = 0; i < result.eigenvalues.size(); ++i) {
    if (result.residual_norms[i] > tol * std::max(1.0, std::abs(result.eigenvalues[i]))) {
      return false;
    }
  }
  return true;
}

inline EigenResult dense_symmetric(const LinearOp& apply, int n, const SolverConfig& cfg) {
  Eigen::MatrixXd W(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd col(n);
  for (int i = 0; i < n; ++i) {
    e[i] = 1.0;
    apply(e, col);
    W.col(i) = col;
    e[i] = 0.0;
  }
  W = ((W + W.transpose()) * 0.5).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigendecomposition failed");

  EigenResult result;
  result.dense_path = true;
  result.converged = true;
  result.iterations = n;
  result.eigenvalues.resize(cfg.k);
  result.eigenvectors.resize(n, cfg.k);
  for (int i = 0; i < cfg.k; ++i) {
    result.eigenvalues[i] = es.eigenvalues()[n - 1 - i];
    result.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  if (cfg.k < n) result.next_eigenvalue = es.eigenvalues()[n - 1 - cfg.k];
  finalize_result(apply, n, result);
  return result;
}

}  // namespace detail

/// Computes the k algebraically largest eigenpairs of a symmetric operator.
///
/// For n <= cfg.dense_threshold the operator is materialized against the
/// identity and solved exactly (this doubles as the oracle path). Otherwise a
/// thick-restart Lanczos iteration with full (two-pass) reorthogonalization
/// runs until every reported pair satisfies
///   ||W u - lambda u|| <= tol * max(1, |lambda|),
/// verified against explicitly recomputed residuals before returning.
/// The starting vector is drawn from cfg.seed, so results are deterministic.
/// Exceeding cfg.max_iterations operator applications returns the best
/// current iterates with converged = false; it never throws for that.
inline EigenResult top_k_symmetric(const LinearOp& apply, int n, const SolverConfig& cfg) {
  if (cfg.k < 1) throw InputError("top_k_symmetric: k must be >= 1");
  if (cfg.k > n) throw InputError("top_k_symmetric: k exceeds operator dimension");
  if (!(cfg.tol > 0.0)) throw InputError("top_k_symmetric: tol must be positive");

#ifndef NDEBUG
  {
    // Probabilistic symmetry check: <x, W y> == <y, W x>.
    auto rng = make_rng(cfg.seed ^ 0xabcdefULL);
    Eigen::VectorXd x = detail::random_unit_vector(n, rng);
    Eigen::VectorXd y = detail::random_unit_vector(n, rng);
    Eigen::VectorXd wx(n), wy(n);
    apply(x, wx);
    apply(y, wy);
    const double a = x.dot(wy), b = y.dot(wx);
    if (std::abs(a - b) > 1e-8 * (1.0 + std::abs(a))) {
      throw NumericalError("top_k_symmetric: operator is not symmetric");
    }
  }
#endif

  if (n <= cfg.dense_threshold) return detail::dense_symmetric(apply, n, cfg);

  const int k = cfg.k;
  const int ncv = std::min(n, std::max({2 * k + 1, 20, cfg.block_size}));
  auto rng = make_rng(cfg.seed);

  Eigen::MatrixXd V(n, ncv + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(ncv + 1, ncv + 1);
  V.col(0) = detail::random_unit_vector(n, rng);

  int locked = 0;  // basis prefix carried over from the previous restart
  int matvecs = 0;
  bool exhausted_space = false;  // basis spans R^n; Ritz pairs are exact

  Eigen::VectorXd w(n);

  for (;;) {
    int m = locked;
    double beta = 0.0;
    // Always extend to at least k+1 vectors so a full set of pairs exists
    // even when the matvec budget runs out mid-cycle.
    while (m < ncv && (matvecs < cfg.max_iterations || m <= k)) {
      apply(V.col(m), w);
      ++matvecs;
      Eigen::VectorXd coeffs;
      detail::orthogonalize(V, m + 1, w, &coeffs);
      H.col(m).head(m + 1) = coeffs;
      H.row(m).head(m + 1) = coeffs.transpose();
      beta = w.norm();
      const double scale = std::max(1.0, coeffs.cwiseAbs().maxCoeff());
      if (beta <= 1e-14 * scale) {
        // Invariant subspace reached. Continue with a fresh random direction
        // (zero coupling) unless the basis already spans the whole space.
        beta = 0.0;
        if (m + 1 >= n) {
          exhausted_space = true;
          ++m;
          break;
        }
        Eigen::VectorXd fresh;
        double norm = 0.0;
        for (int attempt = 0; attempt < 5 && norm <= 1e-8; ++attempt) {
          fresh = detail::random_unit_vector(n, rng);
          detail::orthogonalize(V, m + 1, fresh, nullptr);
          norm = fresh.norm();
        }
        if (norm <= 1e-8) {
          exhausted_space = true;
          ++m;
          break;
        }
        V.col(m + 1) = fresh / norm;
      } else {
        V.col(m + 1) = w / beta;
      }
      H(m + 1, m) = beta;
      H(m, m + 1) = beta;
      ++m;
    }

    // Rayleigh-Ritz on the m x m projected matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(m, m));
    if (es.info() != Eigen::Success) throw NumericalError("projected eigendecomposition failed");
    const int avail = std::min(k, m);
    Eigen::VectorXd theta(avail);
    Eigen::MatrixXd s(m, avail);
    for (int i = 0; i < avail; ++i) {
      theta[i] = es.eigenvalues()[m - 1 - i];
      s.col(i) = es.eigenvectors().col(m - 1 - i);
    }
    // Coupling of each Ritz pair to the next basis vector estimates its residual.
    bool estimate_ok = (avail == k);
    for (int i = 0; i < avail && estimate_ok; ++i) {
      const double res = std::abs(beta * s(m - 1, i));
      if (res > cfg.tol * std::max(1.0, std::abs(theta[i]))) estimate_ok = false;
    }
    if (exhausted_space) estimate_ok = (avail == k);
    const bool out_of_budget = matvecs >= cfg.max_iterations;

    if (estimate_ok || exhausted_space || out_of_budget) {
      EigenResult result;
      result.eigenvalues = theta;
      result.eigenvectors = V.leftCols(m) * s;
      result.iterations = matvecs;
      if (m > avail) result.next_eigenvalue = es.eigenvalues()[m - 1 - avail];
      detail::finalize_result(apply, n, result);
      result.converged = (avail == k) && detail::residuals_ok(result, cfg.tol);
      matvecs = result.iterations;
      if (result.converged || exhausted_space || out_of_budget) return result;
      // Estimates lied (rare); fall through and keep iterating.
    }

    // Thick restart: keep the leading Ritz vectors plus the residual direction.
    const int keep = std::min(std::max(k + (ncv - k) / 2, k), m - 1);
    Eigen::MatrixXd S(m, keep);
    Eigen::VectorXd kept_theta(keep);
    for (int i = 0; i < keep; ++i) {
      kept_theta[i] = es.eigenvalues()[m - 1 - i];
      S.col(i) = es.eigenvectors().col(m - 1 - i);
    }
    Eigen::MatrixXd Y = V.leftCols(m) * S;
    V.leftCols(keep) = Y;
    V.col(keep) = V.col(m);  // residual direction continues the recurrence
    H.setZero();
    H.topLeftCorner(keep, keep) = kept_theta.asDiagonal();
    locked = keep;
  }
}

/// Top-k singular values and left singular vectors of a rectangular operator
/// B (n x r), given matrix-free forward (R^r -> R^n) and transposed
/// (R^n -> R^r) products. Solved through the symmetric operator
/// v -> forward(transposed(v)) = B B^T v whose eigenvalues are squared
/// singular values; reported eigenvalues are their nonnegative square roots.
/// Residual norms refer to the symmetric problem ||BB^T u - sigma^2 u||.
inline EigenResult top_k_left_singular(const LinearOp& forward, const LinearOp& transposed, int n,
                                       int r, const SolverConfig& cfg) {
  if (cfg.k > std::min(n, r)) throw InputError("top_k_left_singular: k exceeds min(n, r)");

  if (std::max(n, r) <= cfg.dense_threshold) {
    // Materialize B column by column and use a dense SVD (oracle path).
    Eigen::MatrixXd B(n, r);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(r);
    Eigen::VectorXd col(n);
    for (int i = 0; i < r; ++i) {
      e[i] = 1.0;
      forward(e, col);
      B.col(i) = col;
      e[i] = 0.0;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
    EigenResult result;
    result.dense_path = true;
    result.converged = true;
    result.iterations = r;
    result.eigenvalues = svd.singularValues().head(cfg.k);
    result.eigenvectors = svd.matrixU().leftCols(cfg.k);
    if (cfg.k < std::min(n, r)) result.next_eigenvalue = svd.singularValues()[cfg.k];
    result.residual_norms.resize(cfg.k);
    Eigen::VectorXd t(r), w(n);
    for (int i = 0; i < cfg.k; ++i) {
      transposed(result.eigenvectors.col(i), t);
      forward(t, w);
      const double lam = result.eigenvalues[i] * result.eigenvalues[i];
      result.residual_norms[i] = (w - lam * result.eigenvectors.col(i)).norm();
    }
    if (cfg.k >= 1 && std::isfinite(result.next_eigenvalue)) {
      result.tie_at_k = std::abs(result.eigenvalues[cfg.k - 1] - result.next_eigenvalue) <= 1e-10;
    }
    return result;
  }

  LinearOp normal_op = [&](const Eigen::Ref<const Eigen::VectorXd>& v,
                           Eigen::Ref<Eigen::VectorXd> out) {
    Eigen::VectorXd t(r);
    transposed(v, t);
    forward(t, out);
  };
  EigenResult result = top_k_symmetric(normal_op, n, cfg);
  for (Eigen::Index i = 0; i < result.eigenvalues.size(); ++i) {
    result.eigenvalues[i] = std::sqrt(std::max(0.0, result.eigenvalues[i]));
  }
  if (std::isfinite(result.next_eigenvalue)) {
    result.next_eigenvalue = std::sqrt(std::max(0.0, result.next_eigenvalue));
  }
  return result;
}

}  // namespace casc
