#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "casc/common.hpp"

namespace casc {

/// Dense N x R matrix of bounded node covariates together with the bound J
/// (max absolute entry after preprocessing) and flags recording what
/// preprocessing was applied.
struct CovariateMatrix {
  Eigen::MatrixXd values;  // N x R
  double bound = 1.0;      // J
  bool centered = false;
  bool scaled = false;
  std::vector<int> zero_variance_columns;  // columns left all-zero by scaling

  int n_nodes() const { return static_cast<int>(values.rows()); }
  int n_covariates() const { return static_cast<int>(values.cols()); }

  /// y = X (X^T v); the covariate similarity term used by every covariate
  /// operator. Never materializes the N x N product.
  void apply_gram(const Eigen::Ref<const Eigen::VectorXd>& v,
                  Eigen::Ref<Eigen::VectorXd> y) const {
    Eigen::VectorXd t = values.transpose() * v;
    y.noalias() = values * t;
  }
};

inline CovariateMatrix make_covariates(Eigen::MatrixXd values) {
  CovariateMatrix x;
  x.values = std::move(values);
  const double m = x.values.size() > 0 ? x.values.cwiseAbs().maxCoeff() : 0.0;
  x.bound = m > 0.0 ? m : 1.0;
  return x;
}

struct PreprocessOptions {
  bool center = false;
  bool scale = false;
  std::vector<int> categorical_columns;  // indices into the raw matrix
};

/// Expands categorical columns into one indicator column per level, then
/// optionally centers and scales. Scaling uses the N-1 sample standard
/// deviation; zero-variance columns are left all-zero and flagged.
inline CovariateMatrix preprocess_covariates(const Eigen::MatrixXd& raw,
                                             const PreprocessOptions& options) {
  const Eigen::Index n = raw.rows();
  if (!raw.allFinite()) throw InputError("preprocess_covariates: non-finite input values");
  for (int c : options.categorical_columns) {
    if (c < 0 || c >= raw.cols()) throw InputError("preprocess_covariates: bad categorical column index");
  }

  std::vector<Eigen::VectorXd> cols;
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const bool categorical = std::find(options.categorical_columns.begin(),
                                       options.categorical_columns.end(),
                                       static_cast<int>(c)) != options.categorical_columns.end();
    if (!categorical) {
      cols.emplace_back(raw.col(c));
      continue;
    }
    // Full dummy coding: one indicator per distinct level, levels in sorted order.
    std::map<double, int> levels;
    for (Eigen::Index i = 0; i < n; ++i) levels.emplace(raw(i, c), 0);
    int idx = 0;
    for (auto& kv : levels) kv.second = idx++;
    std::vector<Eigen::VectorXd> indicators(levels.size(), Eigen::VectorXd::Zero(n));
    for (Eigen::Index i = 0; i < n; ++i) indicators[levels[raw(i, c)]](i) = 1.0;
    for (auto& v : indicators) cols.emplace_back(std::move(v));
  }

  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) = cols[static_cast<size_t>(c)];

  CovariateMatrix out;
  out.centered = options.center;
  out.scaled = options.scale;
  if (options.center) {
    x.rowwise() -= x.colwise().mean();
  }
  if (options.scale) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double mean = x.col(c).mean();
      const double ss = (x.col(c).array() - mean).square().sum();
      const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
      if (sd < 1e-300) {
        x.col(c).setZero();
        out.zero_variance_columns.push_back(static_cast<int>(c));
      } else {
        x.col(c) /= sd;
      }
    }
  }
  out.values = std::move(x);
  const double m = out.values.size() > 0 ? out.values.cwiseAbs().maxCoeff() : 0.0;
  out.bound = m > 0.0 ? m : 1.0;
  return out;
}

}  // namespace casc
