#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "casc/common.hpp"

namespace casc {

struct KmeansConfig {
  int k = 2;
  int n_init = 20;  // random restarts; best (lowest wcss) wins
  int max_iter = 100;
  double tol = 1e-9;  // centroid-shift convergence
  std::uint64_t seed = 12345;
};

struct KmeansResult {
  Eigen::VectorXi labels;
  Eigen::MatrixXd centroids;  // k x d
  double wcss = 0.0;
  int iterations = 0;
};

/// Scales every row to unit Euclidean norm. Rows with norm below 1e-12 are
/// left all-zero; their count goes to *zero_rows when given.
inline Eigen::MatrixXd row_normalize(const Eigen::Ref<const Eigen::MatrixXd>& u,
                                     int* zero_rows = nullptr) {
  Eigen::MatrixXd out = u;
  int zeros = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm < 1e-12) {
      out.row(i).setZero();
      ++zeros;
    } else {
      out.row(i) /= norm;
    }
  }
  if (zero_rows) *zero_rows = zeros;
  return out;
}

namespace detail {

inline double squared_distance(const Eigen::Ref<const Eigen::MatrixXd>& pts, Eigen::Index i,
                               const Eigen::Ref<const Eigen::MatrixXd>& centroids, int c) {
  return (pts.row(i) - centroids.row(c)).squaredNorm();
}

// k-means++ seeding: first centroid uniform, the rest D^2-weighted.
inline Eigen::MatrixXd kmeanspp_init(const Eigen::Ref<const Eigen::MatrixXd>& pts, int k,
                                     std::mt19937_64& rng) {
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd centroids(k, pts.cols());
  std::uniform_int_distribution<Eigen::Index> uniform_index(0, n - 1);
  centroids.row(0) = pts.row(uniform_index(rng));
  Eigen::VectorXd best_d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    best_d2[i] = (pts.row(i) - centroids.row(0)).squaredNorm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = best_d2.sum();
    Eigen::Index chosen = 0;
    if (total <= 0.0) {
      chosen = uniform_index(rng);  // all remaining mass at existing centroids
    } else {
      double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += best_d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = pts.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      best_d2[i] = std::min(best_d2[i], (pts.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

inline KmeansResult lloyd(const Eigen::Ref<const Eigen::MatrixXd>& pts, const KmeansConfig& cfg,
                          std::uint64_t seed) {
  const Eigen::Index n = pts.rows();
  const int k = cfg.k;
  auto rng = make_rng(seed);
  Eigen::MatrixXd centroids = kmeanspp_init(pts, k, rng);
  Eigen::VectorXi labels = Eigen::VectorXi::Constant(n, -1);

  double prev_wcss = std::numeric_limits<double>::infinity();
  double wcss = prev_wcss;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    // Assignment step; ties go to the lowest centroid index.
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(pts, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(pts, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }

    // Repair empty clusters: reseed at the point farthest from its centroid.
    std::vector<Eigen::Index> counts(static_cast<size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[static_cast<size_t>(labels[i])];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<size_t>(labels[i])] <= 1) continue;  // do not empty another cluster
        const double d = squared_distance(pts, i, centroids, labels[i]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;  // n < 2k corner; leave empty
      --counts[static_cast<size_t>(labels[far])];
      labels[far] = c;
      counts[static_cast<size_t>(c)] = 1;
      centroids.row(c) = pts.row(far);
      changed = true;
    }

    // Update step.
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, pts.cols());
    for (Eigen::Index i = 0; i < n; ++i) means.row(labels[i]) += pts.row(i);
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      means.row(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);
      shift = std::max(shift, (means.row(c) - centroids.row(c)).norm());
      centroids.row(c) = means.row(c);
    }

    wcss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) wcss += squared_distance(pts, i, centroids, labels[i]);
    if (wcss > prev_wcss + 1e-9 * (1.0 + prev_wcss)) {
      throw NumericalError("kmeans: objective increased across a Lloyd iteration");
    }
    prev_wcss = wcss;
    if (!changed || shift <= cfg.tol) {
      ++iter;
      break;
    }
  }

  KmeansResult result;
  result.labels = std::move(labels);
  result.centroids = std::move(centroids);
  result.wcss = wcss;
  result.iterations = iter;
  return result;
}

}  // namespace detail

/// Lloyd's algorithm from cfg.n_init k-means++ seedings; the restart with the
/// lowest within-cluster sum of squares wins. Restart r uses the derived seed
/// (cfg.seed, r), so serial and parallel execution would agree.
inline KmeansResult kmeans(const Eigen::Ref<const Eigen::MatrixXd>& points,
                           const KmeansConfig& cfg) {
  if (cfg.k < 1) throw InputError("kmeans: k must be >= 1");
  if (cfg.n_init < 1) throw InputError("kmeans: n_init must be >= 1");
  if (points.rows() < cfg.k) throw InputError("kmeans: fewer points than clusters");

  KmeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.n_init; ++r) {
    KmeansResult run = detail::lloyd(points, cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best;
}

}  // namespace casc
