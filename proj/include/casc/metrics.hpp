#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "casc/common.hpp"

namespace casc {

namespace detail {

// Hungarian algorithm (potentials form), minimizing total cost of a perfect
// matching on an n x m cost matrix with n <= m. Returns column per row.
inline std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw InputError("hungarian: needs rows <= cols");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<size_t>(m) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[static_cast<size_t>(j)] > 0) match[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
  }
  return match;
}

inline std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace detail

/// Fraction of nodes whose estimated label disagrees with the truth under
/// the best relabeling: min over permutations pi of
/// (1/N) #{i : pi(estimated_i) != truth_i}. Exact: exhaustive permutations
/// for K <= 8, Hungarian assignment above.
inline double misclustering_rate(const Eigen::VectorXi& estimated, const Eigen::VectorXi& truth,
                                 int k) {
  if (estimated.size() != truth.size()) throw InputError("misclustering_rate: length mismatch");
  const auto n = estimated.size();
  if (n == 0) throw InputError("misclustering_rate: empty labels");
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (estimated[i] < 0 || estimated[i] >= k || truth[i] < 0 || truth[i] >= k) {
      throw InputError("misclustering_rate: label out of [0, K)");
    }
    confusion(estimated[i], truth[i]) += 1.0;
  }

  double best_agreement = -1.0;
  if (k <= 8) {
    std::vector<int> perm(static_cast<size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double agreement = 0.0;
      for (int e = 0; e < k; ++e) agreement += confusion(e, perm[static_cast<size_t>(e)]);
      best_agreement = std::max(best_agreement, agreement);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> match = detail::hungarian_min_cost(-confusion);
    best_agreement = 0.0;
    for (int e = 0; e < k; ++e) best_agreement += confusion(e, match[static_cast<size_t>(e)]);
  }
  return (static_cast<double>(n) - best_agreement) / static_cast<double>(n);
}

/// Hubert-Arabie adjusted Rand index between two partitions given as label
/// vectors. 1 for identical partitions; can be negative. Degenerate
/// denominators (both partitions trivially structured the same way) yield 1.
inline double adjusted_rand_index(const Eigen::VectorXi& labels_a, const Eigen::VectorXi& labels_b) {
  if (labels_a.size() != labels_b.size()) throw InputError("adjusted_rand_index: length mismatch");
  const auto n = labels_a.size();
  if (n < 2) throw InputError("adjusted_rand_index: needs N >= 2");
  int ka = 0, kb = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels_a[i] < 0 || labels_b[i] < 0) throw InputError("adjusted_rand_index: negative label");
    ka = std::max(ka, labels_a[i] + 1);
    kb = std::max(kb, labels_b[i] + 1);
  }
  std::vector<std::vector<std::int64_t>> table(static_cast<size_t>(ka),
                                               std::vector<std::int64_t>(static_cast<size_t>(kb), 0));
  std::vector<std::int64_t> row(static_cast<size_t>(ka), 0), col(static_cast<size_t>(kb), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    ++table[static_cast<size_t>(labels_a[i])][static_cast<size_t>(labels_b[i])];
    ++row[static_cast<size_t>(labels_a[i])];
    ++col[static_cast<size_t>(labels_b[i])];
  }
  double index = 0.0;
  for (const auto& r : table) {
    for (std::int64_t c : r) index += static_cast<double>(detail::pairs(c));
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (std::int64_t c : row) sum_a += static_cast<double>(detail::pairs(c));
  for (std::int64_t c : col) sum_b += static_cast<double>(detail::pairs(c));
  const double total = static_cast<double>(detail::pairs(n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

}  // namespace casc
