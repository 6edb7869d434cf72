#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "casc/kmeans.hpp"

using namespace casc;

namespace {

double wcss_of(const Eigen::MatrixXd& pts, const Eigen::VectorXi& labels,
               const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    total += (pts.row(i) - centroids.row(labels[i])).squaredNorm();
  }
  return total;
}

// Exhaustive search over every assignment of n points to 2 clusters, with
// centroids at the cluster means. Independent of the kmeans implementation.
double brute_force_best_wcss_k2(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    Eigen::RowVectorXd c0 = Eigen::RowVectorXd::Zero(pts.cols());
    Eigen::RowVectorXd c1 = Eigen::RowVectorXd::Zero(pts.cols());
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        c1 += pts.row(i);
        ++n1;
      } else {
        c0 += pts.row(i);
        ++n0;
      }
    }
    c0 /= n0;
    c1 /= n1;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += (pts.row(i) - ((mask & (1u << i)) ? c1 : c0)).squaredNorm();
    }
    best = std::min(best, total);
  }
  return best;
}

}  // namespace

TEST_CASE("row_normalize") {
  SECTION("3-4-5 row") {
    Eigen::MatrixXd u(1, 2);
    u << 3, 4;
    Eigen::MatrixXd got = row_normalize(u);
    REQUIRE_THAT(got(0, 0), Catch::Matchers::WithinAbs(0.6, 1e-15));
    REQUIRE_THAT(got(0, 1), Catch::Matchers::WithinAbs(0.8, 1e-15));
  }
  SECTION("zero rows stay zero and are counted") {
    Eigen::MatrixXd u(3, 2);
    u << 1, 0, 0, 0, 0, 2;
    int zeros = 0;
    Eigen::MatrixXd got = row_normalize(u, &zeros);
    REQUIRE(zeros == 1);
    REQUIRE(got.row(1).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("random rows have unit norm") {
    auto rng = make_rng(4);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd u(10, 3);
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 3; ++j) u(i, j) = gauss(rng);
    }
    Eigen::MatrixXd got = row_normalize(u);
    for (int i = 0; i < 10; ++i) {
      REQUIRE_THAT(got.row(i).norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("kmeans basics") {
  KmeansConfig cfg;
  cfg.seed = 314;
  SECTION("k distinct points fit exactly") {
    Eigen::MatrixXd pts(3, 2);
    pts << 0, 0, 5, 0, 0, 5;
    cfg.k = 3;
    KmeansResult r = kmeans(pts, cfg);
    REQUIRE(r.wcss < 1e-20);
    REQUIRE((r.labels[0] != r.labels[1] && r.labels[1] != r.labels[2] && r.labels[0] != r.labels[2]));
  }
  SECTION("two well-separated blobs") {
    auto rng = make_rng(99);
    std::normal_distribution<double> gauss(0.0, 0.2);
    Eigen::MatrixXd pts(100, 2);
    for (int i = 0; i < 50; ++i) pts.row(i) << gauss(rng), gauss(rng);
    for (int i = 50; i < 100; ++i) pts.row(i) << 10 + gauss(rng), 10 + gauss(rng);
    cfg.k = 2;
    KmeansResult r = kmeans(pts, cfg);
    for (int i = 1; i < 50; ++i) REQUIRE(r.labels[i] == r.labels[0]);
    for (int i = 51; i < 100; ++i) REQUIRE(r.labels[i] == r.labels[50]);
    REQUIRE(r.labels[0] != r.labels[50]);
  }
  SECTION("fewer points than clusters is an error") {
    cfg.k = 4;
    REQUIRE_THROWS_AS(kmeans(Eigen::MatrixXd::Zero(3, 2), cfg), InputError);
  }
}

TEST_CASE("kmeans reaches the exhaustive optimum on small instances") {
  auto rng = make_rng(2023);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd pts(10, 2);
    for (int i = 0; i < 10; ++i) pts.row(i) << unit(rng), unit(rng);
    KmeansConfig cfg;
    cfg.k = 2;
    cfg.n_init = 20;
    cfg.seed = 1000 + trial;
    KmeansResult r = kmeans(pts, cfg);
    const double oracle = brute_force_best_wcss_k2(pts);
    REQUIRE(r.wcss <= oracle * (1.0 + 1e-10) + 1e-12);
    REQUIRE(r.wcss >= oracle * (1.0 - 1e-10) - 1e-12);
  }
}

TEST_CASE("kmeans result is internally consistent") {
  auto rng = make_rng(77);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd pts(60, 3);
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 3; ++j) pts(i, j) = gauss(rng);
  }
  KmeansConfig cfg;
  cfg.k = 4;
  cfg.seed = 11;
  KmeansResult r = kmeans(pts, cfg);

  SECTION("wcss is recomputable from labels and centroids") {
    REQUIRE_THAT(wcss_of(pts, r.labels, r.centroids), Catch::Matchers::WithinRel(r.wcss, 1e-10));
  }
  SECTION("nonempty centroids are the means of their rows") {
    for (int c = 0; c < 4; ++c) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(3);
      int count = 0;
      for (int i = 0; i < 60; ++i) {
        if (r.labels[i] == c) {
          mean += pts.row(i);
          ++count;
        }
      }
      if (count == 0) continue;
      mean /= count;
      REQUIRE((mean - r.centroids.row(c)).norm() < 1e-10);
    }
  }
  SECTION("wcss is invariant under relabeling") {
    Eigen::VectorXi relabeled = r.labels;
    Eigen::MatrixXd permuted = r.centroids;
    // swap clusters 0 and 1
    for (Eigen::Index i = 0; i < relabeled.size(); ++i) {
      if (relabeled[i] == 0) relabeled[i] = 1;
      else if (relabeled[i] == 1) relabeled[i] = 0;
    }
    permuted.row(0) = r.centroids.row(1);
    permuted.row(1) = r.centroids.row(0);
    REQUIRE_THAT(wcss_of(pts, relabeled, permuted), Catch::Matchers::WithinRel(r.wcss, 1e-12));
  }
}

TEST_CASE("duplicate-heavy data exercises empty-cluster repair") {
  // 30 copies of each of two points, k = 3: at least one centroid starts on
  // top of another, so some Lloyd iteration must repair an empty cluster.
  Eigen::MatrixXd pts(60, 2);
  for (int i = 0; i < 30; ++i) pts.row(i) << 0, 0;
  for (int i = 30; i < 60; ++i) pts.row(i) << 1, 1;
  KmeansConfig cfg;
  cfg.k = 3;
  cfg.seed = 5;
  KmeansResult r = kmeans(pts, cfg);
  REQUIRE(r.labels.minCoeff() >= 0);
  REQUIRE(r.labels.maxCoeff() < 3);
  REQUIRE(std::isfinite(r.wcss));
  REQUIRE(r.wcss >= 0.0);
}
