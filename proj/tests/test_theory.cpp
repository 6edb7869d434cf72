#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>

#include "casc/ncsbm.hpp"
#include "casc/theory.hpp"

using namespace casc;

namespace {

constexpr double kLog2 = 0.6931471805599453;

// Independent evaluation of lambda_K(B~ P~) through dense N x K membership
// matrices, following the defining products rather than block shortcuts.
double dense_lambda_k_bp(const NcsbmParams& params, double alpha, double tau) {
  const int n = params.n_nodes;
  const int k = params.k_blocks;
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, k);
  const Eigen::VectorXi labels = params.block_labels();
  for (int i = 0; i < n; ++i) z(i, labels[i]) = 1.0;

  Eigen::MatrixXd a = z * params.B * z.transpose();
  Eigen::VectorXd deg = a.rowwise().sum();
  Eigen::MatrixXd d_tau_inv = (deg.array() + tau).inverse().matrix().asDiagonal();
  Eigen::VectorXd db = (params.B * z.transpose() * Eigen::VectorXd::Ones(n)).array() + tau;
  Eigen::MatrixXd db_inv_sqrt = db.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::MatrixXd btilde = db_inv_sqrt * params.B * z.transpose() * d_tau_inv * z * params.B *
                               db_inv_sqrt +
                           alpha * params.M * params.M.transpose();
  Eigen::MatrixXd p = z.transpose() * z;
  Eigen::MatrixXd p_sqrt = p.cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p_sqrt * btilde * p_sqrt);
  return es.eigenvalues()[0];
}

}  // namespace

TEST_CASE("block eigenvector condition") {
  SECTION("equal covariate variances make kappa zero") {
    auto [b, m] = make_design_matrices(0.2, 0.05, 0.8, 0.2, 3, 3, true);
    NcsbmParams params = make_ncsbm_params(60, 3, b, m);
    BlockConditionResult r = check_block_condition(params, 0.4, 1.0);
    REQUIRE(r.kappa == 0.0);
    REQUIRE(r.lambda_K_BP > 0.0);
    REQUIRE(r.ok);
  }
  SECTION("alpha zero reduces to positivity of the graph part") {
    auto [b, m] = make_design_matrices(0.3, 0.1, 0.9, 0.4, 3, 3, true);
    NcsbmParams params = make_ncsbm_params(60, 3, b, m);
    BlockConditionResult r = check_block_condition(params, 0.0, 1.0);
    REQUIRE(r.ok);  // B is full rank here
  }
  SECTION("unequal variances produce a positive kappa") {
    Eigen::MatrixXd m(2, 2);
    m << 0.5, 0.5, 0.9, 0.9;  // block variances 0.5 vs 0.18
    NcsbmParams params = make_ncsbm_params(40, 2, Eigen::MatrixXd::Identity(2, 2) * 0.3 +
                                                      Eigen::MatrixXd::Constant(2, 2, 0.1),
                                           m);
    // block variances 2 * 0.25 = 0.5 and 2 * 0.09 = 0.18; kappa is half the spread
    BlockConditionResult r = check_block_condition(params, 0.1, 1.0);
    REQUIRE_THAT(r.kappa, Catch::Matchers::WithinAbs((0.5 - 0.18) / 2.0, 1e-12));
  }
  SECTION("matches the dense membership-matrix evaluation") {
    auto [b, m] = make_design_matrices(0.03, 0.015, 0.8, 0.2, 3, 3, true);
    NcsbmParams params = make_ncsbm_params(300, 3, b, m);
    const double tau = population_default_tau(params);
    const double alpha = 0.0017;
    BlockConditionResult r = check_block_condition(params, alpha, tau);
    const double want = dense_lambda_k_bp(params, alpha, tau);
    REQUIRE_THAT(r.lambda_K_BP, Catch::Matchers::WithinAbs(want, 1e-10));
    REQUIRE(r.ok);
  }
}

TEST_CASE("concentration quantities") {
  auto [b, m] = make_design_matrices(0.03, 0.015, 0.8, 0.2, 3, 3, true);
  NcsbmParams params = make_ncsbm_params(1500, 3, b, m);
  SECTION("alpha zero zeroes the covariate pieces") {
    TheoryReport r = concentration_quantities(params, 0.0, 30.0, 0.05);
    REQUIRE(r.varpi == 0.0);
    REQUIRE(r.S_bound == 0.0);
    REQUIRE_THAT(r.delta, Catch::Matchers::WithinRel(12.0 / std::sqrt(r.d_min + 30.0), 1e-12));
  }
  SECTION("single node, single covariate expands by hand") {
    const double mean = 0.3;
    NcsbmParams tiny = make_ncsbm_params(1, 1, Eigen::MatrixXd::Constant(1, 1, 0.5),
                                         Eigen::MatrixXd::Constant(1, 1, mean));
    const double alpha = 0.25;
    TheoryReport r = concentration_quantities(tiny, alpha, 1.0, 0.05);
    const double want = 8.0 * alpha * alpha * (mean * (mean - mean * mean) + mean);
    REQUIRE_THAT(r.varpi, Catch::Matchers::WithinRel(want, 1e-13));
  }
  SECTION("degree condition flag is the stated inequality") {
    TheoryReport r = concentration_quantities(params, 0.001, 30.0, 0.05);
    const bool want = r.d_min + 30.0 > 3.0 * std::log(8.0 * 1500 / 0.05);
    REQUIRE(r.degree_condition == want);
    REQUIRE(r.P_max == 500);
  }
  SECTION("covariate-noise condition is alpha free") {
    TheoryReport a = concentration_quantities(params, 0.001, 30.0, 0.05);
    TheoryReport b2 = concentration_quantities(params, 17.0, 30.0, 0.05);
    REQUIRE(a.covariate_noise_condition == b2.covariate_noise_condition);
  }
}

TEST_CASE("mis-clustering rate bound") {
  SECTION("zero delta gives a zero bound") {
    REQUIRE(misclustering_bound(0.0, 3, 500, 1500, 0.2, 0.05) == 0.0);
  }
  SECTION("explicit scaling identity when N doubles") {
    const double b1 = misclustering_bound(0.5, 3, 500, 1500, 0.2, 0.05);
    const double b2 = misclustering_bound(0.5, 3, 500, 3000, 0.2, 0.05);
    const double want = b1 * 0.5 * std::log(8.0 * 3000 / 0.05) / std::log(8.0 * 1500 / 0.05);
    REQUIRE_THAT(b2, Catch::Matchers::WithinRel(want, 1e-12));
  }
  SECTION("second evaluation path in the log domain") {
    auto rng = make_rng(12);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    for (int draw = 0; draw < 100; ++draw) {
      const double delta = unit(rng) * 3.0;
      const int k = 2 + static_cast<int>(rng() % 6);
      const int p = 50 + static_cast<int>(rng() % 500);
      const int n = p * k;
      const double lam = unit(rng);
      const double eps = unit(rng) * 0.5;
      const double direct = misclustering_bound(delta, k, p, n, lam, eps);
      const double logged = std::exp(std::log(192.0) + std::log(double(k)) + std::log(double(p)) +
                                     2.0 * std::log(delta) + std::log(std::log(8.0 * n / eps)) -
                                     std::log(double(n)) - 2.0 * std::log(lam));
      REQUIRE_THAT(direct, Catch::Matchers::WithinRel(logged, 1e-12));
      // monotone: increasing in delta and P, decreasing in lambda_K
      REQUIRE(misclustering_bound(delta * 1.1, k, p, n, lam, eps) > direct);
      REQUIRE(misclustering_bound(delta, k, p + 10, n, lam, eps) > direct);
      REQUIRE(misclustering_bound(delta, k, p, n, lam * 1.1, eps) < direct);
    }
  }
  SECTION("nonpositive lambda rejected") {
    REQUIRE_THROWS_AS(misclustering_bound(0.5, 3, 500, 1500, 0.0, 0.05), InputError);
  }
  SECTION("eigengap condition flag") {
    bool flag = false;
    misclustering_bound(1e-6, 3, 500, 1500, 10.0, 0.05, &flag);
    REQUIRE(flag);
    misclustering_bound(10.0, 3, 500, 1500, 1e-6, 0.05, &flag);
    REQUIRE_FALSE(flag);
  }
}

TEST_CASE("closed-form population eigengap") {
  SECTION("no signal means zero gap") {
    REQUIRE(population_eigengap_closedform(0.02, 0.02, 0.5, 0.5, 3, 300, 3, 0.01, 6.0) == 0.0);
  }
  SECTION("alpha zero keeps only the graph term") {
    const double got = population_eigengap_closedform(0.03, 0.015, 0.8, 0.2, 3, 300, 3, 0.0, 6.0);
    const double denom = 0.03 + 2 * 0.015 + 3.0 * 6.0 / 300.0;
    REQUIRE_THAT(got, Catch::Matchers::WithinRel(std::pow(0.015 / denom, 2), 1e-14));
  }
  SECTION("matches the dense population eigengap") {
    auto [b, m] = make_design_matrices(0.03, 0.015, 0.8, 0.2, 3, 3, true);
    NcsbmParams params = make_ncsbm_params(300, 3, b, m);
    const double tau = population_default_tau(params);
    const double alpha = 0.0017;
    Eigen::MatrixXd lap = population_laplacian(params, alpha, tau);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    const double dense_gap = es.eigenvalues()(297) - es.eigenvalues()(296);
    const double closed = population_eigengap_closedform(0.03, 0.015, 0.8, 0.2, 3, 300, 3, alpha, tau);
    REQUIRE_THAT(closed, Catch::Matchers::WithinRel(dense_gap, 1e-6));
  }
}

TEST_CASE("recovery lower bound") {
  SECTION("large gamma turns the covariate-insufficiency flag off") {
    const double threshold = (0.5 - 0.05 / 2.0 - 1.0 / 1500.0) * kLog2;
    LowerBoundReport above = recovery_lower_bound(0.03, 1500, threshold + 1e-9, 0.05);
    LowerBoundReport below = recovery_lower_bound(0.03, 1500, threshold - 1e-9, 0.05);
    REQUIRE_FALSE(above.covariates_insufficient);
    REQUIRE(below.covariates_insufficient);
  }
  SECTION("epsilon near one makes the bound vacuous") {
    LowerBoundReport r = recovery_lower_bound(0.03, 1500, 0.0, 0.999999);
    REQUIRE(r.vacuous);
    REQUIRE(r.delta_threshold == 0.0);
  }
  SECTION("second evaluation path") {
    auto rng = make_rng(55);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int draw = 0; draw < 100; ++draw) {
      const double b11 = 0.01 + 0.98 * unit(rng);
      const int n = 8 + static_cast<int>(rng() % 5000);
      const double gamma = 0.2 * unit(rng);
      const double eps = 0.01 + 0.4 * unit(rng);
      LowerBoundReport r = recovery_lower_bound(b11, n, gamma, eps);
      const double brace = kLog2 / 2.0 * (1.0 - eps) - gamma - kLog2 / n;
      if (brace <= 0.0) {
        REQUIRE(r.vacuous);
        continue;
      }
      // algebraically rearranged: threshold = b(1-b) sqrt(i) / (1 + (1-b) sqrt(i))
      const double inner = 2.0 / n * brace;
      const double want = b11 * (1.0 - b11) * std::sqrt(inner) /
                          (1.0 + (1.0 - b11) * std::sqrt(inner));
      REQUIRE_THAT(r.delta_threshold, Catch::Matchers::WithinRel(want, 1e-12));
      // threshold never increases in gamma
      LowerBoundReport more = recovery_lower_bound(b11, n, gamma + 0.01, eps);
      REQUIRE(more.delta_threshold <= r.delta_threshold + 1e-15);
    }
  }
  SECTION("graph condition needs the off-diagonal probability") {
    LowerBoundReport without = recovery_lower_bound(0.03, 1500, 0.0, 0.05);
    REQUIRE_FALSE(without.graph_condition_evaluated);
    LowerBoundReport with_b12 = recovery_lower_bound(0.03, 1500, 0.0, 0.05, 0.0299);
    REQUIRE(with_b12.graph_condition_evaluated);
    REQUIRE(with_b12.graph_insufficient);  // nearly equal probabilities
    LowerBoundReport separated = recovery_lower_bound(0.6, 1500, 0.0, 0.05, 0.05);
    REQUIRE_FALSE(separated.graph_insufficient);
  }
  SECTION("domain checks") {
    REQUIRE_THROWS_AS(recovery_lower_bound(0.0, 1500, 0.0, 0.05), InputError);
    REQUIRE_THROWS_AS(recovery_lower_bound(0.5, 7, 0.0, 0.05), InputError);
  }
}

TEST_CASE("bernoulli covariate divergence") {
  SECTION("equal rows give zero") {
    Eigen::MatrixXd m(2, 3);
    m << 0.3, 0.6, 0.9, 0.3, 0.6, 0.9;
    REQUIRE(bernoulli_gamma(m) == 0.0);
  }
  SECTION("sums the per-covariate divergences") {
    auto [b, m] = make_design_matrices(0.1, 0.05, 0.8, 0.2, 2, 3, true);
    const double got = bernoulli_gamma(m);
    // direct numeric evaluation, one outcome at a time
    double want = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double a = m(0, c), q = m(1, c);
      for (double outcome : {1.0, 0.0}) {
        const double pa = outcome == 1.0 ? a : 1.0 - a;
        const double pq = outcome == 1.0 ? q : 1.0 - q;
        want += pa * std::log(pa / pq);
      }
    }
    REQUIRE_THAT(got, Catch::Matchers::WithinRel(want, 1e-13));
    // per-covariate value for the 0.8 / 0.2 pair is 0.6 log 4
    REQUIRE_THAT(got, Catch::Matchers::WithinRel(3.0 * 0.6 * std::log(4.0), 1e-12));
  }
  SECTION("second-order behavior for nearby probabilities") {
    const double base = 0.37, tiny = 1e-4;
    Eigen::MatrixXd m(2, 1);
    m << base + tiny, base;
    const double got = bernoulli_gamma(m);
    const double taylor = tiny * tiny / (2.0 * base * (1.0 - base));
    REQUIRE(std::abs(got - taylor) <= 0.1 * taylor);
  }
  SECTION("boundary probabilities report infinity") {
    Eigen::MatrixXd m(2, 1);
    m << 1.0, 0.5;
    REQUIRE(std::isinf(bernoulli_gamma(m)));
  }
  SECTION("restricted to two blocks") {
    REQUIRE_THROWS_AS(bernoulli_gamma(Eigen::MatrixXd::Constant(3, 2, 0.5)), InputError);
  }
  SECTION("nonnegative on random rows") {
    auto rng = make_rng(31);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (int draw = 0; draw < 50; ++draw) {
      Eigen::MatrixXd m(2, 4);
      for (int c = 0; c < 4; ++c) {
        m(0, c) = unit(rng);
        m(1, c) = unit(rng);
      }
      REQUIRE(bernoulli_gamma(m) >= 0.0);
    }
  }
}

TEST_CASE("combined theory report") {
  auto [b, m] = make_design_matrices(0.03, 0.015, 0.8, 0.2, 3, 3, true);
  NcsbmParams params = make_ncsbm_params(1500, 3, b, m);
  const double tau = population_default_tau(params);
  TheoryReport r = theory_report(params, 0.0003, tau, 0.05);
  REQUIRE(r.block_condition_ok);
  REQUIRE(r.lambda_K_source == "population_closed_form");
  REQUIRE(r.lambda_K > 0.0);
  REQUIRE(r.bound_value > 0.0);
  SECTION("unequal blocks fall back to the dense eigengap") {
    NcsbmParams uneven = make_ncsbm_params(90, 3, b, m, {50, 25, 15});
    TheoryReport r2 = theory_report(uneven, 0.001, population_default_tau(uneven), 0.05);
    REQUIRE(r2.lambda_K_source == "population_dense");
    REQUIRE(r2.lambda_K > 0.0);
  }
}
