#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <sstream>

#include "casc/graph.hpp"
#include "casc/io.hpp"
#include "casc/ncsbm.hpp"
#include "casc/operators.hpp"

using namespace casc;

namespace {

// Dense reference adjacency built independently of SparseGraph's storage.
Eigen::MatrixXd dense_adjacency(const std::vector<Edge>& edges, int n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : edges) {
    a(e.i, e.j) += e.weight;
    if (e.i != e.j) a(e.j, e.i) += e.weight;
  }
  return a;
}

}  // namespace

TEST_CASE("build_graph basics") {
  SECTION("single edge") {
    SparseGraph g = build_graph({{0, 1, 1.0}}, 3);
    REQUIRE(g.degrees()[0] == 1.0);
    REQUIRE(g.degrees()[1] == 1.0);
    REQUIRE(g.degrees()[2] == 0.0);
    REQUIRE(g.n_edges() == 1);
  }
  SECTION("duplicate entries are summed") {
    SparseGraph g = build_graph({{0, 1, 1.0}, {1, 0, 1.0}}, 2);
    REQUIRE(g.degrees()[0] == 2.0);
    REQUIRE(g.degrees()[1] == 2.0);
  }
  SECTION("empty edge list") {
    SparseGraph g = build_graph({}, 5);
    REQUIRE(g.degrees().sum() == 0.0);
  }
  SECTION("self-loop counted once in the degree") {
    SparseGraph g = build_graph({{2, 2, 3.0}, {0, 1, 1.0}}, 3);
    REQUIRE(g.degrees()[2] == 3.0);
    REQUIRE(g.adjacency().coeff(2, 2) == 3.0);
  }
  SECTION("errors") {
    REQUIRE_THROWS_AS(build_graph({{0, 3, 1.0}}, 3), InputError);
    REQUIRE_THROWS_AS(build_graph({{0, 1, -1.0}}, 3), InputError);
  }
}

TEST_CASE("graph structure matches a dense reference on random edge lists") {
  auto rng = make_rng(7);
  std::uniform_int_distribution<int> node(0, 19);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Edge> edges;
    const int m = 1 + static_cast<int>(rng() % 60);
    for (int e = 0; e < m; ++e) edges.push_back({node(rng), node(rng), weight(rng)});
    SparseGraph g = build_graph(edges, 20);
    Eigen::MatrixXd ref = dense_adjacency(edges, 20);
    Eigen::MatrixXd got = Eigen::MatrixXd(g.adjacency());
    REQUIRE((got - ref).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE((got - got.transpose()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((g.degrees() - ref.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("default_tau") {
  SECTION("arithmetic mean of degrees") {
    SparseGraph g = build_graph({{0, 1, 1.0}, {1, 2, 1.0}}, 3);
    REQUIRE_THAT(default_tau(g), Catch::Matchers::WithinAbs(4.0 / 3.0, 1e-15));
  }
  SECTION("empty graph") {
    REQUIRE(default_tau(build_graph({}, 5)) == 0.0);
  }
  SECTION("block-model sample mean degree approximately N(p+2q)/3") {
    // Monte-Carlo oracle: mean of default_tau over 100 independent samples.
    auto [b, m] = make_design_matrices(0.03, 0.015, 0.8, 0.2, 3, 3, true);
    NcsbmParams params = make_ncsbm_params(1500, 3, b, m);
    double mean_tau = 0.0;
    const int samples = 100;
    for (int s = 0; s < samples; ++s) mean_tau += default_tau(sample_ncsbm(params, 900 + s).graph);
    mean_tau /= samples;
    const double expected = 1500.0 * (0.03 + 2 * 0.015) / 3.0;
    REQUIRE(std::abs(mean_tau - expected) < 0.05 * expected);
  }
}

TEST_CASE("edge list text format") {
  SECTION("comments, blank lines, default weight") {
    std::istringstream in("# header\n0 1\n\n1 2 0.5\n  # indented comment\n2 0 2\n");
    EdgeList list = read_edge_list(in);
    REQUIRE(list.edges.size() == 3);
    REQUIRE(list.max_node == 2);
    REQUIRE(list.edges[0].weight == 1.0);
    REQUIRE(list.edges[1].weight == 0.5);
  }
  SECTION("bad lines rejected") {
    std::istringstream one_token("0\n");
    REQUIRE_THROWS_AS(read_edge_list(one_token), InputError);
    std::istringstream negative("0 -1\n");
    REQUIRE_THROWS_AS(read_edge_list(negative), InputError);
    std::istringstream trailing("0 1 1.0 junk\n");
    REQUIRE_THROWS_AS(read_edge_list(trailing), InputError);
  }
}

TEST_CASE("covariate preprocessing") {
  SECTION("dummy coding one column per level") {
    Eigen::MatrixXd raw(3, 1);
    raw << 0, 1, 2;  // three levels, one row each
    PreprocessOptions options;
    options.categorical_columns = {0};
    CovariateMatrix x = preprocess_covariates(raw, options);
    REQUIRE(x.n_covariates() == 3);
    REQUIRE(x.values.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  }
  SECTION("center and scale uses the N-1 standard deviation") {
    Eigen::MatrixXd raw(3, 1);
    raw << 1, 2, 3;
    PreprocessOptions options;
    options.center = true;
    options.scale = true;
    CovariateMatrix x = preprocess_covariates(raw, options);
    Eigen::VectorXd expected(3);
    expected << -1, 0, 1;  // sample sd of (1,2,3) is exactly 1
    REQUIRE((x.values.col(0) - expected).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(x.bound == 1.0);
  }
  SECTION("constant column survives scaling as all-zero, flagged") {
    Eigen::MatrixXd raw(4, 2);
    raw << 1, 5, 2, 5, 3, 5, 4, 5;
    PreprocessOptions options;
    options.scale = true;
    CovariateMatrix x = preprocess_covariates(raw, options);
    REQUIRE(x.values.col(1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(x.zero_variance_columns == std::vector<int>{1});
  }
  SECTION("non-finite input rejected") {
    Eigen::MatrixXd raw(2, 1);
    raw << 1.0, std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(preprocess_covariates(raw, {}), InputError);
  }
}

TEST_CASE("covariate CSV table") {
  SECTION("round trip with categorical declaration") {
    std::istringstream in("node_id,age,group\n1,2.5,b\n0,1.5,a\n2,3.5,a\n");
    CovariateTable table = read_covariates_csv(in);
    REQUIRE(table.names == std::vector<std::string>{"age", "group"});
    CovariateMatrix x = covariates_from_table(table, {"group"}, false, false);
    REQUIRE(x.n_covariates() == 3);  // age + two group levels
    REQUIRE(x.values(0, 0) == 1.5);  // rows sorted by node_id
    REQUIRE(x.values(1, 2) == 1.0);  // node 1 is level "b"
  }
  SECTION("numeric parse failure points at --categorical") {
    std::istringstream in("node_id,group\n0,a\n1,b\n");
    CovariateTable table = read_covariates_csv(in);
    REQUIRE_THROWS_AS(covariates_from_table(table, {}, false, false), InputError);
  }
  SECTION("node ids must cover the range") {
    std::istringstream in("node_id,x\n0,1\n0,2\n");
    REQUIRE_THROWS_AS(read_covariates_csv(in), InputError);
  }
}
