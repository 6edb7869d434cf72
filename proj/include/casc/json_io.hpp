#pragma once

// JSON conversions for the CLI-facing structures. Kept separate so the core
// headers stay Eigen-only.

#include <json.hpp>

#include <string>
#include <vector>

#include "casc/cluster.hpp"
#include "casc/sweep.hpp"
#include "casc/theory.hpp"
#include "casc/tune.hpp"

namespace casc {

using json = nlohmann::json;

inline json to_json(const Eigen::VectorXd& v) {
  json array = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
  return array;
}

inline json to_json(const EigenResult& r) {
  return json{{"eigenvalues", to_json(r.eigenvalues)},
              {"residual_norms", to_json(r.residual_norms)},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"dense_path", r.dense_path},
              {"tie_at_k", r.tie_at_k}};
}

inline json to_json(const TuningResult& t) {
  json grid = json::array();
  for (const TuningGridPoint& p : t.grid) {
    grid.push_back(json{{"alpha", p.alpha},
                        {"wcss", p.wcss},
                        {"solver_converged", p.solver_converged},
                        {"ok", p.ok},
                        {"error", p.error}});
  }
  return json{{"alpha_star", t.alpha_star},
              {"alpha_min", t.alpha_min},
              {"alpha_max", t.alpha_max},
              {"alpha_init", t.alpha_init},
              {"alpha_max_unbounded", t.alpha_max_unbounded},
              {"grid", grid},
              {"laplacian_sq_spectrum", to_json(t.laplacian_sq_spectrum)},
              {"covariate_spectrum", to_json(t.covariate_spectrum)}};
}

inline json to_json(const TheoryReport& r) {
  return json{{"kappa", r.kappa},
              {"lambda_K_BP", r.lambda_K_BP},
              {"block_condition_ok", r.block_condition_ok},
              {"d_min", r.d_min},
              {"varpi", r.varpi},
              {"S_bound", r.S_bound},
              {"delta", r.delta},
              {"lambda_K", r.lambda_K},
              {"lambda_K_source", r.lambda_K_source},
              {"P_max", r.P_max},
              {"bound_value", r.bound_value},
              {"epsilon", r.epsilon},
              {"conditions",
               json{{"degree", r.degree_condition},
                    {"covariate_noise", r.covariate_noise_condition},
                    {"eigengap", r.eigengap_condition}}}};
}

inline json to_json(const LowerBoundReport& r) {
  return json{{"gamma", r.gamma_infinite ? json("inf") : json(r.gamma)},
              {"delta_threshold", r.delta_threshold},
              {"vacuous", r.vacuous},
              {"graph_insufficient", r.graph_insufficient},
              {"graph_condition_evaluated", r.graph_condition_evaluated},
              {"covariates_insufficient", r.covariates_insufficient}};
}

inline json to_json(const SimDesign& d) {
  json j{{"n_nodes", d.n_nodes},
         {"k_blocks", d.k_blocks},
         {"r_covariates", d.r_covariates},
         {"p", d.p},
         {"q", d.q},
         {"m1", d.m1},
         {"m2", d.m2},
         {"assortative", d.assortative},
         {"agreement", d.agreement},
         {"replicates", d.replicates},
         {"seed", d.seed}};
  if (!d.sweep.parameter.empty()) {
    j["sweep"] = json{{"parameter", d.sweep.parameter}, {"values", d.sweep.values}};
  }
  return j;
}

inline SimDesign design_from_json(const json& j) {
  SimDesign d;
  d.n_nodes = j.value("n_nodes", d.n_nodes);
  d.k_blocks = j.value("k_blocks", d.k_blocks);
  d.r_covariates = j.value("r_covariates", d.r_covariates);
  d.p = j.value("p", d.p);
  d.q = j.value("q", d.q);
  d.m1 = j.value("m1", d.m1);
  d.m2 = j.value("m2", d.m2);
  d.assortative = j.value("assortative", d.assortative);
  d.agreement = j.value("agreement", d.agreement);
  d.replicates = j.value("replicates", d.replicates);
  d.seed = j.value("seed", d.seed);
  if (j.contains("sweep")) {
    d.sweep.parameter = j["sweep"].value("parameter", std::string());
    d.sweep.values = j["sweep"].value("values", std::vector<double>());
  }
  d.validate();
  return d;
}

}  // namespace casc
