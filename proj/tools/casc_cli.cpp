// Command-line front end: cluster graphs with node covariates, tune the
// covariate weight, run simulation sweeps, emit sampled instances, and
// evaluate the theoretical bounds. Every subcommand writes a JSON run report
// whose config block is sufficient to reproduce the run bit-exactly (the
// timing block is the one part that varies between runs).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "casc/casc.hpp"
#include "casc/json_io.hpp"
#include "casc/version.hpp"

namespace {

using casc::json;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_json(const std::string& path, const json& payload) {
  std::ofstream out(path);
  if (!out) throw casc::InputError("cannot write report: " + path);
  out << payload.dump(2) << '\n';
}

json make_report(const std::string& command, std::uint64_t seed, json config, json results,
                 json timing) {
  return json{{"command", command}, {"version", casc::kVersion}, {"seed", seed},
              {"config", std::move(config)}, {"results", std::move(results)},
              {"timing", std::move(timing)}};
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct GraphInputs {
  casc::SparseGraph graph;
  std::optional<casc::CovariateMatrix> covariates;
};

GraphInputs load_inputs(const std::string& graph_file, const std::string& covariates_file,
                        int n_nodes_flag, const std::vector<std::string>& categorical,
                        bool center, bool scale) {
  GraphInputs inputs;
  casc::EdgeList edge_list = casc::read_edge_list_file(graph_file);
  int n = n_nodes_flag > 0 ? n_nodes_flag : edge_list.max_node + 1;
  if (!covariates_file.empty()) {
    casc::CovariateTable table = casc::read_covariates_csv_file(covariates_file);
    n = std::max(n, static_cast<int>(table.rows.size()));
    inputs.covariates = casc::covariates_from_table(table, categorical, center, scale);
    if (inputs.covariates->n_nodes() != n) {
      throw casc::InputError("covariate rows (" + std::to_string(inputs.covariates->n_nodes()) +
                             ") do not cover all " + std::to_string(n) + " nodes");
    }
  }
  inputs.graph = casc::build_graph(edge_list.edges, n);
  return inputs;
}

int cmd_cluster(CLI::App& app) {
  auto graph_file = app.get_option("--graph")->as<std::string>();
  auto covariates_file = app.get_option("--covariates")->as<std::string>();
  auto method = casc::operator_kind_from_string(app.get_option("--method")->as<std::string>());
  auto k = app.get_option("--k")->as<int>();
  auto seed = app.get_option("--seed")->as<std::uint64_t>();
  auto out = app.get_option("--out")->as<std::string>();
  auto labels_out = app.get_option("--labels")->as<std::string>();
  const bool normalize = app.count("--normalize-rows") > 0;
  const bool center = app.count("--center") > 0;
  const bool scale = app.count("--scale") > 0;
  auto n_init = app.get_option("--n-init")->as<int>();
  auto grid_size = app.get_option("--grid-size")->as<int>();
  auto n_nodes_flag = app.get_option("--n-nodes")->as<int>();
  std::vector<std::string> categorical =
      split_csv_list(app.get_option("--categorical")->as<std::string>());

  const auto t_start = Clock::now();
  GraphInputs inputs = load_inputs(graph_file, covariates_file, n_nodes_flag, categorical, center,
                                   scale);
  if (casc::uses_covariates(method) && !inputs.covariates) {
    throw casc::InputError("method '" + std::string(casc::to_string(method)) +
                           "' requires --covariates");
  }
  const double load_time = seconds_since(t_start);

  casc::OperatorSpec spec;
  spec.kind = method;
  spec.tau = app.count("--tau") ? app.get_option("--tau")->as<double>()
                                : casc::default_tau(inputs.graph);

  casc::KmeansConfig kcfg;
  kcfg.k = k;
  kcfg.n_init = n_init;
  kcfg.seed = casc::derive_seed(seed, 0x6b6d);
  casc::SolverConfig scfg;
  scfg.seed = casc::derive_seed(seed, 0x5eed);

  const auto t_tune = Clock::now();
  json tuning = nullptr;
  if (method == casc::OperatorKind::CASC || method == casc::OperatorKind::ACASC) {
    if (app.count("--alpha")) {
      spec.alpha = app.get_option("--alpha")->as<double>();
    } else {
      if (!inputs.covariates) throw casc::InputError("tuning requires --covariates");
      casc::TuningResult tuned =
          casc::tune_alpha(inputs.graph, *inputs.covariates, spec.tau, k, kcfg, grid_size, scfg,
                           method);
      spec.alpha = tuned.alpha_star;
      tuning = casc::to_json(tuned);
    }
  }
  const double tune_time = seconds_since(t_tune);

  const auto t_cluster = Clock::now();
  casc::ClusteringResult result = casc::spectral_cluster(
      inputs.graph, inputs.covariates ? &*inputs.covariates : nullptr, spec, kcfg, normalize, scfg);
  const double cluster_time = seconds_since(t_cluster);

  casc::write_labels_csv_file(labels_out, result.labels);
  json config{{"graph", graph_file},
              {"covariates", covariates_file},
              {"method", casc::to_string(method)},
              {"k", k},
              {"alpha", spec.alpha},
              {"tau", spec.tau},
              {"normalize_rows", normalize},
              {"center", center},
              {"scale", scale},
              {"categorical", categorical},
              {"n_init", n_init},
              {"grid_size", grid_size},
              {"n_nodes", inputs.graph.n_nodes()}};
  json results{{"labels_file", labels_out},
               {"wcss", result.wcss},
               {"zero_rows", result.zero_rows},
               {"eigen", casc::to_json(result.eigen)}};
  if (!tuning.is_null()) results["tuning"] = tuning;
  json timing{{"load", load_time}, {"tune", tune_time}, {"cluster", cluster_time}};
  write_json(out, make_report("cluster", seed, config, results, timing));

  if (!result.eigen.converged) {
    std::cerr << "casc: eigensolver did not converge; partial results written\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_tune(CLI::App& app) {
  auto graph_file = app.get_option("--graph")->as<std::string>();
  auto covariates_file = app.get_option("--covariates")->as<std::string>();
  auto k = app.get_option("--k")->as<int>();
  auto grid_size = app.get_option("--grid-size")->as<int>();
  auto seed = app.get_option("--seed")->as<std::uint64_t>();
  auto out = app.get_option("--out")->as<std::string>();
  auto method = casc::operator_kind_from_string(app.get_option("--method")->as<std::string>());
  auto n_init = app.get_option("--n-init")->as<int>();
  const bool center = app.count("--center") > 0;
  const bool scale = app.count("--scale") > 0;
  std::vector<std::string> categorical =
      split_csv_list(app.get_option("--categorical")->as<std::string>());

  const auto t_start = Clock::now();
  GraphInputs inputs =
      load_inputs(graph_file, covariates_file, app.get_option("--n-nodes")->as<int>(), categorical,
                  center, scale);
  if (!inputs.covariates) throw casc::InputError("tune requires --covariates");
  const double tau = app.count("--tau") ? app.get_option("--tau")->as<double>()
                                        : casc::default_tau(inputs.graph);
  casc::KmeansConfig kcfg;
  kcfg.k = k;
  kcfg.n_init = n_init;
  kcfg.seed = casc::derive_seed(seed, 0x6b6d);
  casc::SolverConfig scfg;
  scfg.seed = casc::derive_seed(seed, 0x5eed);

  casc::TuningResult tuned =
      casc::tune_alpha(inputs.graph, *inputs.covariates, tau, k, kcfg, grid_size, scfg, method);

  json config{{"graph", graph_file}, {"covariates", covariates_file},
              {"k", k},              {"grid_size", grid_size},
              {"tau", tau},          {"method", casc::to_string(method)},
              {"n_init", n_init},    {"center", center},
              {"scale", scale},      {"categorical", categorical}};
  json timing{{"total", seconds_since(t_start)}};
  write_json(out, make_report("tune", seed, config, casc::to_json(tuned), timing));
  return kExitOk;
}

int cmd_simulate(CLI::App& app) {
  auto design_file = app.get_option("--design")->as<std::string>();
  auto prefix = app.get_option("--out-prefix")->as<std::string>();
  auto seed_opt = app.get_option("--seed");

  std::ifstream in(design_file);
  if (!in) throw casc::InputError("cannot open design file: " + design_file);
  json design_json = json::parse(in, nullptr, true, true);
  casc::SimDesign design = casc::design_from_json(design_json);
  const std::uint64_t seed = seed_opt->count() ? seed_opt->as<std::uint64_t>() : design.seed;

  const auto t_start = Clock::now();
  auto [b, m] = casc::make_design_matrices(design.p, design.q, design.m1, design.m2,
                                           design.k_blocks, design.r_covariates,
                                           design.assortative);
  casc::NcsbmParams params = casc::make_ncsbm_params(design.n_nodes, design.k_blocks, b, m);
  casc::NcsbmSample sample;
  if (design.agreement < 1.0) {
    const Eigen::VectorXi z = params.block_labels();
    const Eigen::VectorXi y = casc::misspecify_membership(z, design.k_blocks, design.agreement,
                                                          casc::derive_seed(seed, 0xfeed));
    sample = casc::sample_ncsbm(params, seed, &y);
  } else {
    sample = casc::sample_ncsbm(params, seed);
  }

  const std::string edges_file = prefix + "_edges.txt";
  const std::string covariates_file = prefix + "_covariates.csv";
  const std::string labels_file = prefix + "_labels.csv";
  casc::write_edge_list_file(edges_file, sample.graph);
  casc::write_covariates_csv_file(covariates_file, sample.covariates.values);
  casc::write_labels_csv_file(labels_file, sample.z);

  json results{{"edges_file", edges_file},
               {"covariates_file", covariates_file},
               {"labels_file", labels_file},
               {"n_edges", sample.graph.n_edges()},
               {"b_rank_deficient", params.b_rank_deficient}};
  json timing{{"total", seconds_since(t_start)}};
  write_json(prefix + "_report.json",
             make_report("simulate", seed, casc::to_json(design), results, timing));
  return kExitOk;
}

int cmd_sweep(CLI::App& app) {
  auto design_file = app.get_option("--design")->as<std::string>();
  auto out_dir = app.get_option("--out-dir")->as<std::string>();
  auto threads = app.get_option("--threads")->as<int>();
  auto grid_size = app.get_option("--grid-size")->as<int>();
  std::vector<std::string> method_names =
      split_csv_list(app.get_option("--methods")->as<std::string>());
  if (method_names.empty()) throw casc::InputError("sweep: --methods is empty");

  std::ifstream in(design_file);
  if (!in) throw casc::InputError("cannot open design file: " + design_file);
  casc::SimDesign design = casc::design_from_json(json::parse(in, nullptr, true, true));
  if (app.count("--seed")) design.seed = app.get_option("--seed")->as<std::uint64_t>();

  std::vector<casc::OperatorKind> methods;
  for (const std::string& name : method_names) methods.push_back(casc::operator_kind_from_string(name));

  const auto t_start = Clock::now();
  casc::SweepResult sweep = casc::run_sweep(design, methods, threads, grid_size);
  const double run_time = seconds_since(t_start);

  std::filesystem::create_directories(out_dir);
  const std::string cells_file = out_dir + "/cells.csv";
  {
    std::ofstream cells(cells_file);
    if (!cells) throw casc::InputError("cannot write " + cells_file);
    cells << "sweep_value,method,replicate,misclustering,ari,alpha_used,ok,error\n";
    for (const casc::SweepCell& cell : sweep.cells) {
      cells << casc::format_double(cell.sweep_value) << ',' << cell.method << ',' << cell.replicate
            << ',' << casc::format_double(cell.misclustering) << ','
            << casc::format_double(cell.ari) << ',' << casc::format_double(cell.alpha_used) << ','
            << (cell.ok ? 1 : 0) << ',' << cell.error << '\n';
    }
  }
  const std::string agg_file = out_dir + "/aggregates.csv";
  {
    std::ofstream agg(agg_file);
    if (!agg) throw casc::InputError("cannot write " + agg_file);
    agg << "sweep_value,method,n_ok,mean_misclustering,se_misclustering,mean_ari,se_ari\n";
    for (const casc::SweepAggregate& a : sweep.aggregates) {
      agg << casc::format_double(a.sweep_value) << ',' << a.method << ',' << a.n_ok << ','
          << casc::format_double(a.mean_misclustering) << ','
          << casc::format_double(a.se_misclustering) << ',' << casc::format_double(a.mean_ari)
          << ',' << casc::format_double(a.se_ari) << '\n';
    }
  }

  int failed_cells = 0;
  for (const casc::SweepCell& cell : sweep.cells) {
    if (!cell.ok) ++failed_cells;
  }
  json config = casc::to_json(design);
  config["methods"] = method_names;
  config["threads"] = threads;
  config["grid_size"] = grid_size;
  json results{{"cells_file", cells_file},
               {"aggregates_file", agg_file},
               {"n_cells", sweep.cells.size()},
               {"failed_cells", failed_cells}};
  json timing{{"total", run_time}};
  write_json(out_dir + "/report.json",
             make_report("sweep", design.seed, config, results, timing));
  return kExitOk;
}

int cmd_bounds(CLI::App& app) {
  casc::SimDesign design;
  if (app.count("--design")) {
    auto design_file = app.get_option("--design")->as<std::string>();
    std::ifstream in(design_file);
    if (!in) throw casc::InputError("cannot open design file: " + design_file);
    design = casc::design_from_json(json::parse(in, nullptr, true, true));
  } else {
    design.n_nodes = app.get_option("--n")->as<int>();
    design.k_blocks = app.get_option("--k")->as<int>();
    design.r_covariates = app.get_option("--r")->as<int>();
    design.p = app.get_option("--p")->as<double>();
    design.q = app.get_option("--q")->as<double>();
    design.m1 = app.get_option("--m1")->as<double>();
    design.m2 = app.get_option("--m2")->as<double>();
    design.assortative = app.count("--non-assortative") == 0;
  }
  const double epsilon = app.get_option("--epsilon")->as<double>();
  auto out = app.get_option("--out")->as<std::string>();
  if (design.n_nodes < 8) {
    throw casc::InputError("bounds: the recovery lower bound requires N >= 8");
  }

  const auto t_start = Clock::now();
  auto [b, m] = casc::make_design_matrices(design.p, design.q, design.m1, design.m2,
                                           design.k_blocks, design.r_covariates,
                                           design.assortative);
  casc::NcsbmParams params = casc::make_ncsbm_params(design.n_nodes, design.k_blocks, b, m);
  const double tau = app.count("--tau") ? app.get_option("--tau")->as<double>()
                                        : casc::population_default_tau(params);

  double alpha;
  if (app.count("--alpha")) {
    alpha = app.get_option("--alpha")->as<double>();
  } else {
    // Population balance point: leading eigenvalue of the squared-Laplacian
    // term over the leading eigenvalue of E(XX^T).
    Eigen::MatrixXd graph_part = casc::population_laplacian(params, 0.0, tau);
    Eigen::MatrixXd gram = casc::population_covariate_gram(params);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_g(graph_part), es_x(gram);
    const double top_x = es_x.eigenvalues()(gram.rows() - 1);
    if (!(top_x > 0.0)) throw casc::InputError("bounds: covariates are all zero");
    alpha = es_g.eigenvalues()(graph_part.rows() - 1) / top_x;
  }

  casc::TheoryReport report = casc::theory_report(params, alpha, tau, epsilon);
  json results{{"theory", casc::to_json(report)}};
  if (design.k_blocks == 2) {
    const double gamma = casc::bernoulli_gamma(params.M);
    casc::LowerBoundReport lower =
        casc::recovery_lower_bound(params.B(0, 0), design.n_nodes, gamma, epsilon, params.B(0, 1));
    results["lower_bound"] = casc::to_json(lower);
  }

  json config = casc::to_json(design);
  config["alpha"] = alpha;
  config["tau"] = tau;
  config["epsilon"] = epsilon;
  json timing{{"total", seconds_since(t_start)}};
  write_json(out, make_report("bounds", design.seed, config, results, timing));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate-assisted spectral clustering toolkit"};
  app.require_subcommand(1);

  CLI::App* cluster = app.add_subcommand("cluster", "Cluster a graph, optionally with covariates");
  cluster->add_option("--graph", "edge-list file (i j [weight] per line)")->required();
  cluster->add_option("--covariates", "covariate CSV (node_id + columns)")->default_val("");
  cluster->add_option("--method", "rsc | acasc | casc | cca | cov")->required();
  cluster->add_option("--k", "number of clusters")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--alpha", "covariate weight; tuned when omitted (casc/acasc)");
  cluster->add_option("--tau", "regularizer; average degree when omitted");
  cluster->add_flag("--normalize-rows", "normalize embedding rows before k-means");
  cluster->add_option("--categorical", "comma-separated categorical covariate columns")->default_val("");
  cluster->add_flag("--center", "center covariate columns");
  cluster->add_flag("--scale", "scale covariate columns to unit sample sd");
  cluster->add_option("--n-nodes", "node count override")->default_val(0);
  cluster->add_option("--n-init", "k-means restarts")->default_val(20);
  cluster->add_option("--grid-size", "tuning grid size")->default_val(20);
  cluster->add_option("--seed", "RNG seed")->default_val(12345);
  cluster->add_option("--out", "report JSON path")->default_val("casc_report.json");
  cluster->add_option("--labels", "labels CSV path")->default_val("labels.csv");

  CLI::App* tune = app.add_subcommand("tune", "Choose the covariate weight alpha");
  tune->add_option("--graph")->required();
  tune->add_option("--covariates")->required();
  tune->add_option("--k")->required()->check(CLI::PositiveNumber);
  tune->add_option("--grid-size")->default_val(20);
  tune->add_option("--method", "casc | acasc")->default_val("casc");
  tune->add_option("--tau");
  tune->add_option("--categorical")->default_val("");
  tune->add_flag("--center");
  tune->add_flag("--scale");
  tune->add_option("--n-nodes")->default_val(0);
  tune->add_option("--n-init")->default_val(20);
  tune->add_option("--seed")->default_val(12345);
  tune->add_option("--out")->default_val("tune_report.json");

  CLI::App* simulate = app.add_subcommand("simulate", "Sample one model instance to files");
  simulate->add_option("--design", "design JSON file")->required();
  simulate->add_option("--out-prefix")->required();
  simulate->add_option("--seed", "override the design seed");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a simulation sweep and score methods");
  sweep->add_option("--design", "design JSON file")->required();
  sweep->add_option("--methods", "comma-separated methods")->default_val("rsc,acasc,casc,cca,cov");
  sweep->add_option("--out-dir")->required();
  sweep->add_option("--threads")->default_val(1);
  sweep->add_option("--grid-size")->default_val(20);
  sweep->add_option("--seed", "override the design seed");

  CLI::App* bounds = app.add_subcommand("bounds", "Evaluate the theoretical bounds");
  bounds->add_option("--design", "design JSON file");
  bounds->add_option("--n")->default_val(1500);
  bounds->add_option("--k")->default_val(3);
  bounds->add_option("--r")->default_val(3);
  bounds->add_option("--p")->default_val(0.03);
  bounds->add_option("--q")->default_val(0.015);
  bounds->add_option("--m1")->default_val(0.8);
  bounds->add_option("--m2")->default_val(0.2);
  bounds->add_flag("--non-assortative");
  bounds->add_option("--alpha", "covariate weight; population balance point when omitted");
  bounds->add_option("--tau", "regularizer; population mean degree when omitted");
  bounds->add_option("--epsilon")->default_val(0.05);
  bounds->add_option("--out")->default_val("bounds_report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (cluster->parsed()) return cmd_cluster(*cluster);
    if (tune->parsed()) return cmd_tune(*tune);
    if (simulate->parsed()) return cmd_simulate(*simulate);
    if (sweep->parsed()) return cmd_sweep(*sweep);
    if (bounds->parsed()) return cmd_bounds(*bounds);
  } catch (const casc::InputError& e) {
    std::cerr << "casc: " << e.what() << '\n';
    return kExitInput;
  } catch (const casc::NumericalError& e) {
    std::cerr << "casc: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "casc: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
