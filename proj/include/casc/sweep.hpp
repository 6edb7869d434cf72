#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "casc/cluster.hpp"
#include "casc/metrics.hpp"
#include "casc/ncsbm.hpp"
#include "casc/tune.hpp"

namespace casc {

struct SweepSpec {
  std::string parameter;  // p | q | p_minus_q | m1 | m2 | m1_minus_m2 | agreement; empty = none
  std::vector<double> values;
};

/// A family of simulation instances: the base design, an optional swept
/// parameter, replicates, and the covariate-membership agreement for the
/// misspecified variant.
struct SimDesign {
  int n_nodes = 1500;
  int k_blocks = 3;
  int r_covariates = 3;
  double p = 0.03;
  double q = 0.015;
  double m1 = 0.8;
  double m2 = 0.2;
  bool assortative = true;
  double agreement = 1.0;  // proportion of covariate memberships matching Z
  int replicates = 20;
  std::uint64_t seed = 1;
  SweepSpec sweep;

  void validate() const {
    for (double v : {p, q, m1, m2}) {
      if (v < 0.0 || v > 1.0) throw InputError("design: p, q, m1, m2 must lie in [0, 1]");
    }
    if (replicates < 1) throw InputError("design: replicates must be >= 1");
    if (n_nodes < k_blocks || k_blocks < 1) throw InputError("design: need N >= K >= 1");
    if (agreement < 1.0 / k_blocks - 1e-12 || agreement > 1.0 + 1e-12) {
      throw InputError("design: agreement must lie in [1/K, 1]");
    }
  }
};

struct SweepCell {
  double sweep_value = 0.0;
  std::string method;
  int replicate = 0;
  double misclustering = std::numeric_limits<double>::quiet_NaN();
  double ari = std::numeric_limits<double>::quiet_NaN();
  double alpha_used = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepAggregate {
  double sweep_value = 0.0;
  std::string method;
  int n_ok = 0;
  double mean_misclustering = std::numeric_limits<double>::quiet_NaN();
  double se_misclustering = 0.0;
  double mean_ari = std::numeric_limits<double>::quiet_NaN();
  double se_ari = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered by (sweep_value index, method, replicate)
  std::vector<SweepAggregate> aggregates;
};

namespace detail {

struct InstanceSetting {
  double p = 0.0, q = 0.0, m1 = 0.0, m2 = 0.0, agreement = 1.0;
};

inline InstanceSetting apply_sweep(const SimDesign& design, double value) {
  InstanceSetting s{design.p, design.q, design.m1, design.m2, design.agreement};
  const std::string& name = design.sweep.parameter;
  if (name.empty()) return s;
  if (name == "p") s.p = value;
  else if (name == "q") s.q = value;
  else if (name == "p_minus_q") s.p = design.q + value;
  else if (name == "m1") s.m1 = value;
  else if (name == "m2") s.m2 = value;
  else if (name == "m1_minus_m2") s.m1 = design.m2 + value;
  else if (name == "agreement") s.agreement = value;
  else throw InputError("design: unknown sweep parameter '" + name + "'");
  for (double v : {s.p, s.q, s.m1, s.m2}) {
    if (v < 0.0 || v > 1.0) throw InputError("design: swept value leaves [0, 1]");
  }
  return s;
}

}  // namespace detail

/// Runs every (sweep value x replicate x method) cell: sample an instance,
/// cluster with each method, score against the generating membership Z.
/// casc/acasc use the tuned alpha (one tuning per instance, shared by both);
/// per-cell failures are recorded and the sweep continues. Instances run in
/// a small work pool; results are deterministic regardless of thread count.
inline SweepResult run_sweep(const SimDesign& design, const std::vector<OperatorKind>& methods,
                             int threads = 1, int tune_grid_size = 20) {
  design.validate();
  std::vector<double> values = design.sweep.values;
  if (design.sweep.parameter.empty() || values.empty()) values = {0.0};

  const int n_values = static_cast<int>(values.size());
  const int n_methods = static_cast<int>(methods.size());
  const int n_instances = n_values * design.replicates;
  bool tune_casc = false, tune_acasc = false;
  for (OperatorKind m : methods) {
    if (m == OperatorKind::CASC) tune_casc = true;
    if (m == OperatorKind::ACASC) tune_acasc = true;
  }

  SweepResult result;
  result.cells.resize(static_cast<size_t>(n_instances) * n_methods);

  auto run_instance = [&](int instance) {
    const int value_idx = instance / design.replicates;
    const int replicate = instance % design.replicates;
    const double value = values[static_cast<size_t>(value_idx)];
    const std::uint64_t cell_seed =
        derive_seed(design.seed, static_cast<std::uint64_t>(value_idx) + 1,
                    static_cast<std::uint64_t>(replicate) + 1);

    auto emit = [&](int method_idx, SweepCell cell) {
      cell.sweep_value = value;
      cell.replicate = replicate;
      cell.method = to_string(methods[static_cast<size_t>(method_idx)]);
      result.cells[(static_cast<size_t>(value_idx) * n_methods + method_idx) * design.replicates +
                   replicate] = std::move(cell);
    };

    detail::InstanceSetting setting;
    NcsbmSample sample;
    try {
      setting = detail::apply_sweep(design, value);
      auto [b, m] = make_design_matrices(setting.p, setting.q, setting.m1, setting.m2,
                                         design.k_blocks, design.r_covariates, design.assortative);
      NcsbmParams params = make_ncsbm_params(design.n_nodes, design.k_blocks, b, m);
      if (setting.agreement < 1.0) {
        const Eigen::VectorXi z = params.block_labels();
        const Eigen::VectorXi y = misspecify_membership(z, design.k_blocks, setting.agreement,
                                                        derive_seed(cell_seed, 0xfeed));
        sample = sample_ncsbm(params, cell_seed, &y);
      } else {
        sample = sample_ncsbm(params, cell_seed);
      }
    } catch (const std::exception& e) {
      for (int mi = 0; mi < n_methods; ++mi) {
        SweepCell cell;
        cell.error = e.what();
        emit(mi, cell);
      }
      return;
    }

    const double tau = default_tau(sample.graph);
    KmeansConfig kcfg;
    kcfg.k = design.k_blocks;
    kcfg.seed = derive_seed(cell_seed, 0x6b6d);
    SolverConfig scfg;
    scfg.seed = derive_seed(cell_seed, 0x5eed);

    // Each tunable method gets its own alpha from its own tuning run.
    double alpha_casc = 0.0, alpha_acasc = 0.0;
    std::string tune_error_casc, tune_error_acasc;
    if (tune_casc) {
      try {
        alpha_casc = tune_alpha(sample.graph, sample.covariates, tau, design.k_blocks, kcfg,
                                tune_grid_size, scfg, OperatorKind::CASC)
                         .alpha_star;
      } catch (const std::exception& e) {
        tune_error_casc = e.what();
      }
    }
    if (tune_acasc) {
      try {
        alpha_acasc = tune_alpha(sample.graph, sample.covariates, tau, design.k_blocks, kcfg,
                                 tune_grid_size, scfg, OperatorKind::ACASC)
                          .alpha_star;
      } catch (const std::exception& e) {
        tune_error_acasc = e.what();
      }
    }

    for (int mi = 0; mi < n_methods; ++mi) {
      const OperatorKind method = methods[static_cast<size_t>(mi)];
      SweepCell cell;
      const bool tuned_method = method == OperatorKind::CASC || method == OperatorKind::ACASC;
      const std::string& tune_error =
          method == OperatorKind::CASC ? tune_error_casc : tune_error_acasc;
      if (tuned_method && !tune_error.empty()) {
        cell.error = "tuning failed: " + tune_error;
        emit(mi, cell);
        continue;
      }
      try {
        OperatorSpec spec;
        spec.kind = method;
        spec.tau = tau;
        spec.alpha = method == OperatorKind::CASC    ? alpha_casc
                     : method == OperatorKind::ACASC ? alpha_acasc
                                                     : 0.0;
        ClusteringResult cr =
            spectral_cluster(sample.graph, &sample.covariates, spec, kcfg, false, scfg);
        cell.alpha_used = spec.alpha;
        cell.misclustering = misclustering_rate(cr.labels, sample.z, design.k_blocks);
        cell.ari = adjusted_rand_index(cr.labels, sample.z);
        cell.ok = true;
        if (!cr.eigen.converged) {
          cell.ok = false;
          cell.error = "eigensolver did not converge";
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      emit(mi, cell);
    }
  };

  if (threads <= 1 || n_instances <= 1) {
    for (int i = 0; i < n_instances; ++i) run_instance(i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_instances) return;
        run_instance(i);
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(threads, n_instances);
    pool.reserve(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate mean and standard error per (value, method) over ok replicates.
  for (int vi = 0; vi < n_values; ++vi) {
    for (int mi = 0; mi < n_methods; ++mi) {
      SweepAggregate agg;
      agg.sweep_value = values[static_cast<size_t>(vi)];
      agg.method = to_string(methods[static_cast<size_t>(mi)]);
      double sum_m = 0.0, sum_a = 0.0;
      std::vector<double> ms, as;
      for (int r = 0; r < design.replicates; ++r) {
        const SweepCell& cell =
            result.cells[(static_cast<size_t>(vi) * n_methods + mi) * design.replicates + r];
        if (!cell.ok) continue;
        sum_m += cell.misclustering;
        sum_a += cell.ari;
        ms.push_back(cell.misclustering);
        as.push_back(cell.ari);
      }
      agg.n_ok = static_cast<int>(ms.size());
      if (agg.n_ok > 0) {
        agg.mean_misclustering = sum_m / agg.n_ok;
        agg.mean_ari = sum_a / agg.n_ok;
        if (agg.n_ok > 1) {
          double var_m = 0.0, var_a = 0.0;
          for (double v : ms) var_m += (v - agg.mean_misclustering) * (v - agg.mean_misclustering);
          for (double v : as) var_a += (v - agg.mean_ari) * (v - agg.mean_ari);
          agg.se_misclustering = std::sqrt(var_m / (agg.n_ok - 1) / agg.n_ok);
          agg.se_ari = std::sqrt(var_a / (agg.n_ok - 1) / agg.n_ok);
        }
      }
      result.aggregates.push_back(std::move(agg));
    }
  }
  return result;
}

}  // namespace casc
