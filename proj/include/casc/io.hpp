#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "casc/covariates.hpp"
#include "casc/graph.hpp"

namespace casc {

/// Shortest round-trip decimal form; keeps file output byte-stable.
inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

struct EdgeList {
  std::vector<Edge> edges;
  int max_node = -1;  // largest index seen; implied n_nodes = max_node + 1
};

/// Edge-list text format: one `i j [weight]` per line, 0-based indices,
/// whitespace separated, '#' comment lines and blank lines ignored, missing
/// weight means 1.0.
inline EdgeList read_edge_list(std::istream& in, const std::string& name = "<edge list>") {
  EdgeList out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Edge e;
    if (!(fields >> e.i >> e.j)) {
      throw InputError(name + ":" + std::to_string(lineno) + ": expected `i j [weight]`");
    }
    if (!(fields >> e.weight)) e.weight = 1.0;
    std::string extra;
    if (fields >> extra) {
      throw InputError(name + ":" + std::to_string(lineno) + ": trailing tokens");
    }
    if (e.i < 0 || e.j < 0) {
      throw InputError(name + ":" + std::to_string(lineno) + ": negative node index");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw InputError(name + ":" + std::to_string(lineno) + ": bad edge weight");
    }
    out.max_node = std::max({out.max_node, e.i, e.j});
    out.edges.push_back(e);
  }
  return out;
}

inline EdgeList read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open edge list file: " + path);
  return read_edge_list(in, path);
}

inline void write_edge_list_file(const std::string& path, const SparseGraph& graph) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write edge list file: " + path);
  out << "# i j weight\n";
  for (int i = 0; i < graph.n_nodes(); ++i) {
    for (SparseGraph::Adjacency::InnerIterator it(graph.adjacency(), i); it; ++it) {
      if (it.col() < i) continue;  // emit each undirected edge once
      out << i << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

/// Covariate CSV: header row, first column node_id (0-based), remaining
/// columns covariates. Cells are kept as strings so categorical columns can
/// be declared afterwards. No quoting support.
struct CovariateTable {
  std::vector<std::string> names;                 // covariate column names (node_id excluded)
  std::vector<std::vector<std::string>> rows;     // per node, in node_id order
};

inline CovariateTable read_covariates_csv(std::istream& in, const std::string& name = "<csv>") {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      size_t start = 0;
      while (start < cell.size() && cell[start] == ' ') ++start;
      cells.push_back(cell.substr(start));
    }
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw InputError(name + ": empty covariate file");
  std::vector<std::string> header = split(line);
  if (header.empty() || header[0] != "node_id") {
    throw InputError(name + ": first CSV column must be node_id");
  }

  CovariateTable table;
  table.names.assign(header.begin() + 1, header.end());
  std::vector<std::pair<int, std::vector<std::string>>> parsed;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) {
      throw InputError(name + ":" + std::to_string(lineno) + ": wrong number of columns");
    }
    int node = 0;
    try {
      node = std::stoi(cells[0]);
    } catch (...) {
      throw InputError(name + ":" + std::to_string(lineno) + ": bad node_id");
    }
    parsed.emplace_back(node, std::vector<std::string>(cells.begin() + 1, cells.end()));
  }
  const int n = static_cast<int>(parsed.size());
  table.rows.resize(static_cast<size_t>(n));
  std::vector<bool> seen(static_cast<size_t>(n), false);
  for (auto& [node, cells] : parsed) {
    if (node < 0 || node >= n || seen[static_cast<size_t>(node)]) {
      throw InputError(name + ": node_id values must cover 0.." + std::to_string(n - 1) +
                       " exactly once");
    }
    seen[static_cast<size_t>(node)] = true;
    table.rows[static_cast<size_t>(node)] = std::move(cells);
  }
  return table;
}

inline CovariateTable read_covariates_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open covariate file: " + path);
  return read_covariates_csv(in, path);
}

/// Turns a raw table into a CovariateMatrix: named categorical columns are
/// recoded to level indices and dummy-expanded by preprocess_covariates;
/// everything else parses as a number.
inline CovariateMatrix covariates_from_table(const CovariateTable& table,
                                             const std::vector<std::string>& categorical_names,
                                             bool center, bool scale) {
  const int n = static_cast<int>(table.rows.size());
  const int r = static_cast<int>(table.names.size());
  if (n == 0 || r == 0) throw InputError("covariates: empty table");
  PreprocessOptions options;
  options.center = center;
  options.scale = scale;

  for (const std::string& name : categorical_names) {
    const auto it = std::find(table.names.begin(), table.names.end(), name);
    if (it == table.names.end()) throw InputError("covariates: no column named '" + name + "'");
    options.categorical_columns.push_back(static_cast<int>(it - table.names.begin()));
  }

  Eigen::MatrixXd raw(n, r);
  for (int c = 0; c < r; ++c) {
    const bool categorical = std::find(options.categorical_columns.begin(),
                                       options.categorical_columns.end(),
                                       c) != options.categorical_columns.end();
    if (categorical) {
      std::map<std::string, int> levels;
      for (int i = 0; i < n; ++i) levels.emplace(table.rows[static_cast<size_t>(i)][static_cast<size_t>(c)], 0);
      int idx = 0;
      for (auto& kv : levels) kv.second = idx++;
      for (int i = 0; i < n; ++i) {
        raw(i, c) = levels[table.rows[static_cast<size_t>(i)][static_cast<size_t>(c)]];
      }
    } else {
      for (int i = 0; i < n; ++i) {
        const std::string& cell = table.rows[static_cast<size_t>(i)][static_cast<size_t>(c)];
        try {
          size_t pos = 0;
          raw(i, c) = std::stod(cell, &pos);
          if (pos != cell.size()) throw std::invalid_argument(cell);
        } catch (...) {
          throw InputError("covariates: non-numeric value '" + cell + "' in column '" +
                           table.names[static_cast<size_t>(c)] +
                           "' (declare it categorical with --categorical)");
        }
      }
    }
  }
  return preprocess_covariates(raw, options);
}

inline void write_covariates_csv_file(const std::string& path, const Eigen::MatrixXd& values) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write covariate file: " + path);
  out << "node_id";
  for (Eigen::Index c = 0; c < values.cols(); ++c) out << ",x" << c;
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << i;
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(i, c));
    out << '\n';
  }
}

inline void write_labels_csv_file(const std::string& path, const Eigen::VectorXi& labels) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write labels file: " + path);
  out << "node_id,cluster\n";
  for (Eigen::Index i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

}  // namespace casc
