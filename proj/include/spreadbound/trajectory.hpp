#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "spreadbound/errors.hpp"

namespace spb {

enum class SeriesRole : int {
  Upper = 0,
  Lower = 1,
  Point = 2,
  Exact = 3,
  Mc = 4,
  McStderr = 5,
};

const char* role_name(SeriesRole role);

// Memory layout of a flat ODE state vector: one n-by-C block per tracked
// estimate (upper then lower when paired, a single block otherwise), each
// block column-major.
struct StateLayout {
  int nodes = 0;
  int comps = 0;
  bool paired = true;

  int block() const { return nodes * comps; }
  int dim() const { return (paired ? 2 : 1) * block(); }

  Eigen::Map<Eigen::ArrayXXd> upper(Eigen::VectorXd& v) const {
    return {v.data(), nodes, comps};
  }
  Eigen::Map<const Eigen::ArrayXXd> upper(const Eigen::VectorXd& v) const {
    return {v.data(), nodes, comps};
  }
  Eigen::Map<Eigen::ArrayXXd> lower(Eigen::VectorXd& v) const {
    return {v.data() + block(), nodes, comps};
  }
  Eigen::Map<const Eigen::ArrayXXd> lower(const Eigen::VectorXd& v) const {
    return {v.data() + block(), nodes, comps};
  }
  Eigen::Map<Eigen::ArrayXXd> point(Eigen::VectorXd& v) const { return upper(v); }
  Eigen::Map<const Eigen::ArrayXXd> point(const Eigen::VectorXd& v) const { return upper(v); }
};

// A common time grid plus labeled per-(node, compartment) series, one n-by-C
// array per grid point and role. `aggregate` optionally carries graph-mean
// series whose statistics cannot be recovered from per-node data (the Monte
// Carlo standard error of the node-averaged estimate).
struct TrajectoryBundle {
  Eigen::VectorXd grid;
  int nodes = 0;
  std::vector<std::string> compartments;
  std::map<SeriesRole, std::vector<Eigen::ArrayXXd>> series;
  std::map<SeriesRole, std::vector<Eigen::ArrayXd>> aggregate;
  nlohmann::json metadata = nlohmann::json::object();

  int comps() const { return static_cast<int>(compartments.size()); }
  bool has(SeriesRole role) const { return series.count(role) > 0; }
  const std::vector<Eigen::ArrayXXd>& at(SeriesRole role) const;

  // Graph-mean value per compartment at one grid index: the dedicated
  // aggregate series when present, otherwise the unweighted node mean.
  Eigen::ArrayXd graph_mean(SeriesRole role, int t_index) const;

  // Single (node, compartment) series over the grid.
  Eigen::VectorXd node_series(SeriesRole role, int node, int comp) const;
  Eigen::VectorXd mean_series(SeriesRole role, int comp) const;
};

bool same_grid(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class Aggregation { PerNode, GraphMean };

// Long-format CSV: header `t,node,compartment,role,value`, rows ordered by
// (t, node, compartment, role), LF line endings, full-precision floats.
// GraphMean writes node as "mean".
void emit_plot_data(const TrajectoryBundle& bundle, Aggregation aggregation,
                    const std::string& path);

std::string plot_data_string(const TrajectoryBundle& bundle, Aggregation aggregation);

}  // namespace spb
