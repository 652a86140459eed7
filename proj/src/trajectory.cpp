#include "spreadbound/trajectory.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

namespace spb {

const char* role_name(SeriesRole role) {
  switch (role) {
    case SeriesRole::Upper: return "upper";
    case SeriesRole::Lower: return "lower";
    case SeriesRole::Point: return "point";
    case SeriesRole::Exact: return "exact";
    case SeriesRole::Mc: return "mc";
    case SeriesRole::McStderr: return "mc_stderr";
  }
  return "?";
}

const std::vector<Eigen::ArrayXXd>& TrajectoryBundle::at(SeriesRole role) const {
  auto it = series.find(role);
  if (it == series.end())
    throw Error(Errc::MissingSeries, std::string("bundle lacks role ") + role_name(role));
  return it->second;
}

Eigen::ArrayXd TrajectoryBundle::graph_mean(SeriesRole role, int t_index) const {
  auto agg = aggregate.find(role);
  if (agg != aggregate.end()) return agg->second[t_index];
  return at(role)[t_index].colwise().mean().transpose();
}

Eigen::VectorXd TrajectoryBundle::node_series(SeriesRole role, int node, int comp) const {
  const auto& frames = at(role);
  Eigen::VectorXd out(grid.size());
  for (int t = 0; t < grid.size(); ++t) out[t] = frames[t](node, comp);
  return out;
}

Eigen::VectorXd TrajectoryBundle::mean_series(SeriesRole role, int comp) const {
  Eigen::VectorXd out(grid.size());
  for (int t = 0; t < grid.size(); ++t) out[t] = graph_mean(role, t)[comp];
  return out;
}

bool same_grid(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (int k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

namespace {

void append_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_row(std::string& out, double t, const std::string& node, const std::string& comp,
                const char* role, double value) {
  append_value(out, t);
  out += ',';
  out += node;
  out += ',';
  out += comp;
  out += ',';
  out += role;
  out += ',';
  append_value(out, value);
  out += '\n';
}

}  // namespace

std::string plot_data_string(const TrajectoryBundle& bundle, Aggregation aggregation) {
  std::string out = "t,node,compartment,role,value\n";
  const int comps = bundle.comps();
  for (int t = 0; t < bundle.grid.size(); ++t) {
    if (aggregation == Aggregation::GraphMean) {
      for (int c = 0; c < comps; ++c)
        for (const auto& [role, frames] : bundle.series) {
          (void)frames;
          append_row(out, bundle.grid[t], "mean", bundle.compartments[c], role_name(role),
                     bundle.graph_mean(role, t)[c]);
        }
    } else {
      for (int i = 0; i < bundle.nodes; ++i)
        for (int c = 0; c < comps; ++c)
          for (const auto& [role, frames] : bundle.series)
            append_row(out, bundle.grid[t], std::to_string(i), bundle.compartments[c],
                       role_name(role), frames[t](i, c));
    }
  }
  return out;
}

void emit_plot_data(const TrajectoryBundle& bundle, Aggregation aggregation,
                    const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::IoError, "cannot open " + path);
  const std::string data = plot_data_string(bundle, aggregation);
  file.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!file) throw Error(Errc::IoError, "write failed: " + path);
}

}  // namespace spb
