#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spreadbound/bounding.hpp"
#include "spreadbound/exact.hpp"
#include "spreadbound/ssa.hpp"
#include "spreadbound/trajectory.hpp"

namespace spb {

// Largest absolute gap between two series over a shared grid; the grid
// maximum stands in for the continuous one (error at most L * h for
// L-Lipschitz trajectories).
double d_metric(const Eigen::VectorXd& f, const Eigen::VectorXd& g);

struct SeriesViolation {
  int node = 0;
  int comp = 0;
  double max_below = 0.0;     // how far the reference dips under the lower series
  double max_above = 0.0;     // how far it exceeds the upper series
  double first_violation_time = -1.0;  // -1 when clean
};

struct ContainmentReport {
  bool pass = true;
  double tolerance = 0.0;
  double max_violation = 0.0;
  std::vector<SeriesViolation> per_series;  // only entries with a violation

  nlohmann::json to_json() const;
};

// Verifies lower - tol <= reference <= upper + tol pointwise for every
// (node, compartment). When `stderr_` is given (Monte Carlo references) the
// per-point tolerance is max(tolerance, 4 * stderr).
ContainmentReport containment_check(const TrajectoryBundle& bounds, SeriesRole lower_role,
                                    SeriesRole upper_role, const TrajectoryBundle& reference,
                                    SeriesRole reference_role, double tolerance,
                                    bool use_reference_stderr = false);

// Same check on a single aggregate (graph-mean) series triple. When `grid`
// is given, violations are reported by time; otherwise by grid index.
ContainmentReport containment_check_series(const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& reference,
                                           const Eigen::VectorXd& upper, double tolerance,
                                           const Eigen::VectorXd* stderr_ = nullptr,
                                           const Eigen::VectorXd* grid = nullptr);

struct GapStats {
  double max_gap = 0.0;
  double mean_gap = 0.0;
  double time_of_max = 0.0;
  bool consistent = true;  // lower <= upper everywhere

  nlohmann::json to_json() const;
};

GapStats gap_stats(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                   const Eigen::VectorXd& grid);

// Per-compartment stats of the graph-mean gap of a paired bundle.
std::vector<GapStats> bundle_gap_stats(const TrajectoryBundle& bundle);

struct CovarianceSignEstimate {
  CovarianceSign sign = CovarianceSign::Unknown;
  bool consistent_nonnegative = false;
  bool consistent_nonpositive = false;
  double min_sigma = 0.0;
  double max_sigma = 0.0;
  double max_halfwidth = 0.0;  // largest 4-sigma confidence halfwidth used
};

// Diagnostic sign classification from an exact joint solution (halfwidth 0).
// Never writes a ledger; callers decide what to assert.
CovarianceSignEstimate estimate_covariance_sign(const JointSolution& joint, int i, int c, int j,
                                                int c2);

// Same from a Monte Carlo ensemble with retained per-trial snapshots.
CovarianceSignEstimate estimate_covariance_sign(const EnsembleEstimate& ensemble, int i, int c,
                                                int j, int c2);

}  // namespace spb
