#include "spreadbound/metrics.hpp"

#include <cmath>

namespace spb {

double d_metric(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != g.size()) throw Error(Errc::GridMismatch, "series lengths differ");
  if (f.size() == 0) return 0.0;
  return (f - g).cwiseAbs().maxCoeff();
}

nlohmann::json ContainmentReport::to_json() const {
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : per_series)
    violations.push_back({{"node", v.node},
                          {"compartment", v.comp},
                          {"max_below", v.max_below},
                          {"max_above", v.max_above},
                          {"first_violation_time", v.first_violation_time}});
  return {{"pass", pass},
          {"tolerance", tolerance},
          {"max_violation", max_violation},
          {"violations", violations}};
}

ContainmentReport containment_check(const TrajectoryBundle& bounds, SeriesRole lower_role,
                                    SeriesRole upper_role, const TrajectoryBundle& reference,
                                    SeriesRole reference_role, double tolerance,
                                    bool use_reference_stderr) {
  if (!same_grid(bounds.grid, reference.grid))
    throw Error(Errc::GridMismatch, "bounds and reference use different grids");
  const auto& lower = bounds.at(lower_role);
  const auto& upper = bounds.at(upper_role);
  const auto& ref = reference.at(reference_role);
  const std::vector<Eigen::ArrayXXd>* stderr_ =
      use_reference_stderr ? &reference.at(SeriesRole::McStderr) : nullptr;

  ContainmentReport report;
  report.tolerance = tolerance;
  const int points = static_cast<int>(bounds.grid.size());
  for (int i = 0; i < bounds.nodes; ++i)
    for (int c = 0; c < bounds.comps(); ++c) {
      SeriesViolation v{i, c, 0.0, 0.0, -1.0};
      for (int t = 0; t < points; ++t) {
        const double tol =
            stderr_ ? std::max(tolerance, 4.0 * (*stderr_)[t](i, c)) : tolerance;
        const double below = lower[t](i, c) - ref[t](i, c);
        const double above = ref[t](i, c) - upper[t](i, c);
        if (below > tol || above > tol) {
          if (v.first_violation_time < 0.0) v.first_violation_time = bounds.grid[t];
          v.max_below = std::max(v.max_below, below);
          v.max_above = std::max(v.max_above, above);
        }
      }
      if (v.first_violation_time >= 0.0) {
        report.pass = false;
        report.max_violation =
            std::max({report.max_violation, v.max_below, v.max_above});
        report.per_series.push_back(v);
      }
    }
  return report;
}

ContainmentReport containment_check_series(const Eigen::VectorXd& lower,
                                           const Eigen::VectorXd& reference,
                                           const Eigen::VectorXd& upper, double tolerance,
                                           const Eigen::VectorXd* stderr_,
                                           const Eigen::VectorXd* grid) {
  if (lower.size() != reference.size() || upper.size() != reference.size())
    throw Error(Errc::GridMismatch, "series lengths differ");
  ContainmentReport report;
  report.tolerance = tolerance;
  SeriesViolation v{0, 0, 0.0, 0.0, -1.0};
  for (int t = 0; t < reference.size(); ++t) {
    const double tol = stderr_ ? std::max(tolerance, 4.0 * (*stderr_)[t]) : tolerance;
    const double below = lower[t] - reference[t];
    const double above = reference[t] - upper[t];
    if (below > tol || above > tol) {
      if (v.first_violation_time < 0.0) v.first_violation_time = grid ? (*grid)[t] : t;
      v.max_below = std::max(v.max_below, below);
      v.max_above = std::max(v.max_above, above);
    }
  }
  if (v.first_violation_time >= 0.0) {
    report.pass = false;
    report.max_violation = std::max(v.max_below, v.max_above);
    report.per_series.push_back(v);
  }
  return report;
}

nlohmann::json GapStats::to_json() const {
  return {{"max_gap", max_gap},
          {"mean_gap", mean_gap},
          {"time_of_max", time_of_max},
          {"consistent", consistent}};
}

GapStats gap_stats(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                   const Eigen::VectorXd& grid) {
  if (lower.size() != upper.size() || lower.size() != grid.size())
    throw Error(Errc::GridMismatch, "series lengths differ");
  GapStats stats;
  if (grid.size() == 0) return stats;
  double total = 0.0;
  for (int t = 0; t < grid.size(); ++t) {
    const double gap = upper[t] - lower[t];
    if (gap < 0.0) stats.consistent = false;
    total += gap;
    if (gap > stats.max_gap) {
      stats.max_gap = gap;
      stats.time_of_max = grid[t];
    }
  }
  stats.mean_gap = total / static_cast<double>(grid.size());
  return stats;
}

std::vector<GapStats> bundle_gap_stats(const TrajectoryBundle& bundle) {
  std::vector<GapStats> out;
  for (int c = 0; c < bundle.comps(); ++c)
    out.push_back(gap_stats(bundle.mean_series(SeriesRole::Lower, c),
                            bundle.mean_series(SeriesRole::Upper, c), bundle.grid));
  return out;
}

namespace {

CovarianceSignEstimate classify(const Eigen::VectorXd& sigma, const Eigen::VectorXd& halfwidth) {
  CovarianceSignEstimate est;
  est.min_sigma = sigma.minCoeff();
  est.max_sigma = sigma.maxCoeff();
  est.max_halfwidth = halfwidth.size() ? halfwidth.maxCoeff() : 0.0;
  est.consistent_nonnegative = ((sigma + halfwidth).array() >= 0.0).all();
  est.consistent_nonpositive = ((sigma - halfwidth).array() <= 0.0).all();
  if (est.consistent_nonnegative && !est.consistent_nonpositive)
    est.sign = CovarianceSign::Nonnegative;
  else if (est.consistent_nonpositive && !est.consistent_nonnegative)
    est.sign = CovarianceSign::Nonpositive;
  else if (est.consistent_nonnegative && est.consistent_nonpositive)
    est.sign = CovarianceSign::Nonnegative;  // indistinguishable from zero
  return est;
}

}  // namespace

CovarianceSignEstimate estimate_covariance_sign(const JointSolution& joint, int i, int c, int j,
                                                int c2) {
  const Eigen::VectorXd sigma = joint.pair_covariance(i, c, j, c2);
  return classify(sigma, Eigen::VectorXd::Zero(sigma.size()));
}

CovarianceSignEstimate estimate_covariance_sign(const EnsembleEstimate& ensemble, int i, int c,
                                                int j, int c2) {
  if (ensemble.snapshots.empty())
    throw Error(Errc::InsufficientTrials, "ensemble was run without retained paths");
  if (ensemble.trials < 2) throw Error(Errc::InsufficientTrials, "need at least two trials");

  const int points = static_cast<int>(ensemble.grid.size());
  const double m = static_cast<double>(ensemble.trials);
  Eigen::VectorXd sigma(points), halfwidth(points);
  for (int t = 0; t < points; ++t) {
    // Covariance as the mean of centered products, with a 4-sigma interval
    // from the sample spread of those products.
    const double pa = ensemble.mean[t](i, c);
    const double pb = ensemble.mean[t](j, c2);
    double sz = 0.0, szz = 0.0;
    for (const auto& snap : ensemble.snapshots) {
      const double za = (snap(t, i) == c ? 1.0 : 0.0) - pa;
      const double zb = (snap(t, j) == c2 ? 1.0 : 0.0) - pb;
      const double z = za * zb;
      sz += z;
      szz += z * z;
    }
    sigma[t] = sz / m;
    const double var = std::max(0.0, (szz - sz * sz / m) / (m - 1.0));
    halfwidth[t] = 4.0 * std::sqrt(var / m);
  }
  return classify(sigma, halfwidth);
}

}  // namespace spb
