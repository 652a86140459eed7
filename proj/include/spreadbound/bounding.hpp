#pragma once

#include <utility>
#include <vector>

#include "spreadbound/model.hpp"
#include "spreadbound/ode.hpp"
#include "spreadbound/trajectory.hpp"

namespace spb {

// Distribution-free bounds on P(A and B) from the marginals alone:
// max{0, a + b - 1} <= P(A and B) <= min{a, b}.
std::pair<double, double> frechet_bounds(double a, double b);

enum class CovarianceSign { Unknown, Nonnegative, Nonpositive };

const char* covariance_sign_name(CovarianceSign sign);

// Declared covariance signs for cross-node indicator pairs: sign(a, b)
// asserts the sign of cov(1{x_i = a}, 1{x_j = b}) for every i != j and all
// t. Symmetric in (a, b); default Unknown. The caller owns the truth of
// these claims; builders record the ledger in run metadata so every
// tightened system is auditable.
class CorrelationLedger {
 public:
  CorrelationLedger() = default;
  explicit CorrelationLedger(int comps) : comps_(comps), signs_(comps * comps, CovarianceSign::Unknown) {}

  CovarianceSign sign(int a, int b) const;
  void set(int a, int b, CovarianceSign sign);
  bool empty() const;
  int comps() const { return comps_; }

  nlohmann::json to_json(const std::vector<std::string>& names) const;

 private:
  int comps_ = 0;
  std::vector<CovarianceSign> signs_;
};

struct BoundingOptions {
  // Upper equations estimate own-node other-compartment probabilities by
  // 1 - (own upper) when true, by the tracked upper of the other
  // compartment when false. Both are valid; they differ in tightness per
  // state, and their trajectories may be merged with combine_bounds.
  bool complement_own_gain = true;
};

// Paired upper/lower system valid for any model: every cross-node joint
// probability replaced by the Frechet bound in the direction that keeps the
// trajectories sandwiching the exact marginals.
RhsSpec generic_bounding_rhs(const CompartmentalModel& model, const BoundingOptions& opts = {});

// Starts from the generic system and substitutes a product of tracked
// estimates for a Frechet bound exactly where the ledger licenses it: a
// joint needed from below with nonnegative covariance, or needed from above
// with nonpositive covariance. Licensed substitutions only ever tighten the
// right-hand sides, so the refined pair is pointwise inside the generic one.
RhsSpec refined_bounding_rhs(const CompartmentalModel& model, const CorrelationLedger& ledger,
                             const BoundingOptions& opts = {});

// Point-valued closure: every cross-node joint replaced by the product of
// point estimates; internal terms exact.
RhsSpec mean_field_rhs(const CompartmentalModel& model);

// Tightens a paired bundle through the unit-simplex identity: each lower is
// raised to 1 - sum of the other compartments' uppers, each upper cut to
// 1 - sum of the other lowers, pointwise per node and grid time. Idempotent
// and never loosening.
TrajectoryBundle eliminate_impossible(const TrajectoryBundle& bundle);

// Pointwise best envelope of several paired bundles over one grid:
// upper = min of uppers, lower = max of lowers.
TrajectoryBundle combine_bounds(const std::vector<TrajectoryBundle>& bundles);

}  // namespace spb
