#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "json.hpp"
#include "spreadbound/model.hpp"
#include "spreadbound/trajectory.hpp"

namespace spb {

// An evaluable vector field over a flat state vector, tagged with the
// builder that produced it. `eval` must be pure; `algebraic_fixup`, when
// set, restores derived state entries after every step (systems that track
// only part of the state differentially and define the rest by identities).
// Specs reference rate storage inside the model they were built from; the
// model must outlive the spec.
struct RhsSpec {
  StateLayout layout;
  std::string kind;
  double lipschitz = 0.0;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval;
  std::function<void(Eigen::VectorXd&)> algebraic_fixup;
  nlohmann::json metadata = nlohmann::json::object();
};

struct IntegrationPolicy {
  double max_step = 0.01;  // cap on h; effective h also honors 0.1 / L
  double grid_step = 0.1;  // output cadence; an integer multiple of h
  bool clip = true;        // clamp to [0,1] and lower <= upper after each step
};

struct IntegrationResult {
  TrajectoryBundle bundle;
  // State extrema observed after each step before clipping, over the run.
  double preclip_min = 0.0;
  double preclip_max = 0.0;
  double step_used = 0.0;
};

// Worst-case per-equation rate budget: for each (node, compartment), the sum
// of all inbound rates (external gains over every potential source plus
// internal gains) and all outbound rates, maximized over nodes and
// compartments. Bounds the Jacobian row sum of every system built from the
// model, so it serves as a global Lipschitz constant for the step policy.
double lipschitz_constant(const CompartmentalModel& model);

// Classical fixed-step RK4 from t0 to t0 + K * grid_step covering horizon.
// h = grid_step / ceil(grid_step / min(policy.max_step, 0.1/L)), so every
// grid point is hit exactly. Deterministic: identical inputs give
// bit-identical trajectories.
IntegrationResult integrate(const RhsSpec& rhs, const Eigen::ArrayXXd& init, double t0,
                            double horizon, const IntegrationPolicy& policy,
                            const std::vector<std::string>& compartments);

namespace ode_detail {

// One RK4 step (shared by every deterministic solve in the project).
template <class F>
void rk4_step(F&& f, Eigen::VectorXd& y, double h, Eigen::VectorXd& k1, Eigen::VectorXd& k2,
              Eigen::VectorXd& k3, Eigen::VectorXd& k4, Eigen::VectorXd& scratch) {
  f(y, k1);
  scratch = y + (0.5 * h) * k1;
  f(scratch, k2);
  scratch = y + (0.5 * h) * k2;
  f(scratch, k3);
  scratch = y + h * k3;
  f(scratch, k4);
  y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Number of RK4 substeps per grid cell for a step cap.
int substeps_per_cell(double grid_step, double step_cap);

}  // namespace ode_detail

}  // namespace spb
