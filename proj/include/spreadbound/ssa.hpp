#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "spreadbound/model.hpp"
#include "spreadbound/rng.hpp"
#include "spreadbound/trajectory.hpp"

namespace spb {

struct Event {
  double time;
  int node;
  int from;
  int to;
};

struct EventPath {
  Configuration init;
  std::vector<Event> events;  // strictly increasing times, all <= horizon
  double horizon = 0.0;

  Configuration state_at(double t) const;  // right-continuous step function
};

// Exact direct-method sample of one chain trajectory: total-rate exponential
// waiting times, rate-proportional event selection, absorbing when the total
// rate hits zero. Rate bookkeeping is incremental: an event touches only the
// flipped node and the nodes it can affect.
EventPath gillespie_path(const CompartmentalModel& model, const Configuration& init,
                         double horizon, CounterRng& rng);

struct EnsembleOptions {
  int workers = 0;           // 0 = hardware concurrency
  bool retain_paths = false; // keep per-trial compartment snapshots
};

// Ensemble estimate of compartment membership probabilities on a grid.
// Trial k draws from the sub-stream keyed by (seed, trial k); the reduction
// counts indicators in trial order, so results are bit-identical for any
// worker count.
struct EnsembleEstimate {
  Eigen::VectorXd grid;
  int nodes = 0;
  std::vector<std::string> compartments;
  std::vector<Eigen::ArrayXXd> mean;     // n-by-C per grid point
  std::vector<Eigen::ArrayXXd> stderr_;  // same shape; 0 when trials == 1
  // Graph-mean estimate per compartment with its own standard error (node
  // indicators are correlated, so this cannot be derived from the rows).
  std::vector<Eigen::ArrayXd> agg_mean;
  std::vector<Eigen::ArrayXd> agg_stderr;
  long trials = 0;
  std::uint64_t seed = 0;
  // retain_paths: snapshot(trial)(t, node) = compartment index.
  std::vector<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> snapshots;

  TrajectoryBundle as_bundle() const;  // roles Mc and McStderr
};

// `init` rows are per-node compartment distributions; one-hot rows make the
// start deterministic, anything else is sampled per trial (n draws before
// the path draws).
EnsembleEstimate ensemble_estimate(const CompartmentalModel& model, const Eigen::ArrayXXd& init,
                                   double t0, double horizon, long trials,
                                   const Eigen::VectorXd& grid, std::uint64_t seed,
                                   const EnsembleOptions& options = {});

}  // namespace spb
