#include "spreadbound/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "spreadbound/errors.hpp"

namespace spb {

Configuration EventPath::state_at(double t) const {
  Configuration x = init;
  for (const auto& e : events) {
    if (e.time > t) break;
    x[e.node] = e.to;
  }
  return x;
}

namespace {

// Canonical per-compartment enumeration of outgoing transitions: internal
// first, external second, each in the model's (from, to)-sorted order. Node
// rates and event selection walk this same list, so their cumulative sums
// agree bit for bit.
struct OutTransitions {
  struct Internal {
    int to;
    const Eigen::VectorXd* delta;
  };
  struct External {
    int index;  // into model.external_transitions()
    int to;
  };
  std::vector<std::vector<Internal>> internal_from;
  std::vector<std::vector<External>> external_from;

  explicit OutTransitions(const CompartmentalModel& model)
      : internal_from(model.compartment_count()), external_from(model.compartment_count()) {
    for (const auto& t : model.internal_transitions())
      internal_from[t.from].push_back({t.to, &t.delta});
    const auto& ext = model.external_transitions();
    for (int e = 0; e < static_cast<int>(ext.size()); ++e)
      external_from[ext[e].from].push_back({e, ext[e].to});
  }
};

// Direct-method chain state. External pressure lambda[e](i) (the rate node i
// would leave ext[e].from at, given the current neighbor memberships) is
// maintained incrementally: one event touches only the flipped node's
// columns, O(out-degree) work.
class ChainState {
 public:
  ChainState(const CompartmentalModel& model, const OutTransitions& out)
      : model_(model), out_(out), node_rate_(model.node_count()) {
    lambda_.reserve(model.external_transitions().size());
    for (const auto& e : model.external_transitions()) {
      (void)e;
      lambda_.emplace_back(Eigen::VectorXd::Zero(model.node_count()));
    }
  }

  void reset(const Configuration& init) {
    x_ = init;
    const auto& ext = model_.external_transitions();
    for (std::size_t e = 0; e < ext.size(); ++e) {
      lambda_[e].setZero();
      for (std::size_t k = 0; k < ext[e].affectors.size(); ++k) {
        const int affector = ext[e].affectors[k];
        const auto& cols = ext[e].beta_by_source[k];
        for (int j = 0; j < model_.node_count(); ++j) {
          if (x_[j] != affector) continue;
          for (Eigen::SparseMatrix<double>::InnerIterator it(cols, j); it; ++it)
            lambda_[e][it.row()] += it.value();
        }
      }
    }
    for (int i = 0; i < model_.node_count(); ++i) refresh_node_rate(i);
  }

  double total_rate() const {
    double total = 0.0;
    for (int i = 0; i < node_rate_.size(); ++i) total += node_rate_[i];
    return total;
  }

  const Configuration& config() const { return x_; }

  // Picks the event for a selection target in [0, total rate); returns
  // (node, to). Cumulative walk with strict inequality; the last positive
  // category absorbs the floating-point residue.
  std::pair<int, int> select(double target) const {
    double cum = 0.0;
    int node = -1;
    for (int i = 0; i < node_rate_.size(); ++i) {
      if (node_rate_[i] <= 0.0) continue;
      node = i;
      const double before = cum;
      cum += node_rate_[i];
      if (target < cum) return {i, select_within(i, target - before)};
    }
    return {node, node < 0 ? -1 : select_within(node, node_rate_[node])};
  }

  void apply(int node, int to) {
    const int from = x_[node];
    const auto& ext = model_.external_transitions();
    for (std::size_t e = 0; e < ext.size(); ++e) {
      for (std::size_t k = 0; k < ext[e].affectors.size(); ++k) {
        const int affector = ext[e].affectors[k];
        const double sign = (affector == to ? 1.0 : 0.0) - (affector == from ? 1.0 : 0.0);
        if (sign == 0.0) continue;
        const auto& cols = ext[e].beta_by_source[k];
        for (Eigen::SparseMatrix<double>::InnerIterator it(cols, node); it; ++it) {
          double& cell = lambda_[e][it.row()];
          cell = std::max(0.0, cell + sign * it.value());
          dirty_.push_back(static_cast<int>(it.row()));
        }
      }
    }
    x_[node] = to;
    dirty_.push_back(node);
    std::sort(dirty_.begin(), dirty_.end());
    dirty_.erase(std::unique(dirty_.begin(), dirty_.end()), dirty_.end());
    for (int i : dirty_) refresh_node_rate(i);
    dirty_.clear();
  }

 private:
  int select_within(int i, double local) const {
    const int c = x_[i];
    double cum = 0.0;
    int last = -1;
    for (const auto& t : out_.internal_from[c]) {
      const double r = (*t.delta)[i];
      if (r <= 0.0) continue;
      last = t.to;
      cum += r;
      if (local < cum) return t.to;
    }
    for (const auto& t : out_.external_from[c]) {
      const double r = lambda_[t.index][i];
      if (r <= 0.0) continue;
      last = t.to;
      cum += r;
      if (local < cum) return t.to;
    }
    return last;
  }

  void refresh_node_rate(int i) {
    const int c = x_[i];
    double rate = 0.0;
    for (const auto& t : out_.internal_from[c]) rate += (*t.delta)[i];
    for (const auto& t : out_.external_from[c]) rate += lambda_[t.index][i];
    node_rate_[i] = rate;
  }

  const CompartmentalModel& model_;
  const OutTransitions& out_;
  Configuration x_;
  std::vector<Eigen::VectorXd> lambda_;
  Eigen::VectorXd node_rate_;
  std::vector<int> dirty_;
};

Configuration sample_initial(const Eigen::ArrayXXd& init, CounterRng& rng) {
  const int n = static_cast<int>(init.rows());
  const int comps = static_cast<int>(init.cols());
  Configuration x(n);
  for (int i = 0; i < n; ++i) {
    int fixed = -1;
    for (int c = 0; c < comps; ++c)
      if (init(i, c) == 1.0) fixed = c;
    if (fixed >= 0) {
      x[i] = fixed;
      continue;
    }
    std::vector<double> weights(comps);
    for (int c = 0; c < comps; ++c) weights[c] = init(i, c);
    x[i] = rng.next_categorical(weights, 1.0);
  }
  return x;
}

void check_init(const CompartmentalModel& model, const Eigen::ArrayXXd& init) {
  if (init.rows() != model.node_count() || init.cols() != model.compartment_count())
    throw Error(Errc::InvalidProbability, "initial distribution shape does not match the model");
  if ((init < 0.0).any() || (init > 1.0).any())
    throw Error(Errc::InvalidProbability, "initial distribution entries outside [0,1]");
  for (int i = 0; i < init.rows(); ++i)
    if (std::abs(init.row(i).sum() - 1.0) > 1e-9)
      throw Error(Errc::InvalidProbability,
                  "initial distribution row " + std::to_string(i) + " does not sum to 1");
}

}  // namespace

EventPath gillespie_path(const CompartmentalModel& model, const Configuration& init,
                         double horizon, CounterRng& rng) {
  if (!(horizon > 0.0)) throw Error(Errc::GridInvalid, "horizon must be positive");
  if (!model.valid_configuration(init))
    throw Error(Errc::UnknownCompartment, "initial configuration invalid for the model");

  OutTransitions out(model);
  ChainState chain(model, out);
  chain.reset(init);

  EventPath path;
  path.init = init;
  path.horizon = horizon;
  double t = 0.0;
  for (;;) {
    const double total = chain.total_rate();
    if (total <= 0.0) break;
    double next = t + rng.next_exponential(total);
    if (next <= t) next = std::nextafter(t, horizon + 1.0);
    if (next > horizon) break;
    const double target = rng.next_unit_open() * total;
    const auto [node, to] = chain.select(target);
    if (node < 0 || to < 0) break;
    path.events.push_back({next, node, chain.config()[node], to});
    chain.apply(node, to);
    t = next;
  }
  return path;
}

namespace {

using Snapshot = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// One trial: simulate and sample the path on the grid (right-continuous
// between events). 2 draws per event, preceded by n init draws when the
// initial distribution is not deterministic.
Snapshot run_trial(const CompartmentalModel& model, const OutTransitions& out,
                   const Eigen::ArrayXXd& init, double t0, double horizon,
                   const Eigen::VectorXd& grid, std::uint64_t seed, long trial) {
  CounterRng rng(seed, rng::kTrialStreamBase + static_cast<std::uint64_t>(trial));
  const Configuration start = sample_initial(init, rng);

  ChainState chain(model, out);
  chain.reset(start);

  const int n = model.node_count();
  Snapshot snap(grid.size(), n);
  int gi = 0;
  auto record_until = [&](double limit) {
    while (gi < grid.size() && grid[gi] < limit) {
      for (int i = 0; i < n; ++i) snap(gi, i) = static_cast<std::uint8_t>(chain.config()[i]);
      ++gi;
    }
  };

  double t = t0;
  while (gi < grid.size()) {
    const double total = chain.total_rate();
    if (total <= 0.0) break;
    double next = t + rng.next_exponential(total);
    if (next <= t) next = std::nextafter(t, horizon + 1.0);
    if (next > horizon) break;
    record_until(next);
    const double target = rng.next_unit_open() * total;
    const auto [node, to] = chain.select(target);
    if (node < 0 || to < 0) break;
    chain.apply(node, to);
    t = next;
  }
  record_until(horizon + 1.0);  // tail: state frozen after the last event
  return snap;
}

}  // namespace

EnsembleEstimate ensemble_estimate(const CompartmentalModel& model, const Eigen::ArrayXXd& init,
                                   double t0, double horizon, long trials,
                                   const Eigen::VectorXd& grid, std::uint64_t seed,
                                   const EnsembleOptions& options) {
  if (trials < 1) throw Error(Errc::InsufficientTrials, "need at least one trial");
  if (!(horizon > t0)) throw Error(Errc::GridInvalid, "horizon must exceed t0");
  for (int k = 0; k < grid.size(); ++k) {
    if (grid[k] < t0 || grid[k] > horizon)
      throw Error(Errc::GridInvalid, "grid point outside [t0, horizon]");
    if (k > 0 && grid[k] <= grid[k - 1])
      throw Error(Errc::GridInvalid, "grid must be strictly increasing");
  }
  check_init(model, init);

  const OutTransitions out(model);
  std::vector<Snapshot> snapshots(trials);

  int workers = options.workers;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (static_cast<long>(workers) > trials) workers = static_cast<int>(trials);
  const long chunk = (trials + workers - 1) / workers;
  {
    std::vector<std::future<void>> futures;
    for (int w = 0; w < workers; ++w) {
      const long begin = w * chunk;
      const long end = std::min<long>(trials, begin + chunk);
      if (begin >= end) break;
      futures.push_back(std::async(std::launch::async, [&, begin, end] {
        for (long trial = begin; trial < end; ++trial)
          snapshots[trial] = run_trial(model, out, init, t0, horizon, grid, seed, trial);
      }));
    }
    for (auto& f : futures) f.get();
  }

  const int n = model.node_count();
  const int comps = model.compartment_count();
  const int points = static_cast<int>(grid.size());
  const double m = static_cast<double>(trials);

  EnsembleEstimate est;
  est.grid = grid;
  est.nodes = n;
  est.compartments = model.compartments();
  est.trials = trials;
  est.seed = seed;
  est.mean.assign(points, Eigen::ArrayXXd::Zero(n, comps));
  est.stderr_.assign(points, Eigen::ArrayXXd::Zero(n, comps));
  est.agg_mean.assign(points, Eigen::ArrayXd::Zero(comps));
  est.agg_stderr.assign(points, Eigen::ArrayXd::Zero(comps));

  // Indicator counts reduce in trial order; integers make the reduction
  // independent of the worker layout.
  std::vector<Eigen::ArrayXXi> counts(points, Eigen::ArrayXXi::Zero(n, comps));
  for (long trial = 0; trial < trials; ++trial)
    for (int t = 0; t < points; ++t)
      for (int i = 0; i < n; ++i) counts[t](i, snapshots[trial](t, i)) += 1;

  for (int t = 0; t < points; ++t) {
    est.mean[t] = counts[t].cast<double>() / m;
    if (trials > 1)
      est.stderr_[t] = (est.mean[t] * (1.0 - est.mean[t]) / (m - 1.0)).sqrt();
    for (int c = 0; c < comps; ++c)
      est.agg_mean[t][c] = static_cast<double>(counts[t].col(c).sum()) / (m * n);
  }

  // Aggregate standard error from per-trial graph means (node indicators are
  // correlated, so it is not derivable from the per-node errors).
  if (trials > 1) {
    for (int t = 0; t < points; ++t)
      for (int c = 0; c < comps; ++c) {
        double sx = 0.0, sxx = 0.0;
        for (long trial = 0; trial < trials; ++trial) {
          int node_count = 0;
          for (int i = 0; i < n; ++i)
            if (snapshots[trial](t, i) == c) ++node_count;
          const double x = static_cast<double>(node_count) / n;
          sx += x;
          sxx += x * x;
        }
        const double var = std::max(0.0, (sxx - sx * sx / m) / (m - 1.0));
        est.agg_stderr[t][c] = std::sqrt(var / m);
      }
  }

  if (options.retain_paths) est.snapshots = std::move(snapshots);
  return est;
}

TrajectoryBundle EnsembleEstimate::as_bundle() const {
  TrajectoryBundle bundle;
  bundle.grid = grid;
  bundle.nodes = nodes;
  bundle.compartments = compartments;
  bundle.series[SeriesRole::Mc] = mean;
  bundle.series[SeriesRole::McStderr] = stderr_;
  bundle.aggregate[SeriesRole::Mc] = agg_mean;
  bundle.aggregate[SeriesRole::McStderr] = agg_stderr;
  bundle.metadata["builder"] = "mc";
  bundle.metadata["trials"] = trials;
  bundle.metadata["seed"] = seed;
  bundle.metadata["rng"] = std::string(rng::kAlgorithm);
  return bundle;
}

}  // namespace spb
