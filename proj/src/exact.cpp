#include "spreadbound/exact.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "spreadbound/ode.hpp"

namespace spb {

std::int64_t state_space_size(const CompartmentalModel& model) {
  std::int64_t size = 1;
  const std::int64_t comps = model.compartment_count();
  for (int i = 0; i < model.node_count(); ++i) {
    if (size > (std::int64_t{1} << 62) / comps) return -1;
    size *= comps;
  }
  return size;
}

std::int64_t default_state_cap() {
  if (const char* env = std::getenv("SPREADBOUND_STATE_CAP")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 1'000'000;
}

std::int64_t encode_configuration(const Configuration& x, int comps) {
  std::int64_t index = 0;
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) index = index * comps + x[i];
  return index;
}

Configuration decode_configuration(std::int64_t index, int nodes, int comps) {
  Configuration x(nodes);
  for (int i = 0; i < nodes; ++i) {
    x[i] = static_cast<int>(index % comps);
    index /= comps;
  }
  return x;
}

namespace {

std::int64_t checked_state_count(const CompartmentalModel& model, std::int64_t state_cap) {
  const std::int64_t states = state_space_size(model);
  if (states < 0 || states > state_cap)
    throw Error(Errc::StateSpaceTooLarge,
                "joint space has " + (states < 0 ? std::string("> 2^62") : std::to_string(states)) +
                    " states, cap is " + std::to_string(state_cap));
  return states;
}

}  // namespace

GeneratorMatrix build_generator(const CompartmentalModel& model, std::int64_t state_cap) {
  const std::int64_t states = checked_state_count(model, state_cap);
  const int n = model.node_count();
  const int comps = model.compartment_count();
  std::vector<std::int64_t> stride(n);
  {
    std::int64_t s = 1;
    for (int i = 0; i < n; ++i) {
      stride[i] = s;
      s *= comps;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  double inf_norm = 0.0;
  Configuration x(n);
  for (std::int64_t s = 0; s < states; ++s) {
    {
      std::int64_t rem = s;
      for (int i = 0; i < n; ++i) {
        x[i] = static_cast<int>(rem % comps);
        rem /= comps;
      }
    }
    double exit = 0.0;
    for (int i = 0; i < n; ++i) {
      const int from = x[i];
      for (int to = 0; to < comps; ++to) {
        if (to == from) continue;
        const double rate = model.transition_rate(x, i, from, to);
        if (rate == 0.0) continue;
        const std::int64_t target = s + (to - from) * stride[i];
        // Stored transposed: column s collects the flips out of s.
        triplets.emplace_back(target, s, rate);
        exit += rate;
      }
    }
    if (exit != 0.0) triplets.emplace_back(s, s, -exit);
    inf_norm = std::max(inf_norm, 2.0 * exit);
  }

  GeneratorMatrix gen;
  gen.qt.resize(states, states);
  gen.qt.setFromTriplets(triplets.begin(), triplets.end());
  gen.qt.makeCompressed();
  gen.q_inf_norm = inf_norm;
  return gen;
}

Eigen::ArrayXXd joint_marginals(const Eigen::VectorXd& pi, int nodes, int comps) {
  Eigen::ArrayXXd marg = Eigen::ArrayXXd::Zero(nodes, comps);
  std::int64_t states = pi.size();
  for (std::int64_t s = 0; s < states; ++s) {
    std::int64_t rem = s;
    const double p = pi[s];
    for (int i = 0; i < nodes; ++i) {
      marg(i, static_cast<int>(rem % comps)) += p;
      rem /= comps;
    }
  }
  return marg;
}

Eigen::VectorXd product_joint(const Eigen::ArrayXXd& init) {
  const int n = static_cast<int>(init.rows());
  const int comps = static_cast<int>(init.cols());
  std::int64_t states = 1;
  for (int i = 0; i < n; ++i) states *= comps;
  Eigen::VectorXd pi(states);
  for (std::int64_t s = 0; s < states; ++s) {
    std::int64_t rem = s;
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      p *= init(i, static_cast<int>(rem % comps));
      rem /= comps;
    }
    pi[s] = p;
  }
  return pi;
}

JointSolution solve_master(const CompartmentalModel& model, const Eigen::VectorXd& joint_init,
                           double t0, double horizon, double grid_step,
                           const MasterSolveOptions& options) {
  if (!(horizon > t0)) throw Error(Errc::GridInvalid, "horizon must exceed t0");
  if (!(grid_step > 0.0)) throw Error(Errc::GridInvalid, "grid step must be positive");

  const GeneratorMatrix gen = build_generator(model, options.state_cap);
  if (joint_init.size() != gen.states())
    throw Error(Errc::InvalidProbability, "joint distribution has the wrong dimension");
  if (joint_init.minCoeff() < -1e-9 || joint_init.maxCoeff() > 1.0 + 1e-9 ||
      std::abs(joint_init.sum() - 1.0) > 1e-9)
    throw Error(Errc::InvalidProbability, "joint distribution entries must lie in [0,1] and sum to 1");
  double cap = options.max_step;
  if (gen.q_inf_norm > 0.0) cap = std::min(cap, 0.1 / gen.q_inf_norm);
  const int substeps = ode_detail::substeps_per_cell(grid_step, cap);
  const double h = grid_step / substeps;
  const int cells = static_cast<int>(std::floor((horizon - t0) / grid_step + 1e-9));
  if (cells < 1) throw Error(Errc::GridInvalid, "horizon shorter than one grid step");

  JointSolution sol;
  sol.nodes = model.node_count();
  sol.compartments = model.compartments();
  sol.grid.resize(cells + 1);
  sol.joint.reserve(cells + 1);
  sol.marginals.reserve(cells + 1);

  Eigen::VectorXd pi = joint_init;
  auto record = [&](int cell) {
    sol.grid[cell] = t0 + cell * grid_step;
    sol.joint.push_back(pi);
    sol.marginals.push_back(joint_marginals(pi, sol.nodes, sol.comps()));
  };
  record(0);

  const auto rhs = [&gen](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = gen.qt * y; };
  Eigen::VectorXd k1(pi.size()), k2(pi.size()), k3(pi.size()), k4(pi.size()), scratch(pi.size());
  for (int cell = 1; cell <= cells; ++cell) {
    for (int sub = 0; sub < substeps; ++sub) ode_detail::rk4_step(rhs, pi, h, k1, k2, k3, k4, scratch);
    if (!pi.allFinite()) throw Error(Errc::NonFiniteDerivative, "master solve diverged");
    record(cell);
  }
  return sol;
}

JointSolution solve_master(const CompartmentalModel& model, const Eigen::ArrayXXd& init,
                           double t0, double horizon, double grid_step,
                           const MasterSolveOptions& options) {
  if (init.rows() != model.node_count() || init.cols() != model.compartment_count())
    throw Error(Errc::GridInvalid, "initial condition shape does not match the model");
  checked_state_count(model, options.state_cap);  // before materializing the joint
  return solve_master(model, product_joint(init), t0, horizon, grid_step, options);
}

double JointSolution::joint_probability(int t_index, int i, int c, int j, int c2) const {
  if (i == j) return c == c2 ? marginals[t_index](i, c) : 0.0;
  const int comp_count = comps();
  const Eigen::VectorXd& pi = joint[t_index];
  std::int64_t stride_i = 1, stride_j = 1;
  for (int k = 0; k < i; ++k) stride_i *= comp_count;
  for (int k = 0; k < j; ++k) stride_j *= comp_count;
  double total = 0.0;
  for (std::int64_t s = 0; s < pi.size(); ++s)
    if ((s / stride_i) % comp_count == c && (s / stride_j) % comp_count == c2) total += pi[s];
  return total;
}

Eigen::VectorXd JointSolution::pair_covariance(int i, int c, int j, int c2) const {
  Eigen::VectorXd sigma(grid.size());
  for (int t = 0; t < grid.size(); ++t)
    sigma[t] = joint_probability(t, i, c, j, c2) - marginals[t](i, c) * marginals[t](j, c2);
  return sigma;
}

TrajectoryBundle JointSolution::as_bundle() const {
  TrajectoryBundle bundle;
  bundle.grid = grid;
  bundle.nodes = nodes;
  bundle.compartments = compartments;
  bundle.series[SeriesRole::Exact] = marginals;
  bundle.metadata["builder"] = "exact";
  return bundle;
}

}  // namespace spb
