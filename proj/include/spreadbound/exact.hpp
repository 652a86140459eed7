#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

#include "spreadbound/model.hpp"
#include "spreadbound/trajectory.hpp"

namespace spb {

// Joint master-equation machinery on the full |C|^n configuration space.
// Configurations are mixed-radix encoded with node 0 as the least
// significant digit (index = sum_i x_i * |C|^i). Exact but exponential:
// meant as a ground-truth instrument at small n.

std::int64_t state_space_size(const CompartmentalModel& model);  // -1 on overflow

std::int64_t default_state_cap();  // 10^6, overridable via SPREADBOUND_STATE_CAP

std::int64_t encode_configuration(const Configuration& x, int comps);
Configuration decode_configuration(std::int64_t index, int nodes, int comps);

// Forward generator of the joint chain. Q(s, s') is the rate of the single
// node flip turning s into s'; diagonal entries make every row sum to zero.
// Stored transposed (column s holds the flips out of s) so that the master
// equation right-hand side is the sparse product qt * pi.
struct GeneratorMatrix {
  Eigen::SparseMatrix<double> qt;  // qt(s', s) = Q(s, s')
  double q_inf_norm = 0.0;         // max_s sum_{s'} |Q(s, s')|

  std::int64_t states() const { return qt.rows(); }
  double rate(std::int64_t from, std::int64_t to) const { return qt.coeff(to, from); }
};

GeneratorMatrix build_generator(const CompartmentalModel& model,
                                std::int64_t state_cap = default_state_cap());

struct MasterSolveOptions {
  double max_step = 0.01;  // effective h also honors 0.1 / ||Q||_inf
  std::int64_t state_cap = default_state_cap();
};

// Exact joint distribution and marginals over a uniform grid.
struct JointSolution {
  Eigen::VectorXd grid;
  int nodes = 0;
  std::vector<std::string> compartments;
  std::vector<Eigen::VectorXd> joint;       // pi at each grid point
  std::vector<Eigen::ArrayXXd> marginals;   // n-by-C per grid point

  int comps() const { return static_cast<int>(compartments.size()); }

  // Pr(x_i = c, x_j = c2) at one grid index, read off the joint.
  double joint_probability(int t_index, int i, int c, int j, int c2) const;

  // Covariance series cov(1{x_i = c}, 1{x_j = c2}) over the grid.
  Eigen::VectorXd pair_covariance(int i, int c, int j, int c2) const;

  TrajectoryBundle as_bundle() const;  // marginals under the Exact role
};

// Integrates d(pi)/dt = pi Q with the shared RK4 stepper from an arbitrary
// joint distribution over the |C|^n configurations.
JointSolution solve_master(const CompartmentalModel& model, const Eigen::VectorXd& joint_init,
                           double t0, double horizon, double grid_step,
                           const MasterSolveOptions& options = {});

// Same, from the product of per-node compartment distributions (n-by-C rows
// summing to 1); point masses are one-hot rows.
JointSolution solve_master(const CompartmentalModel& model, const Eigen::ArrayXXd& init,
                           double t0, double horizon, double grid_step,
                           const MasterSolveOptions& options = {});

// Marginals n-by-C of a joint distribution vector.
Eigen::ArrayXXd joint_marginals(const Eigen::VectorXd& pi, int nodes, int comps);

// Product joint from per-node compartment distributions.
Eigen::VectorXd product_joint(const Eigen::ArrayXXd& init);

}  // namespace spb
