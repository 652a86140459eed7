#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

#include "spreadbound/errors.hpp"
#include "spreadbound/graph.hpp"

namespace spb {

/// One compartment per node; entry i is the compartment index of node i.
using Configuration = Eigen::VectorXi;

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Node-local transition c -> c' firing at rate delta(i), independent of
/// every other node.
struct InternalTransition {
  int from = -1;
  int to = -1;
  Eigen::VectorXd delta;  // per node
};

// Neighbor-driven transition c -> c'. Node j contributes beta[k](i, j) to
// node i's rate while j occupies affector compartment affectors[k].
struct ExternalTransition {
  int from = -1;
  int to = -1;
  std::vector<int> affectors;           // ascending compartment indices, nonempty
  std::vector<RowSparse> beta;          // one n-by-n rate matrix per affector
  std::vector<Eigen::SparseMatrix<double>> beta_by_source;  // column views: beta[k] by affecting node
};

class CompartmentalModel;

/// Staged description of a spreading process; validate() reports every
/// violation, build() returns the immutable model.
class ModelBuilder {
 public:
  ModelBuilder(std::vector<std::string> compartments, int nodes);

  ModelBuilder& internal_rate(int node, int from, int to, double delta);  // node == kAllNodes applies to all
  ModelBuilder& external_transition(int from, int to, std::vector<int> affectors);
  ModelBuilder& external_rate(int from, int to, int affector, int node, int source, double beta);
  // Symmetric rate on every edge of `graph`, for one affector compartment.
  ModelBuilder& external_rates_on_edges(int from, int to, int affector, const EdgeList& graph,
                                        double beta);
  ModelBuilder& graph_metadata(EdgeList graph);

  static constexpr int kAllNodes = -1;

  std::vector<Issue> validate() const;
  CompartmentalModel build() const;

 private:
  struct PendingExternal {
    int from, to;
    std::vector<int> affectors;
    std::vector<Eigen::Triplet<double>> entries;  // (affected, source) per affector index
    std::vector<int> entry_affector;              // parallel to entries
  };

  std::vector<std::string> compartments_;
  int nodes_;
  std::vector<InternalTransition> internal_;
  std::vector<PendingExternal> external_;
  std::optional<EdgeList> graph_;
  std::vector<Issue> construction_issues_;

  int find_external(int from, int to) const;
  friend class CompartmentalModel;
};

// The full process definition: compartments, node count, internal rate
// vectors, external rate tensors with affector sets, plus the precomputed
// partner classification E(c) / I(c). Immutable once built and safe to share
// across threads; all rate queries are pure.
class CompartmentalModel {
 public:
  int node_count() const { return nodes_; }
  int compartment_count() const { return static_cast<int>(compartments_.size()); }
  const std::vector<std::string>& compartments() const { return compartments_; }
  const std::string& compartment_name(int c) const { return compartments_[c]; }
  int compartment_index(const std::string& name) const;  // -1 when absent

  const std::vector<InternalTransition>& internal_transitions() const { return internal_; }
  const std::vector<ExternalTransition>& external_transitions() const { return external_; }

  // Partner sets per compartment: external_partners()[c] is the ascending
  // list of c' with {c->c'} or {c'->c} external; internal_partners() likewise.
  const std::vector<std::vector<int>>& external_partners() const { return external_partners_; }
  const std::vector<std::vector<int>>& internal_partners() const { return internal_partners_; }

  double internal_rate(int node, int from, int to) const;  // 0 when undeclared

  // Rate at which node i leaves `from` for `to` given the whole
  // configuration; 0 whenever x[i] != from or the pair is undeclared.
  double transition_rate(const Configuration& x, int node, int from, int to) const;

  const std::optional<EdgeList>& graph() const { return graph_; }

  bool valid_configuration(const Configuration& x) const;

  // Stable 64-bit digest of the full definition, for run metadata.
  std::uint64_t content_hash() const;

 private:
  friend class ModelBuilder;
  CompartmentalModel() = default;

  std::vector<std::string> compartments_;
  int nodes_ = 0;
  std::vector<InternalTransition> internal_;
  std::vector<ExternalTransition> external_;
  std::vector<std::vector<int>> external_partners_;
  std::vector<std::vector<int>> internal_partners_;
  std::optional<EdgeList> graph_;
};

}  // namespace spb
