#include "spreadbound/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace spb {

namespace {

bool valid_comp(int c, int comps) { return c >= 0 && c < comps; }

std::string pair_label(const std::vector<std::string>& names, int from, int to) {
  auto name = [&](int c) {
    return valid_comp(c, static_cast<int>(names.size())) ? names[c] : ("#" + std::to_string(c));
  };
  return "{" + name(from) + " -> " + name(to) + "}";
}

// FNV-1a over a byte stream; enough for content fingerprints in metadata.
struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      h ^= p[k];
      h *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace

ModelBuilder::ModelBuilder(std::vector<std::string> compartments, int nodes)
    : compartments_(std::move(compartments)), nodes_(nodes) {}

ModelBuilder& ModelBuilder::internal_rate(int node, int from, int to, double delta) {
  for (auto& t : internal_) {
    if (t.from == from && t.to == to) {
      if (node == kAllNodes)
        t.delta.setConstant(delta);
      else if (node >= 0 && node < nodes_)
        t.delta[node] = delta;
      else
        construction_issues_.push_back({Errc::UnknownNode, "internal rate at node " + std::to_string(node)});
      return *this;
    }
  }
  InternalTransition t;
  t.from = from;
  t.to = to;
  t.delta = Eigen::VectorXd::Zero(nodes_);
  internal_.push_back(std::move(t));
  return internal_rate(node, from, to, delta);
}

ModelBuilder& ModelBuilder::external_transition(int from, int to, std::vector<int> affectors) {
  std::sort(affectors.begin(), affectors.end());
  affectors.erase(std::unique(affectors.begin(), affectors.end()), affectors.end());
  if (find_external(from, to) >= 0) {
    construction_issues_.push_back(
        {Errc::DuplicateTransitionKind, "external transition redeclared: " + pair_label(compartments_, from, to)});
    return *this;
  }
  PendingExternal e;
  e.from = from;
  e.to = to;
  e.affectors = std::move(affectors);
  external_.push_back(std::move(e));
  return *this;
}

int ModelBuilder::find_external(int from, int to) const {
  for (int k = 0; k < static_cast<int>(external_.size()); ++k)
    if (external_[k].from == from && external_[k].to == to) return k;
  return -1;
}

ModelBuilder& ModelBuilder::external_rate(int from, int to, int affector, int node, int source,
                                          double beta) {
  const int k = find_external(from, to);
  if (k < 0) {
    construction_issues_.push_back(
        {Errc::UnknownCompartment,
         "rate for undeclared external transition " + pair_label(compartments_, from, to)});
    return *this;
  }
  if (node < 0 || node >= nodes_ || source < 0 || source >= nodes_) {
    construction_issues_.push_back({Errc::UnknownNode, "external rate node index out of range"});
    return *this;
  }
  external_[k].entries.emplace_back(node, source, beta);
  external_[k].entry_affector.push_back(affector);
  return *this;
}

ModelBuilder& ModelBuilder::external_rates_on_edges(int from, int to, int affector,
                                                    const EdgeList& graph, double beta) {
  for (const auto& [i, j] : graph.edges) {
    external_rate(from, to, affector, i, j, beta);
    external_rate(from, to, affector, j, i, beta);
  }
  return *this;
}

ModelBuilder& ModelBuilder::graph_metadata(EdgeList graph) {
  graph_ = std::move(graph);
  return *this;
}

std::vector<Issue> ModelBuilder::validate() const {
  std::vector<Issue> issues = construction_issues_;
  const int comps = static_cast<int>(compartments_.size());
  if (comps < 1) issues.push_back({Errc::UnknownCompartment, "model needs at least one compartment"});
  if (nodes_ < 1) issues.push_back({Errc::UnknownNode, "model needs at least one node"});

  std::set<std::string> seen_names(compartments_.begin(), compartments_.end());
  if (static_cast<int>(seen_names.size()) != comps)
    issues.push_back({Errc::UnknownCompartment, "duplicate compartment names"});

  auto check_rate = [&](double v, const std::string& what) {
    if (!std::isfinite(v))
      issues.push_back({Errc::NonFiniteRate, what});
    else if (v < 0.0)
      issues.push_back({Errc::NegativeRate, what});
  };

  std::set<std::pair<int, int>> internal_pairs;
  for (const auto& t : internal_) {
    const std::string label = pair_label(compartments_, t.from, t.to);
    if (!valid_comp(t.from, comps) || !valid_comp(t.to, comps))
      issues.push_back({Errc::UnknownCompartment, "internal transition " + label});
    else if (t.from == t.to)
      issues.push_back({Errc::UnknownCompartment, "internal self-transition " + label});
    if (!internal_pairs.insert({t.from, t.to}).second)
      issues.push_back({Errc::DuplicateTransitionKind, "internal transition redeclared: " + label});
    for (int i = 0; i < t.delta.size(); ++i)
      if (t.delta[i] != 0.0) check_rate(t.delta[i], "delta " + label + " at node " + std::to_string(i));
  }

  for (const auto& e : external_) {
    const std::string label = pair_label(compartments_, e.from, e.to);
    if (!valid_comp(e.from, comps) || !valid_comp(e.to, comps))
      issues.push_back({Errc::UnknownCompartment, "external transition " + label});
    else if (e.from == e.to)
      issues.push_back({Errc::UnknownCompartment, "external self-transition " + label});
    if (internal_pairs.count({e.from, e.to}))
      issues.push_back({Errc::DuplicateTransitionKind, label + " declared both internal and external"});
    if (e.affectors.empty()) issues.push_back({Errc::EmptyAffectorSet, "external transition " + label});
    for (int a : e.affectors)
      if (!valid_comp(a, comps))
        issues.push_back({Errc::UnknownCompartment, "affector of " + label});
    for (std::size_t k = 0; k < e.entries.size(); ++k) {
      const int a = e.entry_affector[k];
      if (std::find(e.affectors.begin(), e.affectors.end(), a) == e.affectors.end())
        issues.push_back({Errc::UnknownCompartment, "rate affector not in affector set of " + label});
      check_rate(e.entries[k].value(), "beta " + label);
      if (e.entries[k].row() == e.entries[k].col())
        issues.push_back({Errc::UnknownNode, "self-influence beta entry in " + label});
    }
  }
  return issues;
}

CompartmentalModel ModelBuilder::build() const {
  auto issues = validate();
  if (!issues.empty()) {
    throw Error(issues.front().code, format_issues(issues));
  }
  CompartmentalModel m;
  m.compartments_ = compartments_;
  m.nodes_ = nodes_;
  m.internal_ = internal_;
  std::sort(m.internal_.begin(), m.internal_.end(), [](const auto& a, const auto& b) {
    return std::pair(a.from, a.to) < std::pair(b.from, b.to);
  });
  for (const auto& pending : external_) {
    ExternalTransition e;
    e.from = pending.from;
    e.to = pending.to;
    e.affectors = pending.affectors;
    e.beta.resize(e.affectors.size());
    e.beta_by_source.resize(e.affectors.size());
    for (std::size_t k = 0; k < e.affectors.size(); ++k) {
      std::vector<Eigen::Triplet<double>> triplets;
      for (std::size_t q = 0; q < pending.entries.size(); ++q)
        if (pending.entry_affector[q] == e.affectors[k] && pending.entries[q].value() != 0.0)
          triplets.push_back(pending.entries[q]);
      RowSparse beta(nodes_, nodes_);
      beta.setFromTriplets(triplets.begin(), triplets.end());
      beta.makeCompressed();
      e.beta_by_source[k] = Eigen::SparseMatrix<double>(beta);
      e.beta[k] = std::move(beta);
    }
    m.external_.push_back(std::move(e));
  }
  std::sort(m.external_.begin(), m.external_.end(), [](const auto& a, const auto& b) {
    return std::pair(a.from, a.to) < std::pair(b.from, b.to);
  });

  const int comps = m.compartment_count();
  std::vector<std::set<int>> ext(comps), intr(comps);
  for (const auto& e : m.external_) {
    ext[e.from].insert(e.to);
    ext[e.to].insert(e.from);
  }
  for (const auto& t : m.internal_) {
    intr[t.from].insert(t.to);
    intr[t.to].insert(t.from);
  }
  m.external_partners_.resize(comps);
  m.internal_partners_.resize(comps);
  for (int c = 0; c < comps; ++c) {
    m.external_partners_[c].assign(ext[c].begin(), ext[c].end());
    m.internal_partners_[c].assign(intr[c].begin(), intr[c].end());
  }
  m.graph_ = graph_;
  return m;
}

int CompartmentalModel::compartment_index(const std::string& name) const {
  for (int c = 0; c < compartment_count(); ++c)
    if (compartments_[c] == name) return c;
  return -1;
}

double CompartmentalModel::internal_rate(int node, int from, int to) const {
  for (const auto& t : internal_)
    if (t.from == from && t.to == to) return t.delta[node];
  return 0.0;
}

double CompartmentalModel::transition_rate(const Configuration& x, int node, int from,
                                           int to) const {
  if (x[node] != from) return 0.0;
  for (const auto& e : external_) {
    if (e.from != from || e.to != to) continue;
    double rate = 0.0;
    for (std::size_t k = 0; k < e.affectors.size(); ++k) {
      const int affector = e.affectors[k];
      for (RowSparse::InnerIterator it(e.beta[k], node); it; ++it)
        if (x[it.col()] == affector) rate += it.value();
    }
    return rate;
  }
  return internal_rate(node, from, to);
}

bool CompartmentalModel::valid_configuration(const Configuration& x) const {
  if (x.size() != nodes_) return false;
  return (x.array() >= 0).all() && (x.array() < compartment_count()).all();
}

std::uint64_t CompartmentalModel::content_hash() const {
  Fnv fnv;
  fnv.u64(static_cast<std::uint64_t>(nodes_));
  for (const auto& name : compartments_) fnv.str(name);
  fnv.u64(internal_.size());
  for (const auto& t : internal_) {
    fnv.u64(static_cast<std::uint64_t>(t.from));
    fnv.u64(static_cast<std::uint64_t>(t.to));
    for (int i = 0; i < t.delta.size(); ++i) fnv.f64(t.delta[i]);
  }
  fnv.u64(external_.size());
  for (const auto& e : external_) {
    fnv.u64(static_cast<std::uint64_t>(e.from));
    fnv.u64(static_cast<std::uint64_t>(e.to));
    fnv.u64(e.affectors.size());
    for (std::size_t k = 0; k < e.affectors.size(); ++k) {
      fnv.u64(static_cast<std::uint64_t>(e.affectors[k]));
      for (int i = 0; i < nodes_; ++i)
        for (RowSparse::InnerIterator it(e.beta[k], i); it; ++it) {
          fnv.u64(static_cast<std::uint64_t>(it.row()));
          fnv.u64(static_cast<std::uint64_t>(it.col()));
          fnv.f64(it.value());
        }
    }
  }
  return fnv.h;
}

}  // namespace spb
