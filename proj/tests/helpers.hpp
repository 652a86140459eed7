#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "spreadbound/catalog.hpp"
#include "spreadbound/model.hpp"
#include "spreadbound/rng.hpp"

namespace test_helpers {

// Dense matrix exponential by scaling and squaring with a Taylor series to
// machine precision. Independent of the RK4 path it is used to check.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXd b = a * scale;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 40; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Uniform rate in (lo, hi]; strictly positive draws for rate parameters.
inline double rate_in(spb::CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * (1.0 - rng.next_unit_open());
}

// Random fully-internal model: every ordered compartment pair gets an
// independent uniform rate in (0, 2] with probability 1/2, node-uniform.
inline spb::CompartmentalModel random_internal_model(int nodes, int comps, std::uint64_t seed) {
  spb::CounterRng rng(seed, 0xC0FFEE);
  std::vector<std::string> names;
  for (int c = 0; c < comps; ++c) names.push_back("C" + std::to_string(c));
  spb::ModelBuilder builder(names, nodes);
  bool any = false;
  for (int a = 0; a < comps; ++a)
    for (int b = 0; b < comps; ++b) {
      if (a == b) continue;
      if (rng.next_unit_open() < 0.5) {
        builder.internal_rate(spb::ModelBuilder::kAllNodes, a, b, rate_in(rng, 0.0, 2.0));
        any = true;
      }
    }
  if (!any) builder.internal_rate(spb::ModelBuilder::kAllNodes, 0, comps > 1 ? 1 : 0, 1.0);
  return builder.build();
}

// Seeded catalog instance on an Erdos-Renyi graph with rates in (0, 2].
inline spb::CompartmentalModel random_catalog_model(spb::CatalogKind kind, int nodes, double p,
                                                    std::uint64_t seed) {
  spb::CounterRng rng(seed, 0xBEEF);
  const spb::EdgeList graph = spb::erdos_renyi_edges(nodes, p, seed);
  switch (kind) {
    case spb::CatalogKind::SIS:
      return spb::build_sis(graph, {rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0)});
    case spb::CatalogKind::SIR:
      return spb::build_sir(graph, {rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0)});
    case spb::CatalogKind::SI1SI2S:
      return spb::build_si1si2s(graph, {rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0),
                                        rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0)});
    case spb::CatalogKind::SEIV:
      return spb::build_seiv(graph, {rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0),
                                     rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0),
                                     rate_in(rng, 0.0, 2.0), rate_in(rng, 0.0, 2.0)});
  }
  throw std::logic_error("unreachable");
}

// Random heterogeneous model: every ordered compartment pair independently
// becomes internal (per-node rates), external (random nonempty affector set,
// sparse directed rates), or absent. Exercises shapes the curated models
// never produce: multi-affector transitions, asymmetric rates, nodes with
// one-way influence.
inline spb::CompartmentalModel random_general_model(int nodes, int comps, std::uint64_t seed) {
  spb::CounterRng rng(seed, 0xD15EA5E);
  std::vector<std::string> names;
  for (int c = 0; c < comps; ++c) names.push_back("C" + std::to_string(c));
  spb::ModelBuilder builder(names, nodes);
  bool any = false;
  for (int a = 0; a < comps; ++a)
    for (int b = 0; b < comps; ++b) {
      if (a == b) continue;
      const double roll = rng.next_unit_open();
      if (roll < 0.35) {
        for (int i = 0; i < nodes; ++i)
          builder.internal_rate(i, a, b, rate_in(rng, 0.0, 2.0) * (rng.next_unit_open() < 0.8));
        any = true;
      } else if (roll < 0.70) {
        std::vector<int> affectors;
        for (int c = 0; c < comps; ++c)
          if (rng.next_unit_open() < 0.5) affectors.push_back(c);
        if (affectors.empty()) affectors.push_back(static_cast<int>(rng.next_u64() % comps));
        builder.external_transition(a, b, affectors);
        for (int aff : affectors)
          for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j)
              if (i != j && rng.next_unit_open() < 0.5)
                builder.external_rate(a, b, aff, i, j, rate_in(rng, 0.0, 2.0));
        any = true;
      }
    }
  if (!any) builder.internal_rate(spb::ModelBuilder::kAllNodes, 0, 1 % comps, 1.0);
  return builder.build();
}

// Deterministic mixed point initial condition: node i starts in compartment
// i mod |C|.
inline Eigen::ArrayXXd striped_init(const spb::CompartmentalModel& model) {
  Eigen::ArrayXXd init = Eigen::ArrayXXd::Zero(model.node_count(), model.compartment_count());
  for (int i = 0; i < model.node_count(); ++i) init(i, i % model.compartment_count()) = 1.0;
  return init;
}

// Random paired bound state with lower <= upper, entries in [0, 1].
inline std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd> random_bound_state(int nodes, int comps,
                                                                      spb::CounterRng& rng) {
  Eigen::ArrayXXd upper(nodes, comps), lower(nodes, comps);
  for (int i = 0; i < nodes; ++i)
    for (int c = 0; c < comps; ++c) {
      double a = rng.next_unit_open();
      double b = rng.next_unit_open();
      if (a < b) std::swap(a, b);
      upper(i, c) = a;
      lower(i, c) = b;
    }
  return {upper, lower};
}

// Random bound state that sandwiches an actual probability vector per node
// (so sum of lowers <= 1 <= sum of uppers rowwise).
inline std::pair<Eigen::ArrayXXd, Eigen::ArrayXXd> random_sandwich_state(int nodes, int comps,
                                                                         spb::CounterRng& rng) {
  Eigen::ArrayXXd upper(nodes, comps), lower(nodes, comps);
  for (int i = 0; i < nodes; ++i) {
    Eigen::ArrayXd p(comps);
    for (int c = 0; c < comps; ++c) p[c] = rng.next_unit_open();
    p /= p.sum();
    for (int c = 0; c < comps; ++c) {
      lower(i, c) = p[c] * rng.next_unit_open();
      upper(i, c) = p[c] + (1.0 - p[c]) * rng.next_unit_open();
    }
  }
  return {upper, lower};
}

}  // namespace test_helpers
