#include "spreadbound/graph.hpp"

#include "spreadbound/errors.hpp"
#include "spreadbound/rng.hpp"

namespace spb {

EdgeList erdos_renyi_edges(int nodes, double p, std::uint64_t seed) {
  if (nodes < 1) throw Error(Errc::ConfigError, "graph needs at least one node");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidProbability, "edge probability outside [0,1]");

  EdgeList graph;
  graph.nodes = nodes;
  const std::uint64_t key = rng::derive_key(seed, rng::kGraphStream);
  std::uint64_t rank = 0;
  for (int i = 0; i < nodes; ++i) {
    for (int j = i + 1; j < nodes; ++j, ++rank) {
      if (rng::unit_open(rng::word_at(key, rank)) < p) graph.edges.emplace_back(i, j);
    }
  }
  return graph;
}

EdgeList complete_graph(int nodes) {
  if (nodes < 1) throw Error(Errc::ConfigError, "graph needs at least one node");
  EdgeList graph;
  graph.nodes = nodes;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j) graph.edges.emplace_back(i, j);
  return graph;
}

}  // namespace spb
