#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spreadbound/errors.hpp"

namespace spb {

/// Undirected simple graph as a sorted edge list, i < j for every edge.
struct EdgeList {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;
};

// G(n, p) sampled with the counter-based generator: the decision for pair
// (i, j), i < j, reads the word at the pair's lexicographic rank, so the
// same (n, p, seed) always yields the same graph.
EdgeList erdos_renyi_edges(int nodes, double p, std::uint64_t seed);

EdgeList complete_graph(int nodes);

}  // namespace spb
