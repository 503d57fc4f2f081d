#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "ks1/configmodel.hpp"
#include "ks1/multigraph.hpp"
#include "ks1/rng.hpp"

namespace ks1::fixtures {

inline std::vector<VertexPair> k4_pairs() { return {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}; }

inline std::vector<VertexPair> petersen_pairs() {
  std::vector<VertexPair> p;
  for (std::uint32_t i = 0; i < 5; ++i) {
    p.emplace_back(i, (i + 1) % 5);          // outer cycle
    p.emplace_back(i, i + 5);                // spokes
    p.emplace_back(i + 5, (i + 2) % 5 + 5);  // inner pentagram
  }
  return p;
}

inline MultiGraph k4() {
  const auto p = k4_pairs();
  return MultiGraph::build(4, p);
}

inline MultiGraph triple_edge() {
  const std::vector<VertexPair> p{{0, 1}, {0, 1}, {0, 1}};
  return MultiGraph::build(2, p);
}

/// Random loopless multigraph with up to n vertices and m edges, endpoints uniform.
inline std::vector<VertexPair> random_pairs(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<VertexPair> p;
  while (p.size() < m) {
    const auto a = static_cast<std::uint32_t>(rng.below(n)), b = static_cast<std::uint32_t>(rng.below(n));
    if (a != b) p.emplace_back(a, b);
  }
  return p;
}

/// Configuration-model sample with the given degree-4 fraction.
inline std::pair<MultiGraph, std::vector<VertexPair>> random_34(std::size_t n, double deg4, Rng& rng) {
  const auto d = mixed_degree_sequence(n, deg4).degrees;
  auto s = sample_no_loops(d, rng, {.max_retries = 100000});
  return {MultiGraph::build(n, s.pairs), s.pairs};
}

/// Degrees recomputed from the live edge list, independent of incidence lists and buckets.
inline std::map<std::uint32_t, std::size_t> degrees_from_edges(const MultiGraph& g) {
  std::map<std::uint32_t, std::size_t> deg;
  for (VertexId v : g.live_vertices()) deg[v.value] = 0;
  for (EdgeId e : g.live_edges()) {
    const auto ends = g.endpoints(e);
    ++deg[ends[0].value];
    ++deg[ends[1].value];
  }
  return deg;
}

}  // namespace ks1::fixtures
