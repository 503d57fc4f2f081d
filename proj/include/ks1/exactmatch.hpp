#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ks1/construct.hpp"
#include "ks1/multigraph.hpp"
#include "ks1/types.hpp"

namespace ks1 {

/// Simple graph on 0..n-1 derived from the live part of a MultiGraph. Parallel edges are
/// collapsed; for each adjacent pair one representative EdgeId is kept.
struct SimpleView {
  std::vector<VertexId> vertex;                 // dense index -> vertex id
  std::vector<std::vector<std::uint32_t>> adj;  // sorted, no duplicates
  std::unordered_map<std::uint64_t, EdgeId> representative;

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  static SimpleView of(const MultiGraph& g) {
    SimpleView s;
    s.vertex = g.live_vertices();
    std::unordered_map<std::uint32_t, std::uint32_t> dense;
    dense.reserve(s.vertex.size());
    for (std::uint32_t i = 0; i < s.vertex.size(); ++i) dense.emplace(s.vertex[i].value, i);
    s.adj.resize(s.vertex.size());
    for (EdgeId e : g.live_edges()) {
      const auto ends = g.endpoints(e);
      const std::uint32_t a = dense.at(ends[0].value), b = dense.at(ends[1].value);
      if (s.representative.emplace(key(a, b), e).second) {
        s.adj[a].push_back(b);
        s.adj[b].push_back(a);
      }
    }
    for (auto& row : s.adj) std::sort(row.begin(), row.end());
    return s;
  }

  std::size_t size() const { return vertex.size(); }
};

namespace detail {

// Edmonds' blossom algorithm for maximum cardinality matching, O(V^3).
// mate[v] is the dense partner of v or -1.
class Blossom {
 public:
  explicit Blossom(const std::vector<std::vector<std::uint32_t>>& adj)
      : adj_(adj), n_(static_cast<int>(adj.size())), mate_(n_, -1), parent_(n_), base_(n_), used_(n_),
        in_blossom_(n_) {}

  std::vector<int> solve() {
    // greedy start
    for (int v = 0; v < n_; ++v) {
      if (mate_[v] != -1) continue;
      for (std::uint32_t w : adj_[v]) {
        if (mate_[w] == -1) {
          mate_[v] = static_cast<int>(w);
          mate_[w] = v;
          break;
        }
      }
    }
    for (int root = 0; root < n_; ++root) {
      if (mate_[root] != -1) continue;
      int v = find_path(root);
      while (v != -1) {  // flip the augmenting path
        const int pv = parent_[v], ppv = mate_[pv];
        mate_[v] = pv;
        mate_[pv] = v;
        v = ppv;
      }
    }
    return mate_;
  }

 private:
  int lca(int a, int b) {
    std::vector<bool> seen(n_, false);
    while (true) {
      a = base_[a];
      seen[a] = true;
      if (mate_[a] == -1) break;
      a = parent_[mate_[a]];
    }
    while (true) {
      b = base_[b];
      if (seen[b]) return b;
      b = parent_[mate_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      in_blossom_[base_[v]] = in_blossom_[base_[mate_[v]]] = true;
      parent_[v] = child;
      child = mate_[v];
      v = parent_[mate_[v]];
    }
  }

  // BFS from root over alternating paths; returns the free vertex ending an augmenting path.
  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), false);
    std::fill(parent_.begin(), parent_.end(), -1);
    std::iota(base_.begin(), base_.end(), 0);
    used_[root] = true;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (std::uint32_t wu : adj_[v]) {
        const int w = static_cast<int>(wu);
        if (base_[v] == base_[w] || mate_[v] == w) continue;
        if (w == root || (mate_[w] != -1 && parent_[mate_[w]] != -1)) {
          const int b = lca(v, w);
          std::fill(in_blossom_.begin(), in_blossom_.end(), false);
          mark_path(v, b, w);
          mark_path(w, b, v);
          for (int x = 0; x < n_; ++x) {
            if (in_blossom_[base_[x]]) {
              base_[x] = b;
              if (!used_[x]) {
                used_[x] = true;
                q.push(x);
              }
            }
          }
        } else if (parent_[w] == -1) {
          parent_[w] = v;
          if (mate_[w] == -1) return w;
          used_[mate_[w]] = true;
          q.push(mate_[w]);
        }
      }
    }
    return -1;
  }

  const std::vector<std::vector<std::uint32_t>>& adj_;
  int n_;
  std::vector<int> mate_, parent_, base_;
  std::vector<bool> used_, in_blossom_;
};

inline Matching to_matching(const MultiGraph& g, const SimpleView& s, const std::vector<int>& mate) {
  Matching m;
  for (std::uint32_t v = 0; v < mate.size(); ++v) {
    if (mate[v] < 0 || static_cast<std::uint32_t>(mate[v]) < v) continue;
    const auto w = static_cast<std::uint32_t>(mate[v]);
    const EdgeId e = s.representative.at(SimpleView::key(v, w));
    const auto ends = g.endpoints(e);
    m.edges.push_back({e, ends[0], ends[1]});
  }
  return m;
}

}  // namespace detail

/// Maximum cardinality matching of the live graph (blossom shrinking).
inline Matching max_matching(const MultiGraph& g) {
  const SimpleView s = SimpleView::of(g);
  detail::Blossom solver(s.adj);
  return detail::to_matching(g, s, solver.solve());
}

/// Exhaustive maximum matching, for graphs with at most 14 live vertices.
inline Matching max_matching_bruteforce(const MultiGraph& g) {
  constexpr std::size_t kCap = 14;
  const SimpleView s = SimpleView::of(g);
  if (s.size() > kCap) throw UsageError("brute-force matching is limited to 14 vertices");
  const int n = static_cast<int>(s.size());
  std::vector<int> mate(n, -1), best(n, -1);
  int best_size = -1;
  // Lowest free undecided vertex is either left unmatched or matched to a later free neighbour.
  const auto search = [&](auto&& self, int v, int size) -> void {
    while (v < n && mate[v] != -1) ++v;
    if (v >= n) {
      if (size > best_size) {
        best_size = size;
        best = mate;
      }
      return;
    }
    // bound: remaining vertices can add at most (n - v) / 2 edges
    if (size + (n - v) / 2 <= best_size) return;
    for (std::uint32_t wu : s.adj[v]) {
      const int w = static_cast<int>(wu);
      if (w <= v || mate[w] != -1) continue;
      mate[v] = w;
      mate[w] = v;
      self(self, v + 1, size + 1);
      mate[v] = mate[w] = -1;
    }
    mate[v] = -2;  // leave v uncovered
    self(self, v + 1, size);
    mate[v] = -1;
  };
  search(search, 0, 0);
  for (auto& x : best)
    if (x < 0) x = -1;
  return detail::to_matching(g, s, best);
}

/// Number of odd-order components of g - W.
inline std::size_t odd_components(const MultiGraph& g, std::span<const VertexId> removed) {
  const SimpleView s = SimpleView::of(g);
  std::vector<bool> gone(s.size(), false);
  for (VertexId w : removed) {
    const auto it = std::lower_bound(s.vertex.begin(), s.vertex.end(), w);
    if (it == s.vertex.end() || *it != w) throw UsageError("odd_components: vertex not in graph");
    gone[static_cast<std::size_t>(it - s.vertex.begin())] = true;
  }
  std::vector<bool> seen(s.size(), false);
  std::size_t odd = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t start = 0; start < s.size(); ++start) {
    if (gone[start] || seen[start]) continue;
    std::size_t size = 0;
    stack.assign(1, start);
    seen[start] = true;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      ++size;
      for (auto w : s.adj[v])
        if (!gone[w] && !seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    odd += size % 2;
  }
  return odd;
}

/// Minimiser of the Tutte-Berge bound: value = (|V| + |W| - q(V - W)) / 2.
struct DeficiencyCertificate {
  std::vector<VertexId> witness;
  std::size_t odd_components = 0;
  std::size_t value = 0;
};

/// Exact Tutte-Berge minimisation over all subsets W, for at most 16 live vertices.
inline DeficiencyCertificate tutte_berge_deficiency(const MultiGraph& g) {
  constexpr std::size_t kCap = 16;
  const SimpleView s = SimpleView::of(g);
  const std::size_t n = s.size();
  if (n > kCap) throw UsageError("Tutte-Berge enumeration is limited to 16 vertices");
  std::vector<std::uint32_t> nbr(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    for (auto w : s.adj[v]) nbr[v] |= 1u << w;
  const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;

  DeficiencyCertificate best;
  best.value = n + 1;
  std::uint32_t best_mask = 0;
  for (std::uint32_t w_mask = 0; w_mask <= all; ++w_mask) {
    std::uint32_t left = all & ~w_mask;
    std::size_t odd = 0;
    while (left) {
      std::uint32_t comp = left & (~left + 1);
      std::uint32_t frontier = comp;
      while (frontier) {
        std::uint32_t next = 0;
        for (std::uint32_t f = frontier; f; f &= f - 1) next |= nbr[std::countr_zero(f)];
        next &= left & ~comp;
        comp |= next;
        frontier = next;
      }
      odd += std::popcount(comp) % 2;
      left &= ~comp;
    }
    const std::size_t wsize = std::popcount(w_mask);
    if (n + wsize >= odd) {
      const std::size_t value = (n + wsize - odd) / 2;
      if (value < best.value) {
        best.value = value;
        best.odd_components = odd;
        best_mask = w_mask;
      }
    }
    if (w_mask == all) break;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (best_mask >> v & 1u) best.witness.push_back(s.vertex[v]);
  return best;
}

}  // namespace ks1
