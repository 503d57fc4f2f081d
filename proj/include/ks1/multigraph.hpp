#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ks1/rng.hpp"
#include "ks1/types.hpp"

namespace ks1 {

using VertexPair = std::pair<std::uint32_t, std::uint32_t>;

/// Which degree class pick_uniform draws from.
struct DegreeClass {
  enum class Kind { Exact, Max, Min };
  Kind kind = Kind::Exact;
  std::size_t degree = 0;

  static DegreeClass exact(std::size_t d) { return {Kind::Exact, d}; }
  static DegreeClass max() { return {Kind::Max, 0}; }
  static DegreeClass min() { return {Kind::Min, 0}; }
};

/// Result of contracting a vertex set.
struct ContractResult {
  VertexId vertex;
  std::vector<EdgeId> purged_loops;
};

/// Dynamic loopless multigraph.
///
/// Parallel edges are kept and counted separately in degrees. Every edge keeps the
/// EdgeId it was created with; contraction re-endpoints external edges instead of
/// creating new ones, so a matched edge can always be traced back to its input pair.
/// Vertices are kept in per-degree buckets (swap-remove arrays) which gives O(1)
/// uniform selection within a degree class and O(1) degree updates.
class MultiGraph {
 public:
  MultiGraph() = default;

  /// Builds the graph on vertices 0..n-1 with one edge per pair.
  static MultiGraph build(std::size_t n, std::span<const VertexPair> pairs) {
    MultiGraph g;
    g.vertices_.resize(n);
    g.inc_.resize(n);
    g.buckets_.resize(1);
    g.live_vertices_ = n;
    g.input_vertices_ = n;
    g.edges_.reserve(pairs.size());
    g.original_.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      if (a >= n || b >= n)
        throw InputError("edge endpoint out of range: " + std::to_string(a) + " " + std::to_string(b));
      if (a == b) throw InputError("loop at vertex " + std::to_string(a));
      const EdgeId e(static_cast<std::uint32_t>(g.edges_.size()));
      Edge edge;
      edge.ends = {VertexId(a), VertexId(b)};
      edge.slot = {static_cast<std::uint32_t>(g.inc_[a].size()), static_cast<std::uint32_t>(g.inc_[b].size())};
      edge.alive = true;
      g.edges_.push_back(edge);
      g.original_.push_back({a, b});
      g.inc_[a].push_back(e);
      g.inc_[b].push_back(e);
    }
    g.live_edges_ = pairs.size();
    for (std::size_t v = 0; v < n; ++v) {
      g.vertices_[v].alive = true;
      g.bucket_insert(VertexId(static_cast<std::uint32_t>(v)));
    }
    return g;
  }

  std::size_t num_vertices() const { return live_vertices_; }
  std::size_t num_edges() const { return live_edges_; }
  bool empty() const { return live_vertices_ == 0; }

  /// Upper bound (exclusive) on vertex ids ever allocated.
  std::size_t vertex_capacity() const { return vertices_.size(); }
  /// Number of EdgeIds (live or dead) in this run.
  std::size_t edge_capacity() const { return edges_.size(); }

  bool alive(VertexId v) const { return v.index() < vertices_.size() && vertices_[v.index()].alive; }
  bool alive(EdgeId e) const { return e.index() < edges_.size() && edges_[e.index()].alive; }

  std::size_t degree(VertexId v) const {
    require_alive(v);
    return inc_[v.index()].size();
  }

  std::span<const EdgeId> incident(VertexId v) const {
    require_alive(v);
    return inc_[v.index()];
  }

  std::array<VertexId, 2> endpoints(EdgeId e) const {
    require_alive(e);
    return edges_[e.index()].ends;
  }

  VertexId other_end(EdgeId e, VertexId v) const {
    const auto& ends = endpoints(e);
    if (ends[0] == v) return ends[1];
    if (ends[1] == v) return ends[0];
    throw UsageError("vertex " + std::to_string(v.value) + " is not an endpoint of edge " + std::to_string(e.value));
  }

  /// Endpoints of e in the input graph. Never changes, valid for dead edges too.
  VertexPair original_endpoints(EdgeId e) const {
    if (e.index() >= original_.size()) throw IntegrityError("unknown edge id " + std::to_string(e.value));
    return original_[e.index()];
  }

  /// Vertex count of the input graph.
  std::size_t original_vertex_count() const { return input_vertices_; }

  /// Distinct neighbours of v, in incidence order of first appearance.
  std::vector<VertexId> neighbours(VertexId v) const {
    std::vector<VertexId> out;
    for (EdgeId e : incident(v)) {
      VertexId w = other_end(e, v);
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
    return out;
  }

  /// Number of parallel edges between a and b.
  std::size_t multiplicity(VertexId a, VertexId b) const {
    std::size_t m = 0;
    for (EdgeId e : incident(a))
      if (other_end(e, a) == b) ++m;
    return m;
  }

  std::size_t count_of_degree(std::size_t d) const { return d < buckets_.size() ? buckets_[d].size() : 0; }
  std::span<const VertexId> vertices_of_degree(std::size_t d) const {
    if (d >= buckets_.size()) return {};
    return buckets_[d];
  }

  /// Smallest degree present; requires a non-empty graph.
  std::size_t min_degree() const {
    if (empty()) throw UsageError("min_degree of empty graph");
    std::size_t d = 0;
    while (buckets_[d].empty()) ++d;
    return d;
  }

  std::size_t max_degree() const {
    if (empty()) throw UsageError("max_degree of empty graph");
    while (buckets_[max_hint_].empty()) --max_hint_;
    return max_hint_;
  }

  /// Live vertices in id order.
  std::vector<VertexId> live_vertices() const {
    std::vector<VertexId> out;
    out.reserve(live_vertices_);
    for (std::size_t v = 0; v < vertices_.size(); ++v)
      if (vertices_[v].alive) out.emplace_back(static_cast<std::uint32_t>(v));
    return out;
  }

  /// Live edges in id order.
  std::vector<EdgeId> live_edges() const {
    std::vector<EdgeId> out;
    out.reserve(live_edges_);
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].alive) out.emplace_back(static_cast<std::uint32_t>(e));
    return out;
  }

  /// ex_4 maintained under every degree change.
  std::int64_t excess4() const { return excess4_; }

  /// ex_l from the bucket structure: sum over vertices of max(d - l, 0).
  std::int64_t excess(std::size_t l) const {
    std::int64_t total = 0;
    for (std::size_t d = l + 1; d < buckets_.size(); ++d)
      total += static_cast<std::int64_t>(d - l) * static_cast<std::int64_t>(buckets_[d].size());
    return total;
  }

  void remove_edge(EdgeId e) {
    require_alive(e);
    Edge& edge = edges_[e.index()];
    for (int side = 0; side < 2; ++side) {
      const VertexId v = edge.ends[side];
      const std::size_t old_degree = inc_[v.index()].size();
      detach(e, side);
      bucket_move(v, old_degree);
    }
    edge.alive = false;
    --live_edges_;
  }

  /// Removes v and every incident edge; returns the removed edges in incidence order.
  std::vector<EdgeId> remove_vertex(VertexId v) {
    require_alive(v);
    std::vector<EdgeId> removed(inc_[v.index()].begin(), inc_[v.index()].end());
    for (EdgeId e : removed) remove_edge(e);
    bucket_erase(v, 0);
    vertices_[v.index()].alive = false;
    --live_vertices_;
    return removed;
  }

  /// Replaces the vertices of `members` by one fresh vertex. Edges with both ends inside
  /// become loops and are purged; edges with one end inside are moved onto the new vertex.
  ContractResult contract(std::span<const VertexId> members) {
    if (members.size() < 2) throw UsageError("contract needs at least two vertices");
    std::vector<VertexId> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw UsageError("contract: repeated vertex");
    for (VertexId v : sorted) require_alive(v);
    const auto inside = [&sorted](VertexId x) { return std::binary_search(sorted.begin(), sorted.end(), x); };

    const VertexId fresh(static_cast<std::uint32_t>(vertices_.size()));
    vertices_.push_back({});
    inc_.emplace_back();
    ContractResult result{fresh, {}};
    auto& fresh_inc = inc_[fresh.index()];

    for (VertexId m : members) {
      bucket_erase(m, inc_[m.index()].size());
      for (EdgeId e : inc_[m.index()]) {
        Edge& edge = edges_[e.index()];
        if (!edge.alive) continue;  // internal edge already purged from the other side
        const int side = edge.ends[0] == m ? 0 : 1;
        if (inside(edge.ends[1 - side])) {
          edge.alive = false;
          --live_edges_;
          result.purged_loops.push_back(e);
        } else {
          edge.ends[side] = fresh;
          edge.slot[side] = static_cast<std::uint32_t>(fresh_inc.size());
          fresh_inc.push_back(e);
        }
      }
      inc_[m.index()].clear();
      inc_[m.index()].shrink_to_fit();
      vertices_[m.index()].alive = false;
    }
    live_vertices_ -= members.size();
    vertices_[fresh.index()].alive = true;
    ++live_vertices_;
    bucket_insert(fresh);
    return result;
  }

  VertexId pick_uniform(DegreeClass cls, Rng& rng) const {
    if (empty()) throw UsageError("pick_uniform on empty graph");
    std::size_t d = cls.degree;
    if (cls.kind == DegreeClass::Kind::Max) d = max_degree();
    if (cls.kind == DegreeClass::Kind::Min) d = min_degree();
    if (d >= buckets_.size() || buckets_[d].empty())
      throw UsageError("pick_uniform: no vertex of degree " + std::to_string(d));
    const auto& bucket = buckets_[d];
    return bucket[rng.below(bucket.size())];
  }

  /// Uniform over incident edge slots, so a parallel pair is twice as likely as a single edge.
  EdgeId pick_incident_edge_uniform(VertexId v, Rng& rng) const {
    const auto inc = incident(v);
    if (inc.empty()) throw UsageError("pick_incident_edge_uniform: vertex has no edges");
    return inc[rng.below(inc.size())];
  }

  /// Recomputes degrees, buckets, counters and slot back-pointers from scratch.
  /// Returns an empty string if consistent, otherwise a description of the first problem.
  std::string check_consistency() const {
    std::size_t live_v = 0, live_e = 0, degree_sum = 0;
    std::int64_t ex4 = 0;
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      if (!vertices_[v].alive) {
        if (!inc_[v].empty()) return "dead vertex " + std::to_string(v) + " has incident edges";
        continue;
      }
      ++live_v;
      const std::size_t d = inc_[v].size();
      degree_sum += d;
      if (d > 4) ex4 += static_cast<std::int64_t>(d - 4);
      if (d >= buckets_.size()) return "vertex " + std::to_string(v) + " beyond bucket range";
      const auto pos = vertices_[v].bucket_pos;
      if (pos >= buckets_[d].size() || buckets_[d][pos].index() != v)
        return "bucket mismatch at vertex " + std::to_string(v);
      for (std::size_t i = 0; i < d; ++i) {
        const EdgeId e = inc_[v][i];
        const Edge& edge = edges_[e.index()];
        if (!edge.alive) return "dead edge in incidence list of " + std::to_string(v);
        const int side = edge.ends[0].index() == v ? 0 : (edge.ends[1].index() == v ? 1 : -1);
        if (side < 0) return "edge " + std::to_string(e.value) + " does not end at " + std::to_string(v);
        if (edge.slot[side] != i) return "stale slot for edge " + std::to_string(e.value);
      }
    }
    for (const Edge& edge : edges_) {
      if (!edge.alive) continue;
      ++live_e;
      if (edge.ends[0] == edge.ends[1]) return "loop on live edge";
    }
    std::size_t bucketed = 0;
    for (const auto& b : buckets_) bucketed += b.size();
    if (bucketed != live_v) return "bucket population differs from live vertex count";
    if (live_v != live_vertices_) return "live vertex counter drifted";
    if (live_e != live_edges_) return "live edge counter drifted";
    if (degree_sum != 2 * live_e) return "degree sum is not twice the edge count";
    if (ex4 != excess4_) return "incremental ex4 drifted";
    return {};
  }

  /// Fingerprint of the input edge list; used to check a trace belongs to this graph.
  std::uint64_t input_fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    const auto feed = [&h](std::uint64_t x) {
      h ^= x;
      h *= 1099511628211ULL;
    };
    feed(input_vertices_);
    for (const auto& [a, b] : original_) {
      feed(a);
      feed(b);
    }
    return h;
  }

  /// Full internal state comparison, including bucket order and slot layout.
  friend bool operator==(const MultiGraph& x, const MultiGraph& y) {
    return x.vertices_ == y.vertices_ && x.inc_ == y.inc_ && x.edges_ == y.edges_ && x.original_ == y.original_ &&
           x.trimmed_buckets() == y.trimmed_buckets() && x.live_vertices_ == y.live_vertices_ &&
           x.live_edges_ == y.live_edges_ && x.excess4_ == y.excess4_ && x.input_vertices_ == y.input_vertices_;
  }

 private:
  struct Vertex {
    bool alive = false;
    std::uint32_t bucket_pos = 0;
    friend bool operator==(const Vertex&, const Vertex&) = default;
  };
  struct Edge {
    std::array<VertexId, 2> ends{};
    std::array<std::uint32_t, 2> slot{};
    bool alive = false;
    friend bool operator==(const Edge&, const Edge&) = default;
  };

  void require_alive(VertexId v) const {
    if (!alive(v)) throw UsageError("vertex " + std::to_string(v.value) + " is not live");
  }
  void require_alive(EdgeId e) const {
    if (!alive(e)) throw UsageError("edge " + std::to_string(e.value) + " is not live");
  }

  // Removes e from the incidence list of its endpoint on `side` (swap-remove).
  void detach(EdgeId e, int side) {
    Edge& edge = edges_[e.index()];
    auto& list = inc_[edge.ends[side].index()];
    const std::uint32_t pos = edge.slot[side];
    const EdgeId moved = list.back();
    list[pos] = moved;
    list.pop_back();
    if (moved != e) {
      Edge& m = edges_[moved.index()];
      const int mside = m.ends[0] == edge.ends[side] ? 0 : 1;
      m.slot[mside] = pos;
    }
  }

  static std::int64_t ex4_of(std::size_t d) { return d > 4 ? static_cast<std::int64_t>(d - 4) : 0; }

  void bucket_insert(VertexId v) {
    const std::size_t d = inc_[v.index()].size();
    if (d >= buckets_.size()) buckets_.resize(d + 1);
    vertices_[v.index()].bucket_pos = static_cast<std::uint32_t>(buckets_[d].size());
    buckets_[d].push_back(v);
    excess4_ += ex4_of(d);
    if (d > max_hint_) max_hint_ = d;
  }

  void bucket_erase(VertexId v, std::size_t d) {
    auto& bucket = buckets_[d];
    const std::uint32_t pos = vertices_[v.index()].bucket_pos;
    const VertexId moved = bucket.back();
    bucket[pos] = moved;
    vertices_[moved.index()].bucket_pos = pos;
    bucket.pop_back();
    excess4_ -= ex4_of(d);
  }

  void bucket_move(VertexId v, std::size_t old_degree) {
    bucket_erase(v, old_degree);
    bucket_insert(v);
  }

  // Buckets beyond the highest non-empty one carry no state.
  std::vector<std::vector<VertexId>> trimmed_buckets() const {
    auto b = buckets_;
    while (!b.empty() && b.back().empty()) b.pop_back();
    return b;
  }

  std::vector<Vertex> vertices_;
  std::vector<std::vector<EdgeId>> inc_;
  std::vector<Edge> edges_;
  std::vector<VertexPair> original_;
  std::vector<std::vector<VertexId>> buckets_;
  mutable std::size_t max_hint_ = 0;
  std::size_t live_vertices_ = 0;
  std::size_t live_edges_ = 0;
  std::int64_t excess4_ = 0;
  std::size_t input_vertices_ = 0;
};

}  // namespace ks1
