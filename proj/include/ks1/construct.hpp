#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ks1/multigraph.hpp"
#include "ks1/reduce.hpp"
#include "ks1/types.hpp"

namespace ks1 {

struct MatchedEdge {
  EdgeId id;
  VertexId a;
  VertexId b;
  friend bool operator==(const MatchedEdge&, const MatchedEdge&) = default;
};

/// Set of edges of a stated graph state, with their endpoints in that state.
struct Matching {
  std::vector<MatchedEdge> edges;

  std::size_t size() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
};

/// Deficiency accounting collected while unwinding.
struct DeficiencyLedger {
  std::size_t r0 = 0;   // vertex-0 removals between level 0 and level j
  std::size_t r2b = 0;  // bad contractions between level 0 and level j
  std::size_t kappa_j = 0;
  /// kappa at every level i = j, j-1, ..., 0 (index i).
  std::vector<std::size_t> kappa_by_level;

  std::size_t kappa0() const { return kappa_by_level.empty() ? kappa_j : kappa_by_level.front(); }
};

struct UnwindResult {
  Matching matching;  // over G0, endpoints are input vertex ids
  DeficiencyLedger ledger;
};

struct UnwindOptions {
  /// When the contracted vertex is uncovered, match the centre to its second neighbour
  /// instead of the first. Coverage (and so kappa) is the same either way.
  bool second_neighbour_when_uncovered = false;
};

/// Checks m is a matching of g (live edges, recorded endpoints, pairwise disjoint).
inline void validate_matching(const MultiGraph& g, const Matching& m) {
  std::vector<VertexId> used;
  used.reserve(2 * m.size());
  for (const auto& me : m.edges) {
    if (!g.alive(me.id)) throw IntegrityError("matching uses dead edge " + std::to_string(me.id.value));
    const auto ends = g.endpoints(me.id);
    if (!((ends[0] == me.a && ends[1] == me.b) || (ends[0] == me.b && ends[1] == me.a)))
      throw IntegrityError("matching edge " + std::to_string(me.id.value) + " has stale endpoints");
    used.push_back(me.a);
    used.push_back(me.b);
  }
  std::sort(used.begin(), used.end());
  if (std::adjacent_find(used.begin(), used.end()) != used.end())
    throw IntegrityError("matching edges share a vertex");
}

/// Number of vertices of g not covered by m.
inline std::size_t kappa(const MultiGraph& g, const Matching& m) {
  validate_matching(g, m);
  return g.num_vertices() - 2 * m.size();
}

namespace detail {

class UnwindState {
 public:
  UnwindState(std::size_t vertex_capacity, std::size_t edge_capacity)
      : mate_(vertex_capacity), ends_(edge_capacity) {}

  void add(EdgeId e, VertexId a, VertexId b) {
    if (mate_.at(a.index()).valid() || mate_.at(b.index()).valid())
      throw IntegrityError("unwinding produced overlapping matching edges");
    mate_[a.index()] = e;
    mate_[b.index()] = e;
    ends_.at(e.index()) = {a, b};
    ++size_;
  }

  EdgeId mate(VertexId v) const { return mate_.at(v.index()); }

  // Moves the `from` end of matched edge e onto `to`.
  void rewire(EdgeId e, VertexId from, VertexId to) {
    auto& ends = ends_[e.index()];
    const int side = ends[0] == from ? 0 : 1;
    if (ends[side] != from) throw IntegrityError("rewire: edge does not end at contracted vertex");
    if (mate_.at(to.index()).valid()) throw IntegrityError("rewire onto covered vertex");
    ends[side] = to;
    mate_[from.index()] = EdgeId{};
    mate_[to.index()] = e;
  }

  std::size_t size() const { return size_; }
  std::array<VertexId, 2> ends(EdgeId e) const { return ends_[e.index()]; }

 private:
  std::vector<EdgeId> mate_;
  std::vector<std::array<VertexId, 2>> ends_;
  std::size_t size_ = 0;
};

inline VertexId attached_member(std::span<const Attachment> external, EdgeId e) {
  for (const auto& x : external)
    if (x.edge == e) return x.member;
  throw IntegrityError("matched edge " + std::to_string(e.value) + " has no recorded attachment");
}

}  // namespace detail

/// Unwinds trace actions j-1..0 starting from a matching mj of the level-j state `level_j`,
/// returning a matching of G0. The deficiency identity
///   kappa(G_i, M_i) = R0(i..j) + R2b(i..j) + kappa(G_j, M_j)
/// is checked at every level; a violation throws IntegrityError.
inline UnwindResult unwind(const ReduceTrace& trace, std::size_t j, const MultiGraph& level_j, const Matching& mj,
                           UnwindOptions opts = {}) {
  if (j > trace.actions.size()) throw IntegrityError("unwind level beyond trace length");
  if (level_j.input_fingerprint() != trace.input_fingerprint || level_j.num_vertices() != trace.vertices_at(j))
    throw IntegrityError("graph state does not correspond to trace level " + std::to_string(j));

  UnwindResult result;
  auto& ledger = result.ledger;
  ledger.kappa_j = kappa(level_j, mj);
  ledger.kappa_by_level.assign(j + 1, 0);
  ledger.kappa_by_level[j] = ledger.kappa_j;

  detail::UnwindState state(level_j.vertex_capacity(), level_j.edge_capacity());
  for (const auto& me : mj.edges) state.add(me.id, me.a, me.b);

  // Contracted vertex `vc` becomes `members`; if vc was matched, the matched edge is moved back
  // onto the member it was attached to. Returns that member (or an invalid id if vc was free).
  const auto expand = [&state](VertexId vc, std::span<const Attachment> external) {
    const EdgeId e = state.mate(vc);
    if (!e.valid()) return VertexId{};
    const VertexId member = detail::attached_member(external, e);
    state.rewire(e, vc, member);
    return member;
  };

  for (std::size_t i = j; i-- > 0;) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Vertex0Removal>) {
            ++ledger.r0;
          } else if constexpr (std::is_same_v<T, Vertex1Removal>) {
            state.add(a.matched_edge, a.v, a.w);
          } else if constexpr (std::is_same_v<T, Contraction>) {
            const VertexId attached = expand(a.new_vertex, a.external);
            if (a.is_bad) {
              ++ledger.r2b;
              return;
            }
            if (a.members.size() != 3 || a.center_edges.size() != 2)
              throw IntegrityError("malformed good contraction record");
            const VertexId v = a.members[0], first = a.members[1], second = a.members[2];
            // center_edges[k] leads to members[k + 1]
            if (!attached.valid()) {
              if (opts.second_neighbour_when_uncovered)
                state.add(a.center_edges[1], v, second);
              else
                state.add(a.center_edges[0], v, first);
            } else if (attached == first) {
              state.add(a.center_edges[1], v, second);
            } else if (attached == second) {
              state.add(a.center_edges[0], v, first);
            } else {
              throw IntegrityError("contracted vertex matched through its degree-2 centre");
            }
          } else if constexpr (std::is_same_v<T, MaxEdgeRemoval>) {
            // removed edges are not used
          } else {
            const VertexId attached = expand(a.new_vertex, a.external);
            if (!attached.valid() || attached == a.v) {
              state.add(a.double_edge.first, a.u, a.w);
            } else if (attached == a.w) {
              state.add(a.removed_edge, a.u, a.v);
            } else {
              throw IntegrityError("auto-correction vertex matched through u");
            }
          }
        },
        trace.actions[i]);

    const std::size_t n_i = trace.vertices_at(i);
    if (2 * state.size() > n_i) throw IntegrityError("matching larger than level " + std::to_string(i));
    const std::size_t k = n_i - 2 * state.size();
    ledger.kappa_by_level[i] = k;
    if (k != ledger.r0 + ledger.r2b + ledger.kappa_j)
      throw IntegrityError("deficiency identity violated at level " + std::to_string(i) + ": kappa=" +
                           std::to_string(k) + " R0=" + std::to_string(ledger.r0) +
                           " R2b=" + std::to_string(ledger.r2b) + " kappa_j=" + std::to_string(ledger.kappa_j));
  }

  // Collect; at level 0 every endpoint must be the edge's input endpoint.
  std::vector<EdgeId> matched;
  matched.reserve(state.size());
  for (std::size_t v = 0; v < trace.n0; ++v) {
    const EdgeId e = state.mate(VertexId(static_cast<std::uint32_t>(v)));
    if (e.valid()) matched.push_back(e);
  }
  std::sort(matched.begin(), matched.end());
  matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
  if (matched.size() != state.size()) throw IntegrityError("unwound matching has non-input endpoints");
  for (EdgeId e : matched) {
    const auto ends = state.ends(e);
    const auto [oa, ob] = level_j.original_endpoints(e);
    const bool same = (ends[0].value == oa && ends[1].value == ob) || (ends[0].value == ob && ends[1].value == oa);
    if (!same) throw IntegrityError("unwound edge " + std::to_string(e.value) + " does not match its input pair");
    result.matching.edges.push_back({e, ends[0], ends[1]});
  }
  return result;
}

/// Input vertex pairs of a matching over G0. Fails if an edge id has no provenance in g
/// or the pairs are not disjoint.
inline std::vector<VertexPair> resolve_to_original(const Matching& m0, const MultiGraph& g) {
  std::vector<VertexPair> out;
  std::vector<std::uint32_t> used;
  out.reserve(m0.size());
  for (const auto& me : m0.edges) {
    const auto p = g.original_endpoints(me.id);
    out.push_back(p);
    used.push_back(p.first);
    used.push_back(p.second);
  }
  std::sort(used.begin(), used.end());
  if (std::adjacent_find(used.begin(), used.end()) != used.end())
    throw IntegrityError("resolved matching is not vertex-disjoint");
  return out;
}

/// Checks that `pairs` is a matching of the input graph given as an edge list:
/// distinct endpoints, pairwise disjoint, every pair an input edge.
inline bool is_matching_of(std::size_t n, std::span<const VertexPair> input, std::span<const VertexPair> pairs,
                           std::string* why = nullptr) {
  const auto fail = [why](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  const auto key = [](VertexPair p) {
    if (p.first > p.second) std::swap(p.first, p.second);
    return p;
  };
  std::vector<VertexPair> edges;
  edges.reserve(input.size());
  for (auto p : input) edges.push_back(key(p));
  std::sort(edges.begin(), edges.end());
  std::vector<bool> covered(n, false);
  for (auto p : pairs) {
    if (p.first >= n || p.second >= n) return fail("vertex out of range");
    if (p.first == p.second) return fail("pair with equal endpoints");
    if (covered[p.first] || covered[p.second]) return fail("vertex covered twice");
    covered[p.first] = covered[p.second] = true;
    if (!std::binary_search(edges.begin(), edges.end(), key(p)))
      return fail("pair " + std::to_string(p.first) + " " + std::to_string(p.second) + " is not an input edge");
  }
  return true;
}

}  // namespace ks1
