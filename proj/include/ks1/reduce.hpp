#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ks1/multigraph.hpp"
#include "ks1/rng.hpp"
#include "ks1/types.hpp"

namespace ks1 {

/// External edge of a contracted set and the member it was attached to before contraction.
struct Attachment {
  EdgeId edge;
  VertexId member;
  friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct Vertex0Removal {
  VertexId v;
  friend bool operator==(const Vertex0Removal&, const Vertex0Removal&) = default;
};

struct Vertex1Removal {
  VertexId v;  // the degree-1 vertex
  VertexId w;  // its neighbour
  EdgeId matched_edge;
  std::vector<EdgeId> other_removed;  // remaining edges of w
  friend bool operator==(const Vertex1Removal&, const Vertex1Removal&) = default;
};

/// Contraction of a degree-2 vertex with its distinct neighbours. members[0] is the centre.
struct Contraction {
  VertexId center;
  std::vector<VertexId> members;
  std::vector<std::uint32_t> member_degrees;  // degrees just before contracting
  VertexId new_vertex;
  std::uint32_t new_degree = 0;
  std::vector<EdgeId> internal_purged;
  std::vector<EdgeId> center_edges;  // the centre's two edges, in incidence order
  std::vector<Attachment> external;
  bool is_bad = false;
  friend bool operator==(const Contraction&, const Contraction&) = default;
};

struct MaxEdgeRemoval {
  EdgeId edge;
  VertexId v;  // the chosen maximum-degree endpoint
  VertexId u;  // the other endpoint
  friend bool operator==(const MaxEdgeRemoval&, const MaxEdgeRemoval&) = default;
};

/// Contraction of {u, v, w} fired right after the removal of {u, v} left u with degree 2
/// and both remaining edges going to w.
struct AutoCorrectionContraction {
  VertexId u;
  VertexId v;
  VertexId w;
  VertexId new_vertex;
  std::uint32_t new_degree = 0;
  EdgeId removed_edge;
  std::pair<EdgeId, EdgeId> double_edge;
  std::vector<EdgeId> internal_purged;
  std::vector<Attachment> external;
  friend bool operator==(const AutoCorrectionContraction&, const AutoCorrectionContraction&) = default;
};

using Action = std::variant<Vertex0Removal, Vertex1Removal, Contraction, MaxEdgeRemoval, AutoCorrectionContraction>;

/// Graph statistics at a state with minimum degree >= 3 (or the empty graph).
struct Snapshot {
  std::size_t action_index = 0;  // number of actions applied when this state was reached
  std::size_t n = 0;
  std::size_t e = 0;
  std::int64_t ex4 = 0;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

enum class StopReason { Empty, SnapshotFound, SafetyFloor };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Empty: return "empty";
    case StopReason::SnapshotFound: return "snapshot_found";
    case StopReason::SafetyFloor: return "safety_floor";
  }
  return "?";
}

struct ReduceTrace {
  std::uint64_t input_fingerprint = 0;
  std::size_t n0 = 0;
  std::size_t e0 = 0;
  std::vector<Action> actions;
  std::vector<std::size_t> n_after;  // live vertex count after each action
  std::vector<Snapshot> snapshots;
  StopReason stop = StopReason::Empty;

  std::size_t vertices_at(std::size_t level) const { return level == 0 ? n0 : n_after.at(level - 1); }
  friend bool operator==(const ReduceTrace&, const ReduceTrace&) = default;
};

struct RunToEmpty {};

/// Stop at the first snapshot with ex4 = 0 and omega <= n <= 2*omega. If a snapshot with
/// fewer than omega vertices is reached first, stop there and report SafetyFloor.
struct SnapshotWindow {
  std::size_t omega = 1;
};

using StopRule = std::variant<RunToEmpty, SnapshotWindow>;

/// Smallest integer w with w^3 >= n^2, i.e. ceil(n^(2/3)).
inline std::size_t default_omega(std::size_t n) {
  const unsigned __int128 target = static_cast<unsigned __int128>(n) * n;
  std::size_t w = static_cast<std::size_t>(std::cbrt(static_cast<double>(n) * static_cast<double>(n)));
  while (w > 0 && static_cast<unsigned __int128>(w - 1) * (w - 1) * (w - 1) >= target) --w;
  while (static_cast<unsigned __int128>(w) * w * w < target) ++w;
  return std::max<std::size_t>(w, 1);
}

namespace detail {

inline std::vector<Attachment> attachments(const MultiGraph& g, std::span<const VertexId> members) {
  std::vector<Attachment> out;
  for (VertexId m : members)
    for (EdgeId e : g.incident(m))
      if (std::find(members.begin(), members.end(), g.other_end(e, m)) == members.end()) out.push_back({e, m});
  return out;
}

// Returns the auto-correction contraction if the removal of {a, b} left `a` with exactly
// two edges, both going to some w other than b.
inline std::optional<AutoCorrectionContraction> auto_correct(MultiGraph& g, VertexId a, VertexId b, EdgeId removed) {
  if (g.degree(a) != 2) return std::nullopt;
  const auto inc = g.incident(a);
  const EdgeId e1 = inc[0], e2 = inc[1];
  const VertexId w = g.other_end(e1, a);
  if (g.other_end(e2, a) != w || w == b) return std::nullopt;
  if (!g.alive(b)) throw IntegrityError("auto-correction partner vanished");
  AutoCorrectionContraction ac;
  ac.u = a;
  ac.v = b;
  ac.w = w;
  ac.removed_edge = removed;
  ac.double_edge = {e1, e2};
  const std::vector<VertexId> members{a, b, w};
  ac.external = attachments(g, members);
  auto res = g.contract(members);
  ac.new_vertex = res.vertex;
  ac.new_degree = static_cast<std::uint32_t>(g.degree(res.vertex));
  ac.internal_purged = std::move(res.purged_loops);
  return ac;
}

}  // namespace detail

/// Applies one REDUCE action (plus the auto-correction contraction if it fires) and
/// appends the applied actions to `out`. Returns the number of actions appended (1 or 2).
inline std::size_t step(MultiGraph& g, Rng& rng, std::vector<Action>& out) {
  if (g.empty()) throw UsageError("step on empty graph");
  if (g.count_of_degree(0) > 0) {
    const VertexId v = g.pick_uniform(DegreeClass::exact(0), rng);
    g.remove_vertex(v);
    out.emplace_back(Vertex0Removal{v});
    return 1;
  }
  if (g.count_of_degree(1) > 0) {
    const VertexId v = g.pick_uniform(DegreeClass::exact(1), rng);
    const EdgeId e = g.incident(v)[0];
    const VertexId w = g.other_end(e, v);
    Vertex1Removal act{v, w, e, {}};
    for (EdgeId r : g.remove_vertex(w))
      if (r != e) act.other_removed.push_back(r);
    g.remove_vertex(v);
    out.emplace_back(std::move(act));
    return 1;
  }
  if (g.count_of_degree(2) > 0) {
    const VertexId v = g.pick_uniform(DegreeClass::exact(2), rng);
    Contraction c;
    c.center = v;
    c.center_edges.assign(g.incident(v).begin(), g.incident(v).end());
    c.members.push_back(v);
    for (VertexId w : g.neighbours(v)) c.members.push_back(w);
    c.is_bad = c.members.size() == 2;
    for (VertexId m : c.members) c.member_degrees.push_back(static_cast<std::uint32_t>(g.degree(m)));
    c.external = detail::attachments(g, c.members);
    auto res = g.contract(c.members);
    c.new_vertex = res.vertex;
    c.new_degree = static_cast<std::uint32_t>(g.degree(res.vertex));
    c.internal_purged = std::move(res.purged_loops);
    out.emplace_back(std::move(c));
    return 1;
  }
  const VertexId v = g.pick_uniform(DegreeClass::max(), rng);
  const EdgeId e = g.pick_incident_edge_uniform(v, rng);
  const VertexId u = g.other_end(e, v);
  g.remove_edge(e);
  out.emplace_back(MaxEdgeRemoval{e, v, u});
  // The non-chosen endpoint is checked first; in the max-degree-3 case either may trigger.
  auto ac = detail::auto_correct(g, u, v, e);
  if (!ac) ac = detail::auto_correct(g, v, u, e);
  if (ac) {
    out.emplace_back(std::move(*ac));
    return 2;
  }
  return 1;
}

inline bool is_snapshot_state(const MultiGraph& g) {
  return g.count_of_degree(0) == 0 && g.count_of_degree(1) == 0 && g.count_of_degree(2) == 0;
}

namespace detail {

// Records the snapshot if the current state has min degree >= 3 (or is empty);
// returns true when the stop rule says to halt here.
inline bool observe(const MultiGraph& g, ReduceTrace& trace, const StopRule& stop) {
  if (!is_snapshot_state(g)) return false;
  trace.snapshots.push_back({trace.actions.size(), g.num_vertices(), g.num_edges(), g.excess4()});
  if (const auto* window = std::get_if<SnapshotWindow>(&stop)) {
    const std::size_t n = g.num_vertices();
    if (g.excess4() == 0 && n >= window->omega && n <= 2 * window->omega) {
      trace.stop = StopReason::SnapshotFound;
      return true;
    }
    if (n < window->omega) {
      trace.stop = StopReason::SafetyFloor;
      return true;
    }
  }
  if (g.empty()) {
    trace.stop = StopReason::Empty;
    return true;
  }
  return false;
}

}  // namespace detail

/// Runs REDUCE on g (in place) until it is empty or the stop rule fires.
inline ReduceTrace run(MultiGraph& g, Rng& rng, const StopRule& stop = RunToEmpty{}) {
  if (const auto* window = std::get_if<SnapshotWindow>(&stop); window && window->omega == 0)
    throw UsageError("omega must be at least 1");
  ReduceTrace trace;
  trace.input_fingerprint = g.input_fingerprint();
  trace.n0 = g.num_vertices();
  trace.e0 = g.num_edges();
  trace.actions.reserve(2 * trace.n0 + trace.e0 / 2);
  trace.n_after.reserve(trace.actions.capacity());
  if (detail::observe(g, trace, stop)) return trace;
  while (true) {
    const std::size_t added = step(g, rng, trace.actions);
    for (std::size_t i = 0; i < added; ++i) trace.n_after.push_back(0);
    // Intermediate state between a max-edge removal and its auto-correction keeps the vertex count.
    if (added == 2) trace.n_after[trace.n_after.size() - 2] = trace.vertices_at(trace.n_after.size() - 2);
    trace.n_after.back() = g.num_vertices();
    if (detail::observe(g, trace, stop)) return trace;
  }
}

/// Applies a single recorded action to g, checking it against the live state.
inline void apply(MultiGraph& g, const Action& action) {
  const auto fail = [](const std::string& what) { throw IntegrityError("trace does not match graph: " + what); };
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Vertex0Removal>) {
          if (!g.alive(a.v) || g.degree(a.v) != 0) fail("vertex-0 removal");
          g.remove_vertex(a.v);
        } else if constexpr (std::is_same_v<T, Vertex1Removal>) {
          if (!g.alive(a.v) || g.degree(a.v) != 1 || !g.alive(a.matched_edge) ||
              g.other_end(a.matched_edge, a.v) != a.w)
            fail("vertex-1 removal");
          g.remove_vertex(a.w);
          g.remove_vertex(a.v);
        } else if constexpr (std::is_same_v<T, Contraction>) {
          for (VertexId m : a.members)
            if (!g.alive(m)) fail("contraction member");
          if (g.degree(a.center) != 2) fail("contraction centre degree");
          auto res = g.contract(a.members);
          if (res.vertex != a.new_vertex || res.purged_loops != a.internal_purged) fail("contraction result");
        } else if constexpr (std::is_same_v<T, MaxEdgeRemoval>) {
          if (!g.alive(a.edge)) fail("max-edge removal");
          const auto ends = g.endpoints(a.edge);
          if (!((ends[0] == a.v && ends[1] == a.u) || (ends[0] == a.u && ends[1] == a.v))) fail("max-edge endpoints");
          g.remove_edge(a.edge);
        } else {
          const std::vector<VertexId> members{a.u, a.v, a.w};
          for (VertexId m : members)
            if (!g.alive(m)) fail("auto-correction member");
          auto res = g.contract(members);
          if (res.vertex != a.new_vertex || res.purged_loops != a.internal_purged) fail("auto-correction result");
        }
      },
      action);
}

/// Re-applies the first `count` actions of the trace to g0. No randomness is involved, so
/// the result is identical (including internal layout) to the state the run produced.
inline MultiGraph replay(const ReduceTrace& trace, MultiGraph g0, std::optional<std::size_t> count = std::nullopt) {
  if (g0.input_fingerprint() != trace.input_fingerprint || g0.num_vertices() != trace.n0 ||
      g0.num_edges() != trace.e0)
    throw IntegrityError("trace was recorded on a different graph");
  const std::size_t upto = count.value_or(trace.actions.size());
  if (upto > trace.actions.size()) throw IntegrityError("replay length exceeds trace");
  for (std::size_t i = 0; i < upto; ++i) apply(g0, trace.actions[i]);
  return g0;
}

// ---------------------------------------------------------------------------
// Line-oriented trace format. One record per line, fields in fixed order; lists are
// written as a count followed by the items.
//
//   ks1-trace 1 <fingerprint> <n0> <e0>
//   V0 <v>
//   V1 <v> <w> <matched> <k> <edges...>
//   CT <center> <new> <new_degree> <bad> <m> <members...> <degrees...> <2> <center_edges...>
//      <p> <purged...> <x> <edge member pairs...>
//   ME <edge> <v> <u>
//   AC <u> <v> <w> <new> <new_degree> <removed> <d1> <d2> <p> <purged...> <x> <edge member pairs...>
//   NA <n_after for each action, as a count and list>
//   SN <action_index> <n> <e> <ex4>
//   END <stop_reason>

namespace detail {

template <class T>
void write_ids(std::ostream& os, const std::vector<T>& ids) {
  os << ' ' << ids.size();
  for (const auto& id : ids) os << ' ' << id;
}

inline void write_attachments(std::ostream& os, const std::vector<Attachment>& xs) {
  os << ' ' << xs.size();
  for (const auto& x : xs) os << ' ' << x.edge << ' ' << x.member;
}

template <class T>
T read_id(std::istream& is) {
  std::uint64_t v;
  if (!(is >> v)) throw InputError("truncated trace record");
  return T(static_cast<std::uint32_t>(v));
}

template <class T>
std::vector<T> read_ids(std::istream& is) {
  const auto k = read_id<std::uint32_t>(is);
  std::vector<T> out;
  out.reserve(k);
  for (std::uint32_t i = 0; i < k; ++i) out.push_back(read_id<T>(is));
  return out;
}

inline std::vector<Attachment> read_attachments(std::istream& is) {
  const auto k = read_id<std::uint32_t>(is);
  std::vector<Attachment> out(k);
  for (auto& x : out) {
    x.edge = read_id<EdgeId>(is);
    x.member = read_id<VertexId>(is);
  }
  return out;
}

}  // namespace detail

inline void write_trace(std::ostream& os, const ReduceTrace& t) {
  using detail::write_attachments;
  using detail::write_ids;
  os << "ks1-trace 1 " << t.input_fingerprint << ' ' << t.n0 << ' ' << t.e0 << '\n';
  for (const Action& action : t.actions) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Vertex0Removal>) {
            os << "V0 " << a.v;
          } else if constexpr (std::is_same_v<T, Vertex1Removal>) {
            os << "V1 " << a.v << ' ' << a.w << ' ' << a.matched_edge;
            write_ids(os, a.other_removed);
          } else if constexpr (std::is_same_v<T, Contraction>) {
            os << "CT " << a.center << ' ' << a.new_vertex << ' ' << a.new_degree << ' ' << (a.is_bad ? 1 : 0);
            write_ids(os, a.members);
            for (auto d : a.member_degrees) os << ' ' << d;
            write_ids(os, a.center_edges);
            write_ids(os, a.internal_purged);
            write_attachments(os, a.external);
          } else if constexpr (std::is_same_v<T, MaxEdgeRemoval>) {
            os << "ME " << a.edge << ' ' << a.v << ' ' << a.u;
          } else {
            os << "AC " << a.u << ' ' << a.v << ' ' << a.w << ' ' << a.new_vertex << ' ' << a.new_degree << ' '
               << a.removed_edge << ' ' << a.double_edge.first << ' ' << a.double_edge.second;
            write_ids(os, a.internal_purged);
            write_attachments(os, a.external);
          }
        },
        action);
    os << '\n';
  }
  os << "NA";
  detail::write_ids(os, t.n_after);
  os << '\n';
  for (const auto& s : t.snapshots) os << "SN " << s.action_index << ' ' << s.n << ' ' << s.e << ' ' << s.ex4 << '\n';
  os << "END " << to_string(t.stop) << '\n';
}

inline ReduceTrace read_trace(std::istream& is) {
  using namespace detail;
  ReduceTrace t;
  std::string line;
  if (!std::getline(is, line)) throw InputError("empty trace");
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    if (!(hs >> magic >> version >> t.input_fingerprint >> t.n0 >> t.e0) || magic != "ks1-trace" || version != 1)
      throw InputError("bad trace header");
  }
  bool ended = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "V0") {
      t.actions.emplace_back(Vertex0Removal{read_id<VertexId>(ls)});
    } else if (tag == "V1") {
      Vertex1Removal a;
      a.v = read_id<VertexId>(ls);
      a.w = read_id<VertexId>(ls);
      a.matched_edge = read_id<EdgeId>(ls);
      a.other_removed = read_ids<EdgeId>(ls);
      t.actions.emplace_back(std::move(a));
    } else if (tag == "CT") {
      Contraction a;
      a.center = read_id<VertexId>(ls);
      a.new_vertex = read_id<VertexId>(ls);
      a.new_degree = read_id<std::uint32_t>(ls);
      a.is_bad = read_id<std::uint32_t>(ls) != 0;
      a.members = read_ids<VertexId>(ls);
      for (std::size_t i = 0; i < a.members.size(); ++i) a.member_degrees.push_back(read_id<std::uint32_t>(ls));
      a.center_edges = read_ids<EdgeId>(ls);
      a.internal_purged = read_ids<EdgeId>(ls);
      a.external = read_attachments(ls);
      t.actions.emplace_back(std::move(a));
    } else if (tag == "ME") {
      MaxEdgeRemoval a;
      a.edge = read_id<EdgeId>(ls);
      a.v = read_id<VertexId>(ls);
      a.u = read_id<VertexId>(ls);
      t.actions.emplace_back(a);
    } else if (tag == "AC") {
      AutoCorrectionContraction a;
      a.u = read_id<VertexId>(ls);
      a.v = read_id<VertexId>(ls);
      a.w = read_id<VertexId>(ls);
      a.new_vertex = read_id<VertexId>(ls);
      a.new_degree = read_id<std::uint32_t>(ls);
      a.removed_edge = read_id<EdgeId>(ls);
      a.double_edge.first = read_id<EdgeId>(ls);
      a.double_edge.second = read_id<EdgeId>(ls);
      a.internal_purged = read_ids<EdgeId>(ls);
      a.external = read_attachments(ls);
      t.actions.emplace_back(std::move(a));
    } else if (tag == "NA") {
      const auto k = read_id<std::uint64_t>(ls);
      t.n_after.resize(k);
      for (auto& x : t.n_after) x = read_id<std::uint64_t>(ls);
    } else if (tag == "SN") {
      Snapshot s;
      ls >> s.action_index >> s.n >> s.e >> s.ex4;
      if (!ls) throw InputError("bad snapshot record");
      t.snapshots.push_back(s);
    } else if (tag == "END") {
      std::string reason;
      ls >> reason;
      if (reason == "empty") t.stop = StopReason::Empty;
      else if (reason == "snapshot_found") t.stop = StopReason::SnapshotFound;
      else if (reason == "safety_floor") t.stop = StopReason::SafetyFloor;
      else throw InputError("unknown stop reason " + reason);
      ended = true;
    } else {
      throw InputError("unknown trace record '" + tag + "'");
    }
  }
  if (!ended) throw InputError("trace has no END record");
  if (t.n_after.size() != t.actions.size()) throw InputError("trace vertex counts do not match actions");
  return t;
}

}  // namespace ks1
