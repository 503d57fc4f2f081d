#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ks1/multigraph.hpp"
#include "ks1/reduce.hpp"
#include "ks1/types.hpp"

namespace ks1 {

/// ex_l(G) = sum over live vertices of max(d(v) - l, 0), recomputed from incidence lists.
inline std::int64_t excess(const MultiGraph& g, std::size_t l) {
  if (l < 1) throw UsageError("excess threshold must be positive");
  std::int64_t total = 0;
  for (VertexId v : g.live_vertices()) {
    const std::size_t d = g.incident(v).size();
    if (d > l) total += static_cast<std::int64_t>(d - l);
  }
  return total;
}

enum class HyperactionType { T1, T2, T3a, T3b, T3c, T4, T5, T33, T34, OtherBad };

inline const char* to_string(HyperactionType t) {
  switch (t) {
    case HyperactionType::T1: return "1";
    case HyperactionType::T2: return "2";
    case HyperactionType::T3a: return "3a";
    case HyperactionType::T3b: return "3b";
    case HyperactionType::T3c: return "3c";
    case HyperactionType::T4: return "4";
    case HyperactionType::T5: return "5";
    case HyperactionType::T33: return "33";
    case HyperactionType::T34: return "34";
    case HyperactionType::OtherBad: return "other-bad";
  }
  return "?";
}

inline bool is_good(HyperactionType t) { return t != HyperactionType::T3c && t != HyperactionType::OtherBad; }

/// One max-edge removal and everything REDUCE did until the next one.
struct HyperactionRecord {
  std::size_t start_snapshot = 0;  // index into trace.snapshots of the state it acts on
  std::size_t end_snapshot = 0;
  std::size_t first_action = 0;
  std::size_t end_action = 0;  // exclusive
  std::vector<Action> actions;
  std::optional<HyperactionType> type;
  std::int64_t d_ex4 = 0;
  std::int64_t d_n = 0;
  std::int64_t d_e = 0;

  /// Type 33/34 must keep ex4, Type 5 should raise it by exactly one.
  bool flagged() const {
    if (!type) return false;
    if (*type == HyperactionType::T33 || *type == HyperactionType::T34) return d_ex4 != 0;
    if (*type == HyperactionType::T5) return d_ex4 != 1;
    return false;
  }
};

struct Segmentation {
  std::size_t preamble_actions = 0;  // cleanup of G0 before the first min-degree-3 state
  std::vector<HyperactionRecord> records;
};

/// Splits the trace into hyperactions. Every max-edge removal must start at a recorded
/// snapshot and every record must end at one.
inline Segmentation segment(const ReduceTrace& trace) {
  Segmentation out;
  if (trace.actions.empty()) return out;
  const auto& acts = trace.actions;
  const auto is_max_edge = [&acts](std::size_t i) { return std::holds_alternative<MaxEdgeRemoval>(acts[i]); };

  std::size_t first = 0;
  while (first < acts.size() && !is_max_edge(first)) ++first;
  out.preamble_actions = first;
  if (first == acts.size()) return out;

  std::size_t snap = 0;
  const auto snapshot_at = [&](std::size_t action_index) {
    while (snap < trace.snapshots.size() && trace.snapshots[snap].action_index < action_index) ++snap;
    if (snap == trace.snapshots.size() || trace.snapshots[snap].action_index != action_index)
      throw IntegrityError("no snapshot at action " + std::to_string(action_index));
    return snap;
  };

  for (std::size_t i = first; i < acts.size();) {
    std::size_t end = i + 1;
    while (end < acts.size() && !is_max_edge(end)) ++end;
    HyperactionRecord rec;
    rec.first_action = i;
    rec.end_action = end;
    rec.start_snapshot = snapshot_at(i);
    rec.end_snapshot = snapshot_at(end);
    rec.actions.assign(acts.begin() + static_cast<std::ptrdiff_t>(i), acts.begin() + static_cast<std::ptrdiff_t>(end));
    const auto& s0 = trace.snapshots[rec.start_snapshot];
    const auto& s1 = trace.snapshots[rec.end_snapshot];
    rec.d_ex4 = s1.ex4 - s0.ex4;
    rec.d_n = static_cast<std::int64_t>(s1.n) - static_cast<std::int64_t>(s0.n);
    rec.d_e = static_cast<std::int64_t>(s1.e) - static_cast<std::int64_t>(s0.e);
    out.records.push_back(std::move(rec));
    i = end;
  }
  return out;
}

namespace detail {

using VSet = std::vector<VertexId>;

inline VSet sorted(VSet s) {
  std::sort(s.begin(), s.end());
  return s;
}

inline bool all_distinct(VSet s) {
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}

inline bool same_set(const VSet& a, const VSet& b) { return sorted(a) == sorted(b); }

inline VSet without(VSet s, VertexId x) {
  s.erase(std::remove(s.begin(), s.end(), x), s.end());
  return s;
}

// Pre-state neighbourhood queries; degree counts parallel edges.
struct PreState {
  const MultiGraph& g;
  std::size_t degree(VertexId x) const { return g.degree(x); }
  VSet nbrs(VertexId x) const { return g.neighbours(x); }
  // x has degree 3 and three distinct neighbours
  bool simple_cubic_vertex(VertexId x) const { return degree(x) == 3 && nbrs(x).size() == 3; }
};

// Type-4 shape around (v, u): u has neighbours {v, x1, x2}, x1 and x2 are adjacent and each has one
// more neighbour w1, w2; six distinct vertices. The two contractions must be {u, x1, x2} centred
// at u, then {x', w1, w2} centred at the new vertex x'.
inline bool type4_shape(const PreState& pre, VertexId v, VertexId u, const Contraction& c1, const Contraction& c2) {
  if (!pre.simple_cubic_vertex(u)) return false;
  const VSet nu = without(pre.nbrs(u), v);
  if (nu.size() != 2) return false;
  const VertexId x1 = nu[0], x2 = nu[1];
  if (!pre.simple_cubic_vertex(x1) || !pre.simple_cubic_vertex(x2)) return false;
  const VSet n1 = without(without(pre.nbrs(x1), u), x2);
  const VSet n2 = without(without(pre.nbrs(x2), u), x1);
  if (n1.size() != 1 || n2.size() != 1) return false;
  if (pre.nbrs(x1).size() != 3 || pre.nbrs(x2).size() != 3) return false;
  const VertexId w1 = n1[0], w2 = n2[0];
  if (!all_distinct({v, u, x1, x2, w1, w2})) return false;
  if (c1.center != u || !same_set(c1.members, {u, x1, x2})) return false;
  if (c2.center != c1.new_vertex || !same_set(c2.members, {c1.new_vertex, w1, w2})) return false;
  return true;
}

// Contraction of `center` with its pre-state neighbours other than `removed_partner`.
inline bool plain_side_contraction(const PreState& pre, VertexId center, VertexId removed_partner,
                                   const Contraction& c, VSet* members_out = nullptr) {
  const VSet rest = without(pre.nbrs(center), removed_partner);
  if (rest.size() != 2) return false;
  VSet expect{center, rest[0], rest[1]};
  if (c.center != center || !same_set(c.members, expect)) return false;
  if (members_out) *members_out = expect;
  return true;
}

}  // namespace detail

/// Structural classification of a hyperaction given the min-degree-3 state it started from.
/// Templates are tried in the order 2, 4, 34, 5, 33, 3x, 1.
inline HyperactionType classify(const HyperactionRecord& rec, const MultiGraph& pre_state) {
  using detail::VSet;
  using T = HyperactionType;
  if (rec.actions.empty() || !std::holds_alternative<MaxEdgeRemoval>(rec.actions.front()))
    throw IntegrityError("hyperaction must start with a max-edge removal");
  const auto& me = std::get<MaxEdgeRemoval>(rec.actions.front());
  const std::span<const Action> rest(rec.actions.data() + 1, rec.actions.size() - 1);

  if (rest.empty()) return T::T1;
  if (rest.size() == 1 && std::holds_alternative<AutoCorrectionContraction>(rest[0])) return T::T2;

  std::vector<const Contraction*> cs;
  for (const Action& a : rest) {
    const auto* c = std::get_if<Contraction>(&a);
    if (!c || c->is_bad) return T::OtherBad;
    cs.push_back(c);
  }

  const detail::PreState pre{pre_state};
  const std::size_t max_deg = pre_state.max_degree();
  const std::array<std::pair<VertexId, VertexId>, 2> orientations{{{me.v, me.u}, {me.u, me.v}}};

  if (cs.size() == 2 && pre.degree(me.v) >= 4 && detail::type4_shape(pre, me.v, me.u, *cs[0], *cs[1]))
    return T::T4;

  if (cs.size() == 3 && max_deg == 3) {
    for (const auto& [q, p] : orientations) {
      // q contracts with its own two other neighbours, p runs the Type-4 pattern.
      for (std::size_t k = 0; k < 3; ++k) {
        VSet q_side;
        if (!detail::plain_side_contraction(pre, q, p, *cs[k], &q_side)) continue;
        std::vector<const Contraction*> others;
        for (std::size_t t = 0; t < 3; ++t)
          if (t != k) others.push_back(cs[t]);
        if (!detail::type4_shape(pre, q, p, *others[0], *others[1])) continue;
        VSet all = q_side;
        for (VertexId x : others[0]->members) all.push_back(x);
        for (VertexId x : others[1]->members)
          if (x != others[0]->new_vertex) all.push_back(x);
        if (all.size() == 8 && detail::all_distinct(all)) return T::T34;
      }
    }
  }

  if (cs.size() == 2 && max_deg == 3) {
    for (const auto& [q, p] : orientations) {
      const VSet nq = detail::without(pre.nbrs(q), p);
      const VSet np = detail::without(pre.nbrs(p), q);
      if (!pre.simple_cubic_vertex(q) || !pre.simple_cubic_vertex(p) || nq.size() != 2 || np.size() != 2) continue;
      // the triangle vertex x1 is the common neighbour
      VertexId x1, x2, z;
      if (np[0] == nq[0] || np[0] == nq[1]) {
        x1 = np[0];
        z = np[1];
      } else if (np[1] == nq[0] || np[1] == nq[1]) {
        x1 = np[1];
        z = np[0];
      } else {
        continue;
      }
      x2 = nq[0] == x1 ? nq[1] : nq[0];
      const VSet five{p, q, x1, x2, z};
      if (!detail::all_distinct(five)) continue;
      VSet outside;
      for (VertexId y : {x1, x2, z})
        for (VertexId t : pre.nbrs(y))
          if (std::find(five.begin(), five.end(), t) == five.end() &&
              std::find(outside.begin(), outside.end(), t) == outside.end())
            outside.push_back(t);
      if (outside.size() < 3) continue;
      const Contraction &c1 = *cs[0], &c2 = *cs[1];
      const bool interact = std::find(c2.members.begin(), c2.members.end(), c1.new_vertex) != c2.members.end();
      if (!interact || (c1.center != p && c1.center != q) || (c2.center != p && c2.center != q) ||
          c1.center == c2.center)
        continue;
      VSet covered = c1.members;
      for (VertexId x : c2.members)
        if (x != c1.new_vertex) covered.push_back(x);
      if (covered.size() == 5 && detail::same_set(covered, five)) return T::T5;
    }
  }

  if (cs.size() == 2 && max_deg == 3) {
    VSet v_side, u_side;
    const Contraction &c1 = *cs[0], &c2 = *cs[1];
    const bool ordered = detail::plain_side_contraction(pre, me.v, me.u, c1, &v_side) &&
                         detail::plain_side_contraction(pre, me.u, me.v, c2, &u_side);
    const bool swapped = !ordered && detail::plain_side_contraction(pre, me.u, me.v, c1, &u_side) &&
                         detail::plain_side_contraction(pre, me.v, me.u, c2, &v_side);
    if (ordered || swapped) {
      VSet all = v_side;
      all.insert(all.end(), u_side.begin(), u_side.end());
      if (detail::all_distinct(all)) return T::T33;
    }
  }

  if (cs.size() == 1) {
    const Contraction& c = *cs[0];
    if (c.members.size() != 3) return T::OtherBad;
    const std::int64_t da = c.member_degrees[1], db = c.member_degrees[2];
    const std::int64_t deficit = da + db - 2 - static_cast<std::int64_t>(c.new_degree);
    if (deficit == 0) return T::T3a;
    if (deficit == 2) return T::T3b;
    return T::T3c;
  }
  return T::OtherBad;
}

/// Segments the trace and classifies every record by replaying it from g0. With
/// ex4_check_every = k > 0, every k-th record start also compares the snapshot's ex4 with a
/// from-scratch recount.
inline Segmentation analyze(const ReduceTrace& trace, MultiGraph g0, std::size_t ex4_check_every = 0) {
  Segmentation seg = segment(trace);
  if (g0.input_fingerprint() != trace.input_fingerprint) throw IntegrityError("trace was recorded on a different graph");
  std::size_t applied = 0;
  for (std::size_t r = 0; r < seg.records.size(); ++r) {
    auto& rec = seg.records[r];
    for (; applied < rec.first_action; ++applied) apply(g0, trace.actions[applied]);
    if (ex4_check_every > 0 && r % ex4_check_every == 0 && excess(g0, 4) != trace.snapshots[rec.start_snapshot].ex4)
      throw IntegrityError("incremental ex4 disagrees with recount at action " + std::to_string(applied));
    rec.type = classify(rec, g0);
  }
  return seg;
}

struct DriftStats {
  std::vector<std::int64_t> ex4_series;  // one entry per snapshot
  std::size_t conditioned_count = 0;     // snapshot transitions starting with ex4 > 0
  std::int64_t conditioned_sum = 0;
  std::int64_t max_abs_delta_good = 0;
  std::size_t good_over_two = 0;  // good records with |d_ex4| > 2

  double conditioned_mean() const {
    return conditioned_count ? static_cast<double>(conditioned_sum) / static_cast<double>(conditioned_count) : 0.0;
  }
};

inline DriftStats drift(const ReduceTrace& trace, const Segmentation& seg) {
  DriftStats s;
  for (const auto& snap : trace.snapshots) s.ex4_series.push_back(snap.ex4);
  for (std::size_t i = 0; i + 1 < trace.snapshots.size(); ++i) {
    if (trace.snapshots[i].ex4 <= 0) continue;
    ++s.conditioned_count;
    s.conditioned_sum += trace.snapshots[i + 1].ex4 - trace.snapshots[i].ex4;
  }
  for (const auto& rec : seg.records) {
    if (!rec.type || !is_good(*rec.type)) continue;
    const std::int64_t mag = std::llabs(rec.d_ex4);
    s.max_abs_delta_good = std::max(s.max_abs_delta_good, mag);
    if (mag > 2) ++s.good_over_two;
  }
  return s;
}

/// Per-type aggregate used for the histogram export.
struct TypeHistogramRow {
  std::size_t count = 0;
  std::int64_t sum_d_ex4 = 0;
  std::int64_t sum_d_n = 0;
};

using TypeHistogram = std::map<HyperactionType, TypeHistogramRow>;

inline void accumulate(TypeHistogram& h, const Segmentation& seg) {
  for (const auto& rec : seg.records) {
    if (!rec.type) continue;
    auto& row = h[*rec.type];
    ++row.count;
    row.sum_d_ex4 += rec.d_ex4;
    row.sum_d_n += rec.d_n;
  }
}

inline void write_histogram_csv(std::ostream& os, const TypeHistogram& h) {
  os << "type,count,mean_dex4,mean_dn\n";
  for (const auto& [type, row] : h) {
    const double c = static_cast<double>(row.count);
    os << to_string(type) << ',' << row.count << ',' << (row.count ? static_cast<double>(row.sum_d_ex4) / c : 0.0)
       << ',' << (row.count ? static_cast<double>(row.sum_d_n) / c : 0.0) << '\n';
  }
}

}  // namespace ks1
