#include <gtest/gtest.h>

#include <sstream>
#include <variant>
#include <vector>

#include "helpers.hpp"
#include "ks1/reduce.hpp"

using namespace ks1;

namespace {

template <class T>
bool is(const Action& a) {
  return std::holds_alternative<T>(a);
}

// Lowest non-empty class in the REDUCE ordering: 0, 1, 2, else 3 (max-edge removal).
std::size_t priority_class(const MultiGraph& g) {
  for (std::size_t d = 0; d < 3; ++d)
    if (g.count_of_degree(d) > 0) return d;
  return 3;
}

bool auto_correct_condition(const MultiGraph& g, VertexId a, VertexId b) {
  if (!g.alive(a) || g.degree(a) != 2) return false;
  const auto inc = g.incident(a);
  const VertexId w = g.other_end(inc[0], a);
  return g.other_end(inc[1], a) == w && w != b;
}

// v=0 of degree 4 joined to u1..u4; each u_i has a parallel pair to w_i; w1-w2 and w3-w4 adjacent.
MultiGraph auto_correct_gadget() {
  const std::vector<VertexPair> p{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 5}, {1, 5}, {2, 6},
                                  {2, 6}, {3, 7}, {3, 7}, {4, 8}, {4, 8}, {5, 6}, {7, 8}};
  return MultiGraph::build(9, p);
}

}  // namespace

TEST(ReduceStep, IsolatedVertex) {
  auto g = MultiGraph::build(1, std::vector<VertexPair>{});
  Rng rng(1);
  std::vector<Action> out;
  EXPECT_EQ(step(g, rng, out), 1u);
  ASSERT_TRUE(is<Vertex0Removal>(out[0]));
  EXPECT_TRUE(g.empty());
  EXPECT_THROW(step(g, rng, out), UsageError);
}

TEST(ReduceStep, SingleEdge) {
  const std::vector<VertexPair> p{{0, 1}};
  auto g = MultiGraph::build(2, p);
  Rng rng(1);
  std::vector<Action> out;
  step(g, rng, out);
  ASSERT_TRUE(is<Vertex1Removal>(out[0]));
  const auto& a = std::get<Vertex1Removal>(out[0]);
  EXPECT_EQ(a.matched_edge, EdgeId(0));
  EXPECT_TRUE(a.other_removed.empty());
  EXPECT_TRUE(g.empty());
}

TEST(ReduceStep, TwoVertexContractionIsBad) {
  // u=0 has a parallel pair to w=1 and is the only degree-2 vertex
  const std::vector<VertexPair> p{{0, 1}, {0, 1}, {1, 2}, {1, 3}, {2, 3}, {2, 3}};
  auto g = MultiGraph::build(4, p);
  Rng rng(1);
  std::vector<Action> out;
  step(g, rng, out);
  ASSERT_TRUE(is<Contraction>(out[0]));
  const auto& c = std::get<Contraction>(out[0]);
  EXPECT_TRUE(c.is_bad);
  EXPECT_EQ(c.members, (std::vector<VertexId>{VertexId(0), VertexId(1)}));
  EXPECT_EQ(c.internal_purged.size(), 2u);
  EXPECT_EQ(c.new_degree, 2u);
}

TEST(ReduceStep, AutoCorrectionFires) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = auto_correct_gadget();
    Rng rng(seed);
    std::vector<Action> out;
    ASSERT_EQ(step(g, rng, out), 2u);
    const auto& me = std::get<MaxEdgeRemoval>(out[0]);
    const auto& ac = std::get<AutoCorrectionContraction>(out[1]);
    EXPECT_EQ(me.v, VertexId(0));
    EXPECT_EQ(ac.u, me.u);
    EXPECT_EQ(ac.v, VertexId(0));
    EXPECT_EQ(ac.w.value, me.u.value + 4);
    EXPECT_EQ(ac.removed_edge, me.edge);
    EXPECT_EQ(ac.new_degree, 4u);
    EXPECT_EQ(ac.internal_purged.size(), 2u);
    EXPECT_EQ(g.check_consistency(), "");
  }
}

TEST(ReduceRun, K4ForcedSequence) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = fixtures::k4();
    Rng rng(seed);
    const auto t = run(g, rng);
    ASSERT_EQ(t.actions.size(), 4u);
    EXPECT_TRUE(is<MaxEdgeRemoval>(t.actions[0]));
    ASSERT_TRUE(is<Contraction>(t.actions[1]));
    EXPECT_FALSE(std::get<Contraction>(t.actions[1]).is_bad);
    EXPECT_EQ(std::get<Contraction>(t.actions[1]).members.size(), 3u);
    ASSERT_TRUE(is<Contraction>(t.actions[2]));
    EXPECT_TRUE(std::get<Contraction>(t.actions[2]).is_bad);
    EXPECT_TRUE(is<Vertex0Removal>(t.actions[3]));
    EXPECT_EQ(t.stop, StopReason::Empty);
    EXPECT_TRUE(g.empty());
    ASSERT_EQ(t.snapshots.size(), 2u);
    EXPECT_EQ(t.snapshots[0], (Snapshot{0, 4, 6, 0}));
    EXPECT_EQ(t.snapshots[1], (Snapshot{4, 0, 0, 0}));
    EXPECT_EQ(t.n_after, (std::vector<std::size_t>{4, 2, 1, 0}));
  }
}

TEST(ReduceRun, TripleEdgeForcedSequence) {
  auto g = fixtures::triple_edge();
  Rng rng(3);
  const auto t = run(g, rng);
  ASSERT_EQ(t.actions.size(), 3u);
  EXPECT_TRUE(is<MaxEdgeRemoval>(t.actions[0]));
  ASSERT_TRUE(is<Contraction>(t.actions[1]));
  EXPECT_TRUE(std::get<Contraction>(t.actions[1]).is_bad);
  EXPECT_TRUE(is<Vertex0Removal>(t.actions[2]));
}

TEST(ReduceRun, RulesHoldOnRandomGraphs) {
  Rng seeds(41);
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng = seeds.split(trial);
    const double deg4 = (trial % 3) * 0.3;
    auto [g0, pairs] = fixtures::random_34(40 + trial % 25, deg4, rng);
    MultiGraph g = g0;
    const auto t = run(g, rng);
    ASSERT_TRUE(g.empty());
    ASSERT_LE(t.actions.size(), 3 * g0.num_vertices() + g0.excess(3));

    MultiGraph cur = g0;
    std::size_t snap = 0;
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
      if (is_snapshot_state(cur)) {
        ASSERT_LT(snap, t.snapshots.size());
        ASSERT_EQ(t.snapshots[snap].action_index, i);
        ASSERT_EQ(t.snapshots[snap].ex4, cur.excess(4));
        ++snap;
      }
      const Action& a = t.actions[i];
      const std::size_t cls = priority_class(cur);
      if (is<Vertex0Removal>(a)) {
        ASSERT_EQ(cls, 0u);
      }
      if (is<Vertex1Removal>(a)) {
        ASSERT_EQ(cls, 1u);
      }
      if (is<Contraction>(a)) {
        ASSERT_EQ(cls, 2u);
        const auto& c = std::get<Contraction>(a);
        ASSERT_EQ(c.is_bad, c.members.size() == 2);
      }
      if (is<MaxEdgeRemoval>(a)) {
        ASSERT_EQ(cls, 3u);
        const auto& me = std::get<MaxEdgeRemoval>(a);
        ASSERT_EQ(cur.degree(me.v), cur.max_degree());
        apply(cur, a);
        const bool fires = auto_correct_condition(cur, me.u, me.v) || auto_correct_condition(cur, me.v, me.u);
        const bool next_is_ac = i + 1 < t.actions.size() && is<AutoCorrectionContraction>(t.actions[i + 1]);
        ASSERT_EQ(fires, next_is_ac);
        continue;
      }
      if (is<AutoCorrectionContraction>(a)) {
        ASSERT_TRUE(i > 0 && is<MaxEdgeRemoval>(t.actions[i - 1]));
      }
      apply(cur, a);
      ASSERT_EQ(cur.num_vertices(), t.n_after[i]);
    }
    ASSERT_EQ(snap + 1, t.snapshots.size());  // the empty graph
  }
}

TEST(ReduceRun, CubicActionCountWithinThreeN) {
  Rng seeds(8);
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng = seeds.split(trial);
    auto [g, pairs] = fixtures::random_34(1000, 0.0, rng);
    const auto t = run(g, rng);
    EXPECT_LE(t.actions.size(), 3000u);
  }
}

TEST(ReduceReplay, ReproducesFinalState) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto [g0, pairs] = fixtures::random_34(60, 0.25, rng);
    MultiGraph g = g0;
    const auto t = run(g, rng, SnapshotWindow{default_omega(60)});
    ASSERT_TRUE(replay(t, g0) == g);
    // every prefix also replays
    const std::size_t half = t.actions.size() / 2;
    const auto mid = replay(t, g0, half);
    ASSERT_EQ(mid.check_consistency(), "");
  }
}

TEST(ReduceReplay, EmptyTraceAndMismatch) {
  const auto g0 = fixtures::k4();
  MultiGraph g = g0;
  Rng rng(1);
  const auto t = run(g, rng);
  EXPECT_TRUE(replay(t, g0, 0) == g0);
  EXPECT_THROW(replay(t, fixtures::triple_edge()), IntegrityError);
  const std::vector<VertexPair> other{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 1}};
  EXPECT_THROW(replay(t, MultiGraph::build(4, other)), IntegrityError);
}

TEST(ReduceTraceFormat, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    auto [g0, pairs] = fixtures::random_34(80, 0.5, rng);
    MultiGraph g = g0;
    const auto t = run(g, rng);
    std::stringstream ss;
    write_trace(ss, t);
    const auto back = read_trace(ss);
    ASSERT_TRUE(back == t);
    ASSERT_TRUE(replay(back, g0) == g);
  }
  std::istringstream bad("ks1-trace 1 0 0 0\nXX 1\nEND empty\n");
  EXPECT_THROW(read_trace(bad), InputError);
  std::istringstream truncated("ks1-trace 1 0 0 0\nNA 0\n");
  EXPECT_THROW(read_trace(truncated), InputError);
}

TEST(ReduceWindow, DefaultOmega) {
  EXPECT_EQ(default_omega(1), 1u);
  EXPECT_EQ(default_omega(8), 4u);
  EXPECT_EQ(default_omega(27), 9u);
  EXPECT_EQ(default_omega(28), 10u);
  EXPECT_EQ(default_omega(10000), 465u);  // 10000^(2/3) = 464.16
  EXPECT_EQ(default_omega(1000000), 10000u);
}

TEST(ReduceWindow, StopsInsideWindow) {
  const std::size_t n = 10000, omega = default_omega(n);
  Rng seeds(12);
  int found = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = seeds.split(trial);
    auto [g, pairs] = fixtures::random_34(n, 0.0, rng);
    const auto t = run(g, rng, SnapshotWindow{omega});
    const auto& last = t.snapshots.back();
    ASSERT_EQ(last.action_index, t.actions.size());
    ASSERT_EQ(last.n, g.num_vertices());
    if (t.stop == StopReason::SnapshotFound) {
      ASSERT_EQ(last.ex4, 0);
      ASSERT_GE(last.n, omega);
      ASSERT_LE(last.n, 2 * omega);
      ++found;
    } else {
      ASSERT_EQ(t.stop, StopReason::SafetyFloor);
      ASSERT_LT(last.n, omega);
    }
  }
  EXPECT_GE(found, 90);
}

TEST(ReduceWindow, SafetyFloorWhenOmegaExceedsN) {
  auto g = fixtures::k4();
  Rng rng(1);
  const auto t = run(g, rng, SnapshotWindow{10});
  EXPECT_EQ(t.stop, StopReason::SafetyFloor);
  EXPECT_TRUE(t.actions.empty());
  EXPECT_THROW(run(g, rng, SnapshotWindow{0}), UsageError);
}
