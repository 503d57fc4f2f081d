#include <gtest/gtest.h>

#include <variant>
#include <vector>

#include "helpers.hpp"
#include "ks1/construct.hpp"
#include "ks1/exactmatch.hpp"
#include "ks1/reduce.hpp"

using namespace ks1;

namespace {

struct FullRun {
  MultiGraph g0;
  MultiGraph end;
  ReduceTrace trace;
  UnwindResult result;
};

FullRun full_run(const MultiGraph& g0, std::uint64_t seed, UnwindOptions opts = {}) {
  FullRun r{g0, g0, {}, {}};
  Rng rng(seed);
  r.trace = run(r.end, rng);
  r.result = unwind(r.trace, r.trace.actions.size(), r.end, {}, opts);
  return r;
}

bool edge_in(const std::vector<VertexPair>& input, VertexPair p) {
  for (auto q : input)
    if ((q.first == p.first && q.second == p.second) || (q.first == p.second && q.second == p.first)) return true;
  return false;
}

MultiGraph auto_correct_gadget() {
  const std::vector<VertexPair> p{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 5}, {1, 5}, {2, 6},
                                  {2, 6}, {3, 7}, {3, 7}, {4, 8}, {4, 8}, {5, 6}, {7, 8}};
  return MultiGraph::build(9, p);
}

}  // namespace

TEST(ConstructKappa, Examples) {
  const auto g = fixtures::k4();
  Matching perfect{{{EdgeId(0), VertexId(0), VertexId(1)}, {EdgeId(5), VertexId(2), VertexId(3)}}};
  EXPECT_EQ(kappa(g, perfect), 0u);
  EXPECT_EQ(kappa(g, Matching{}), 4u);
  const std::vector<VertexPair> path{{0, 1}, {1, 2}};
  const auto p3 = MultiGraph::build(3, path);
  EXPECT_EQ(kappa(p3, Matching{{{EdgeId(1), VertexId(1), VertexId(2)}}}), 1u);
  Matching overlapping{{{EdgeId(0), VertexId(0), VertexId(1)}, {EdgeId(1), VertexId(0), VertexId(2)}}};
  EXPECT_THROW(kappa(g, overlapping), IntegrityError);
  Matching stale{{{EdgeId(0), VertexId(0), VertexId(2)}}};
  EXPECT_THROW(kappa(g, stale), IntegrityError);
}

TEST(ConstructUnwind, K4) {
  // ME {a,b}; good contraction {a,c,d}; bad contraction of the new vertex with b; V0.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = full_run(fixtures::k4(), seed);
    EXPECT_EQ(r.result.ledger.r0, 1u);
    EXPECT_EQ(r.result.ledger.r2b, 1u);
    EXPECT_EQ(r.result.ledger.kappa0(), 2u);
    ASSERT_EQ(r.result.matching.size(), 1u);
    const auto pairs = resolve_to_original(r.result.matching, r.end);
    EXPECT_TRUE(edge_in(fixtures::k4_pairs(), pairs[0]));
    EXPECT_EQ(r.result.ledger.kappa_by_level, (std::vector<std::size_t>{2, 2, 2, 1, 0}));
  }
}

TEST(ConstructUnwind, TripleEdge) {
  const auto r = full_run(fixtures::triple_edge(), 5);
  EXPECT_TRUE(r.result.matching.empty());
  EXPECT_EQ(r.result.ledger.r0, 1u);
  EXPECT_EQ(r.result.ledger.r2b, 1u);
  EXPECT_EQ(r.result.ledger.kappa0(), 2u);
}

TEST(ConstructUnwind, SingleEdge) {
  const std::vector<VertexPair> p{{0, 1}};
  const auto r = full_run(MultiGraph::build(2, p), 1);
  ASSERT_EQ(r.result.matching.size(), 1u);
  EXPECT_EQ(r.result.matching.edges[0].id, EdgeId(0));
  EXPECT_EQ(r.result.ledger.kappa0(), 0u);
}

TEST(ConstructUnwind, AutoCorrectionBranches) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g0 = auto_correct_gadget();
    MultiGraph g = g0;
    Rng rng(seed);
    ReduceTrace t;
    t.input_fingerprint = g0.input_fingerprint();
    t.n0 = g0.num_vertices();
    t.e0 = g0.num_edges();
    ASSERT_EQ(step(g, rng, t.actions), 2u);
    t.n_after = {9, 7};
    const auto& me = std::get<MaxEdgeRemoval>(t.actions[0]);
    const auto& ac = std::get<AutoCorrectionContraction>(t.actions[1]);
    const VertexId x = ac.new_vertex;

    // uncovered: one copy of the parallel pair {u, w}
    auto res = unwind(t, 2, g, {});
    ASSERT_EQ(res.matching.size(), 1u);
    EXPECT_EQ(res.matching.edges[0].id, ac.double_edge.first);

    for (const auto& att : ac.external) {
      const VertexId outside = g.other_end(att.edge, x);
      const Matching mj{{{att.edge, x, outside}}};
      res = unwind(t, 2, g, mj);
      ASSERT_EQ(res.matching.size(), 2u);
      EXPECT_EQ(res.ledger.kappa0(), 5u);
      std::vector<EdgeId> ids{res.matching.edges[0].id, res.matching.edges[1].id};
      std::sort(ids.begin(), ids.end());
      std::vector<EdgeId> want{att.edge, att.member == ac.w ? me.edge : ac.double_edge.first};
      std::sort(want.begin(), want.end());
      EXPECT_EQ(ids, want);
      const auto pairs = resolve_to_original(res.matching, g);
      std::string why;
      EXPECT_TRUE(is_matching_of(9, std::vector<VertexPair>{{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 5}, {1, 5}, {2, 6},
                                                             {2, 6}, {3, 7}, {3, 7}, {4, 8}, {4, 8}, {5, 6}, {7, 8}},
                                 pairs, &why))
          << why;
    }
  }
}

TEST(ConstructUnwind, RandomGraphsProduceValidMatchings) {
  Rng seeds(77);
  for (int trial = 0; trial < 500; ++trial) {
    Rng rng = seeds.split(trial);
    auto [g0, input] = fixtures::random_34(20 + trial % 60, (trial % 4) * 0.25, rng);
    const auto r = full_run(g0, rng());
    const auto pairs = resolve_to_original(r.result.matching, r.end);
    std::string why;
    ASSERT_TRUE(is_matching_of(g0.num_vertices(), input, pairs, &why)) << why;
    for (auto [a, b] : pairs) ASSERT_NE(a, b);
    ASSERT_EQ(r.result.ledger.kappa0(), g0.num_vertices() - 2 * pairs.size());
    ASSERT_EQ(r.result.ledger.kappa0(), r.result.ledger.r0 + r.result.ledger.r2b);
  }
}

TEST(ConstructUnwind, TieBreakDoesNotChangeKappa) {
  Rng seeds(5);
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng = seeds.split(trial);
    auto [g0, input] = fixtures::random_34(100, 0.3, rng);
    const std::uint64_t seed = rng();
    const auto first = full_run(g0, seed);
    const auto second = full_run(g0, seed, {.second_neighbour_when_uncovered = true});
    ASSERT_EQ(first.result.ledger.kappa0(), second.result.ledger.kappa0());
    std::string why;
    ASSERT_TRUE(is_matching_of(100, input, resolve_to_original(second.result.matching, second.end), &why)) << why;
  }
}

TEST(ConstructUnwind, FromIntermediateLevels) {
  Rng seeds(31);
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng = seeds.split(trial);
    auto [g0, input] = fixtures::random_34(30, 0.4, rng);
    MultiGraph g = g0;
    const auto t = run(g, rng);
    const std::size_t j = rng.below(t.actions.size() + 1);
    const auto level = replay(t, g0, j);
    const auto mj = max_matching(level);
    const auto res = unwind(t, j, level, mj);
    const std::size_t kj = level.num_vertices() - 2 * mj.size();
    ASSERT_EQ(res.ledger.kappa_j, kj);
    // R0 and R2b only grow while unwinding, so kappa never increases towards level j
    for (std::size_t i = 1; i <= j; ++i) ASSERT_GE(res.ledger.kappa_by_level[i - 1], res.ledger.kappa_by_level[i]);
    ASSERT_EQ(res.ledger.kappa0(), res.ledger.r0 + res.ledger.r2b + kj);
    std::string why;
    ASSERT_TRUE(is_matching_of(30, input, resolve_to_original(res.matching, level), &why)) << why;
  }
}

TEST(ConstructUnwind, Errors) {
  const auto g0 = fixtures::k4();
  MultiGraph g = g0;
  Rng rng(1);
  const auto t = run(g, rng);
  EXPECT_THROW(unwind(t, t.actions.size() + 1, g, {}), IntegrityError);
  EXPECT_THROW(unwind(t, t.actions.size(), g0, {}), IntegrityError);  // wrong level
  const auto level1 = replay(t, g0, 1);
  const Matching bad{{{EdgeId(0), VertexId(0), VertexId(1)}, {EdgeId(1), VertexId(0), VertexId(2)}}};
  EXPECT_THROW(unwind(t, 1, level1, bad), IntegrityError);
}

TEST(ConstructResolve, EmptyAndMissingProvenance) {
  const auto g = fixtures::k4();
  EXPECT_TRUE(resolve_to_original(Matching{}, g).empty());
  const Matching unknown{{{EdgeId(99), VertexId(0), VertexId(1)}}};
  EXPECT_THROW(resolve_to_original(unknown, g), IntegrityError);
  std::string why;
  EXPECT_FALSE(is_matching_of(4, fixtures::k4_pairs(), std::vector<VertexPair>{{0, 1}, {1, 2}}, &why));
  EXPECT_FALSE(is_matching_of(4, std::vector<VertexPair>{{0, 1}}, std::vector<VertexPair>{{2, 3}}, &why));
}
