#include <gtest/gtest.h>

#include <random>

#include "edgeroute/sssp.hpp"
#include "oracles.hpp"

namespace edgeroute {
namespace {

const std::filesystem::path kFixtures = EDGEROUTE_FIXTURE_DIR;

void expect_result_invariants(const CityGraph& g, const SsspResult& r) {
  ASSERT_EQ(r.size(), g.size());
  EXPECT_EQ(r.distance(r.source), 0);
  EXPECT_EQ(r.predecessor(r.source), kNoNode);
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!r.reachable(v) || v == r.source) continue;
    const NodeId p = r.predecessor(v);
    ASSERT_NE(p, kNoNode);
    EXPECT_EQ(r.distance(v), r.distance(p) + g.weight(p, v));
    const auto path = extract_path(r, v);
    EXPECT_EQ(path.front(), r.source);
    EXPECT_EQ(path.back(), v);
  }
  for (const auto& e : g.edges()) {
    if (r.reachable(e.u)) EXPECT_LE(r.distance(e.v), r.distance(e.u) + e.weight);
    if (r.reachable(e.v)) EXPECT_LE(r.distance(e.u), r.distance(e.v) + e.weight);
  }
  for (std::size_t k = 1; k < r.settle_order.size(); ++k)
    EXPECT_LE(r.distance(r.settle_order[k - 1]), r.distance(r.settle_order[k]));
  std::size_t reachable = 0;
  for (NodeId v = 0; v < g.size(); ++v) reachable += r.reachable(v) ? 1 : 0;
  EXPECT_EQ(r.settle_order.size(), reachable);
}

TEST(DijkstraSequentialTest, SingleVertex) {
  const auto g = load_graph("graph 1\n");
  const auto r = dijkstra_sequential(g, 0);
  EXPECT_EQ(r.dist, std::vector<Cost>{0});
  EXPECT_EQ(r.settle_order, std::vector<NodeId>{0});
}

TEST(DijkstraSequentialTest, OneEdge) {
  const auto g = load_graph_file(kFixtures / "two_node.g");
  const auto r = dijkstra_sequential(g, 0);
  EXPECT_EQ(r.dist, (std::vector<Cost>{0, 5000}));
  EXPECT_EQ(r.predecessor(1), 0);
}

TEST(DijkstraSequentialTest, SixNodeFixtureMatchesEnumeration) {
  const auto g = load_graph_file(kFixtures / "six_node.g");
  const auto r = dijkstra_sequential(g, 0);
  // Frozen from exhaustive simple-path enumeration.
  EXPECT_EQ(r.dist, (std::vector<Cost>{0, 7000, 9000, 20000, 20000, 11000}));
  EXPECT_EQ(r.dist, oracle::enumerate_simple_paths(g, 0));
  expect_result_invariants(g, r);
}

TEST(DijkstraSequentialTest, InvalidSource) {
  const auto g = load_graph_file(kFixtures / "two_node.g");
  EXPECT_THROW(dijkstra_sequential(g, 2), ValidationError);
  EXPECT_THROW(dijkstra_sequential(g, -1), ValidationError);
}

TEST(DijkstraSequentialTest, UnreachableVerticesStayInfinite) {
  const auto g = load_graph("graph 4\nedge 0 1 1\nedge 2 3 1\n");
  const auto r = dijkstra_sequential(g, 0);
  EXPECT_EQ(r.distance(2), kInfinity);
  EXPECT_EQ(r.predecessor(3), kNoNode);
  EXPECT_TRUE(extract_path(r, 3).empty());
  EXPECT_EQ(r.settle_order, (std::vector<NodeId>{0, 1}));
}

TEST(DijkstraSequentialTest, AcceptsEigenExpressions) {
  const auto g = load_graph_file(kFixtures / "five_node.g");
  // Scalar-generic: the same engine over a 32-bit copy of the matrix.
  const WeightMatrixOf<std::int32_t> narrow = g.weights().cast<std::int32_t>();
  const auto r32 = dijkstra_sequential(narrow, 0);
  const auto r64 = dijkstra_sequential(g, 0);
  for (NodeId v = 0; v < g.size(); ++v) EXPECT_EQ(static_cast<Cost>(r32.distance(v)), r64.distance(v));
  // Upper-left 3x3 sub-problem taken as a block expression.
  const auto sub = dijkstra_sequential(g.weights().topLeftCorner(3, 3), 0);
  EXPECT_EQ(sub.dist, (std::vector<Cost>{0, 2500, 6500}));
}

TEST(DijkstraParallelTest, OneWorkerEqualsSequential) {
  const auto g = load_graph_file(kFixtures / "city9.g");
  for (NodeId s = 0; s < g.size(); ++s) {
    const auto seq = dijkstra_sequential(g, s);
    const auto par = dijkstra_parallel(g, s, 1);
    EXPECT_EQ(par.dist, seq.dist);
    EXPECT_EQ(par.pred, seq.pred);
    EXPECT_EQ(par.settle_order, seq.settle_order);
  }
}

TEST(DijkstraParallelTest, TwoWorkersOneEdge) {
  const auto g = load_graph_file(kFixtures / "two_node.g");
  EXPECT_EQ(dijkstra_parallel(g, 0, 2).dist, (std::vector<Cost>{0, 5000}));
}

TEST(DijkstraParallelTest, InvalidArguments) {
  const auto g = load_graph_file(kFixtures / "two_node.g");
  EXPECT_THROW(dijkstra_parallel(g, 0, 0), ValidationError);
  EXPECT_THROW(dijkstra_parallel(g, 0, 3), ValidationError);
  EXPECT_THROW(dijkstra_parallel(g, 5, 1), ValidationError);
}

TEST(DijkstraParallelTest, RandomGraphsMatchSequentialOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<NodeId> size(8, 64);
  std::uniform_real_distribution<double> density(0.05, 0.9);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = oracle::random_graph(rng, size(rng), density(rng));
    const NodeId source = static_cast<NodeId>(rng() % static_cast<std::uint64_t>(g.size()));
    const auto seq = dijkstra_sequential(g, source);
    for (const int p : {2, 3, 8}) {
      for (const auto mode : {Execution::Threads, Execution::Lockstep}) {
        const auto par = dijkstra_parallel(g, source, p, mode);
        ASSERT_EQ(par.dist, seq.dist) << "trial " << trial << " p=" << p;
        EXPECT_EQ(par.pred, seq.pred);
        EXPECT_EQ(par.settle_order, seq.settle_order);
        ++checked;
      }
    }
    expect_result_invariants(g, seq);
  }
  EXPECT_EQ(checked, 1200);
}

TEST(DijkstraParallelTest, ZeroWeightTiesKeepTracesIdentical) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    // Tiny weight range forces many equal-distance candidates.
    const auto g = oracle::random_graph(rng, 24, 0.4, 2, /*allow_zero=*/true);
    const auto seq = dijkstra_sequential(g, 7);
    for (const int p : {2, 5, 24}) {
      const auto par = dijkstra_parallel(g, 7, p);
      EXPECT_EQ(par.dist, seq.dist);
      EXPECT_EQ(par.pred, seq.pred);
      EXPECT_EQ(par.settle_order, seq.settle_order);
    }
    expect_result_invariants(g, seq);
  }
}

TEST(WorkerViewTest, OwnsColumnBlockAndLocalSlice) {
  const auto g = load_graph_file(kFixtures / "five_node.g");
  const Partition part(5, 2);
  const WorkerView<WeightMatrix> view(1, part, g.weights(), 0);
  EXPECT_EQ(view.begin(), 3);
  EXPECT_EQ(view.end(), 5);
  EXPECT_EQ(view.columns().cols(), 2);
  EXPECT_EQ(view.columns().rows(), 5);
  EXPECT_EQ(view.dist().size(), 2u);
  EXPECT_EQ(view.columns()(2, 0), 1000);  // w(2, 3)
  EXPECT_EQ(view.local_min().vertex, kNoNode);  // neither 3 nor 4 adjacent to 0
}

TEST(FrontierCandidateTest, OrderingPrefersDistanceThenLowerId) {
  using C = FrontierCandidate<Cost>;
  EXPECT_LT((C{3, 5}), (C{1, 6}));
  EXPECT_LT((C{1, 5}), (C{3, 5}));
  EXPECT_LT((C{9, 100}), C{});
  EXPECT_FALSE(C{} < C{});
}

TEST(ExtractPathTest, Basics) {
  const auto g = load_graph_file(kFixtures / "two_node.g");
  const auto r = dijkstra_sequential(g, 0);
  EXPECT_EQ(extract_path(r, 0), std::vector<NodeId>{0});
  EXPECT_EQ(extract_path(r, 1), (std::vector<NodeId>{0, 1}));
  EXPECT_THROW(extract_path(r, 2), ValidationError);
}

TEST(ExtractPathTest, PathCostResumsToDistance) {
  const auto g = load_graph_file(kFixtures / "city9.g");
  for (NodeId s = 0; s < g.size(); ++s) {
    const auto r = dijkstra_sequential(g, s);
    for (NodeId t = 0; t < g.size(); ++t) {
      const auto path = extract_path(r, t);
      Cost sum = 0;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) sum += g.weight(path[k], path[k + 1]);
      EXPECT_EQ(sum, r.distance(t));
    }
  }
}

TEST(RankServicesTest, SingleService) {
  const auto g = load_graph("graph 2\nnode 1 service:fire\nedge 0 1 7\n");
  const auto ranked = rank_services(dijkstra_sequential(g, 0), g, {"fire"});
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0].cost, 7000);
  EXPECT_EQ(ranked[0].path, (std::vector<NodeId>{1, 0}));
}

TEST(RankServicesTest, SortedByCost) {
  const auto g = load_graph("graph 3\nnode 1 service:fire\nnode 2 service:fire\nedge 0 1 7\nedge 0 2 3\n");
  const auto ranked = rank_services(dijkstra_sequential(g, 0), g, {"fire"});
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].node, 2);
  EXPECT_EQ(ranked[1].node, 1);
}

TEST(RankServicesTest, ThreeTypesMatchFrozenOracleOrder) {
  const auto g = load_graph_file(kFixtures / "city9.g");
  const auto ranked = rank_services(dijkstra_parallel(g, 0, 3), g, {"fire", "police", "medical"});
  // Frozen from enumeration distances from node 0:
  // fire {2: 5, 3: 4}, medical {6: 6.5, 7: 6}, police {4: 5.5, 5: 5}.
  std::vector<std::tuple<NodeId, std::string, Cost>> got;
  for (const auto& s : ranked) got.emplace_back(s.node, s.service_type, s.cost);
  const std::vector<std::tuple<NodeId, std::string, Cost>> expected = {
      {3, "fire", 4000}, {2, "fire", 5000}, {7, "medical", 6000},
      {6, "medical", 6500}, {5, "police", 5000}, {4, "police", 5500}};
  EXPECT_EQ(got, expected);
  for (const auto& s : ranked) {
    EXPECT_EQ(s.path.front(), s.node);
    EXPECT_EQ(s.path.back(), 0);
    EXPECT_EQ(g.path_cost(s.path), s.cost);
  }
}

TEST(RankServicesTest, UnreachableExcludedAndVersionChecked) {
  const auto g = load_graph("graph 3\nnode 1 service:fire\nnode 2 service:fire\nedge 0 1 7\n");
  const auto r = dijkstra_sequential(g, 0);
  EXPECT_EQ(rank_services(r, g, {"fire"}).size(), 1u);
  EXPECT_TRUE(rank_services(r, g, {"police"}).empty());
  const auto h = update_graph(g, {});
  EXPECT_THROW(rank_services(r, h, {"fire"}), ValidationError);
}

}  // namespace
}  // namespace edgeroute
