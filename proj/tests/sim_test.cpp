#include <gtest/gtest.h>

#include "edgeroute/sim.hpp"

namespace edgeroute {
namespace {

const std::filesystem::path kScenarios = EDGEROUTE_SCENARIO_DIR;

std::vector<Json> parse(const RunResult& r) {
  std::vector<Json> out;
  for (const auto& line : r.trace) out.push_back(Json::parse(line));
  return out;
}

std::vector<Json> events(const std::vector<Json>& trace, std::string_view name) {
  std::vector<Json> out;
  for (const auto& l : trace)
    if (l.at("event") == name) out.push_back(l);
  return out;
}

std::vector<Json> sends(const std::vector<Json>& trace, std::string_view kind) {
  std::vector<Json> out;
  for (const auto& l : trace)
    if (l.at("event") == "send" && l.at("kind") == kind) out.push_back(l);
  return out;
}

TEST(NetworkTest, NoDropMeansDeliveryAtLatency) {
  Network net({2500, 0.0, {}}, 1);
  for (int k = 0; k < 100; ++k) {
    const auto v = net.transmit("a", "b");
    EXPECT_TRUE(v.delivered);
    EXPECT_EQ(v.latency, 2500);
  }
  EXPECT_EQ(net.dropped(), 0u);
}

TEST(NetworkTest, CertainDrop) {
  Network net({1000, 1.0, {}}, 1);
  for (int k = 0; k < 100; ++k) EXPECT_FALSE(net.transmit("a", "b").delivered);
  EXPECT_EQ(net.dropped(), 100u);
  EXPECT_EQ(net.sent(), 100u);
}

TEST(NetworkTest, EmpiricalDropRate) {
  Network net({1000, 0.3, {}}, 20240601);
  for (int k = 0; k < 10000; ++k) net.transmit("sas-a", "es-1");
  const double rate = static_cast<double>(net.dropped()) / 10000.0;
  EXPECT_NEAR(rate, 0.3, 0.02);
}

TEST(NetworkTest, LinkOverrides) {
  Network net({1000, 1.0, {{"a", "b", 4000, 0.0}}}, 1);
  const auto v = net.transmit("b", "a");
  EXPECT_TRUE(v.delivered);
  EXPECT_EQ(v.latency, 4000);
  EXPECT_FALSE(net.transmit("a", "c").delivered);
}

TEST(NetworkTest, SubstreamsAreIndependentOfOtherActors) {
  Network alone({1000, 0.5, {}}, 9);
  Network mixed({1000, 0.5, {}}, 9);
  std::vector<bool> a, b;
  for (int k = 0; k < 200; ++k) {
    a.push_back(alone.transmit("x", "y").delivered);
    mixed.transmit("z", "y");
    b.push_back(mixed.transmit("x", "y").delivered);
  }
  EXPECT_EQ(a, b);
  EXPECT_NE(substream_seed(1, "a"), substream_seed(1, "b"));
  EXPECT_NE(substream_seed(1, "a"), substream_seed(2, "a"));
}

TEST(ScenarioTest, DemoLoads) {
  const auto sc = load_scenario_file(kScenarios / "demo.json");
  EXPECT_EQ(sc.graph->size(), 9);
  ASSERT_EQ(sc.servers.size(), 2u);
  EXPECT_EQ(sc.servers[0].outages.size(), 1u);
  EXPECT_EQ(sc.servers[0].outages[0].to, 50000);
  EXPECT_EQ(sc.sas.at(0).readings.size(), 3u);
  EXPECT_EQ(sc.services.size(), 6u);  // every service node, configured or not
  EXPECT_EQ(sc.services.at(3).decision_latency, 500);
}

TEST(ScenarioTest, ErrorsCarryPointer) {
  const std::string base = R"({"graph": {"inline": "graph 2\nnode 0 surveillance\nnode 1 service:fire\nedge 0 1 1\n"})";
  auto expect_pointer = [&](const std::string& rest, const std::string& pointer) {
    try {
      load_scenario_text(base + rest + "}");
      ADD_FAILURE() << "accepted: " << rest;
    } catch (const ScenarioError& e) {
      EXPECT_EQ(e.pointer(), pointer) << e.what();
    }
  };
  expect_pointer(R"(, "bogus": 1)", "/bogus");
  expect_pointer(R"(, "servers": [{"id": "es-1", "p_workers": 0}])", "/servers/0/p_workers");
  expect_pointer(R"(, "servers": [{"id": "es-1"}], "sas": [{"id": "s", "location": 0, "servers": ["es-9"]}])",
                 "/sas/0/servers/0");
  expect_pointer(R"(, "servers": [{"id": "es-1"}], "sas": [{"id": "s", "location": 1, "servers": ["es-1"]}])",
                 "/sas/0/location");
  expect_pointer(R"(, "faults": {"blocks": [{"t": 1, "u": 0, "v": 0}]})", "/faults/blocks/0");
  expect_pointer(R"(, "services": [{"node": 0}])", "/services/0/node");
  expect_pointer(R"(, "network": {"drop_probability": 2})", "/network/drop_probability");
  expect_pointer(R"(, "limits": {"horizon": 0.0001})", "/limits/horizon");
  expect_pointer(R"(, "servers": [{"id": "svc-1"}])", "/servers/0/id");
}

TEST(ScenarioTest, MalformedJsonReportsLine) {
  try {
    load_scenario_text("{\n  \"graph\": {\n  ,\n}");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ScenarioTest, GeneratedGraph) {
  const auto sc = load_scenario_text(
      R"({"graph": {"generate": {"n": 20, "density": 0.2, "seed": 4, "services": {"fire": 2}}}})");
  EXPECT_EQ(sc.graph->size(), 20);
  EXPECT_EQ(sc.graph->services_of_type("fire").size(), 2u);
}

TEST(SimTest, EmptyScenarioIsQuiet) {
  const auto sc = load_scenario_text(R"({"graph": {"inline": "graph 2\nedge 0 1 1\n"}})");
  const auto r = run_scenario(sc);
  EXPECT_TRUE(r.metrics.at("incidents").empty());
  EXPECT_EQ(r.metrics.at("messages").at("sent"), 0);
  EXPECT_EQ(r.trace.size(), 2u);  // run_start, run_end
}

TEST(SimTest, DemoHasExactlyOneFailover) {
  const auto r = run_scenario(load_scenario_file(kScenarios / "demo.json"));
  const auto trace = parse(r);
  EXPECT_EQ(events(trace, "failover").size(), 1u);
  EXPECT_EQ(sends(trace, "IncidentAlert").size(), 1u);
  const auto& inc = r.metrics.at("incidents");
  ASSERT_EQ(inc.size(), 1u);
  EXPECT_EQ(inc[0].at("failovers"), 1);
  EXPECT_EQ(inc[0].at("server"), "es-2");
  EXPECT_FALSE(inc[0].at("unserved").get<bool>());
  EXPECT_FALSE(inc[0].at("first_arrival").is_null());
  EXPECT_FALSE(inc[0].at("closed_at").is_null());
}

TEST(SimTest, DeterministicTrace) {
  const auto sc = load_scenario_file(kScenarios / "demo.json");
  const auto a = run_scenario(sc);
  const auto b = run_scenario(sc);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.metrics, b.metrics);
}

TEST(SimTest, MetricsRecomputedFromTrace) {
  for (const auto* name : {"demo.json", "repeat.json", "reroute.json", "decline.json"}) {
    const auto r = run_scenario(load_scenario_file(kScenarios / name));
    EXPECT_EQ(metrics_from_trace(r.trace), r.metrics) << name;
  }
}

TEST(SimTest, CausalityAndConservation) {
  for (const auto* name : {"demo.json", "repeat.json", "reroute.json", "decline.json"}) {
    const auto r = run_scenario(load_scenario_file(kScenarios / name));
    const auto trace = parse(r);
    for (const auto& d : events(trace, "deliver")) EXPECT_GT(d.at("t").get<Cost>(), d.at("sent").get<Cost>());
    const auto& m = r.metrics.at("messages");
    EXPECT_EQ(m.at("in_flight"), 0) << name;
    EXPECT_EQ(m.at("sent").get<std::uint64_t>(),
              m.at("delivered").get<std::uint64_t>() + m.at("dropped").get<std::uint64_t>());
  }
}

TEST(SimTest, OrdersAreValidPaths) {
  for (const auto* name : {"demo.json", "repeat.json", "reroute.json", "decline.json"}) {
    const auto sc = load_scenario_file(kScenarios / name);
    const auto trace = parse(run_scenario(sc));
    for (const auto& o : sends(trace, "InterventionOrder")) {
      const auto& body = o.at("body");
      const auto path = body.at("path").get<std::vector<NodeId>>();
      EXPECT_EQ(path.front(), body.at("service").get<NodeId>());
      EXPECT_EQ(path.back(), body.at("location").get<NodeId>());
      EXPECT_EQ(sc.graph->path_cost(path), std::optional<Cost>(body.at("cost").get<Cost>()));
    }
  }
}

TEST(SimTest, PingsDuringOutageTimeOut) {
  auto sc = load_scenario_file(kScenarios / "demo.json");
  sc.servers[0].outages = {{5000, 15000}};
  sc.sas[0].readings = {{"sas-a", "s", 0, "fire", 20000, 6000}};
  const auto trace = parse(run_scenario(sc));
  const auto pongs = sends(trace, "Pong");
  ASSERT_FALSE(pongs.empty());
  EXPECT_EQ(pongs[0].at("from"), "es-2");
  EXPECT_EQ(events(trace, "failover").size(), 1u);
}

TEST(SimTest, ServerBackOnlineAnswers) {
  auto sc = load_scenario_file(kScenarios / "demo.json");
  sc.servers[0].outages = {{5000, 15000}};
  sc.sas[0].readings = {{"sas-a", "s", 0, "fire", 20000, 16000}};
  const auto trace = parse(run_scenario(sc));
  EXPECT_TRUE(events(trace, "failover").empty());
  EXPECT_EQ(sends(trace, "Pong").at(0).at("from"), "es-1");
}

TEST(SimTest, GraphUpdateInvalidatesEveryServer) {
  auto sc = load_scenario_file(kScenarios / "demo.json");
  sc.graph_updates = {{20000, {{0, 8, 3000}}}};
  const auto trace = parse(run_scenario(sc));
  const auto inv = events(trace, "cache_invalidated");
  ASSERT_EQ(inv.size(), 2u);
  for (const auto& l : inv) {
    EXPECT_EQ(l.at("t"), 20000);
    EXPECT_EQ(l.at("graph_version"), 1);
  }
}

TEST(SimTest, BlockOnRouteTriggersReroute) {
  const auto r = run_scenario(load_scenario_file(kScenarios / "reroute.json"));
  const auto trace = parse(r);
  EXPECT_EQ(events(trace, "block_discovered").size(), 1u);
  EXPECT_EQ(events(trace, "reroute").size(), 1u);
  EXPECT_EQ(sends(trace, "RerouteRequest").size(), 1u);
  EXPECT_EQ(r.metrics.at("incidents").at(0).at("reroutes"), 1);
}

TEST(SimTest, SeedChangesOnlyStochasticDraws) {
  auto sc = load_scenario_file(kScenarios / "demo.json");
  const auto a = run_scenario(sc, {.seed = 1});
  const auto b = run_scenario(sc, {.seed = 2});
  EXPECT_EQ(a.metrics.at("seed"), 1);
  EXPECT_EQ(b.metrics.at("seed"), 2);
  EXPECT_EQ(a.metrics.at("incidents"), b.metrics.at("incidents"));  // no drops, p = 1 everywhere
}

TEST(SimTest, LossyNetworkStillTerminates) {
  auto sc = load_scenario_file(kScenarios / "demo.json");
  sc.network.drop_probability = 0.2;
  const auto r = run_scenario(sc, {.seed = 5});
  EXPECT_EQ(metrics_from_trace(r.trace), r.metrics);
  EXPECT_GT(r.metrics.at("messages").at("dropped").get<int>(), 0);
}

}  // namespace
}  // namespace edgeroute
