#include <gtest/gtest.h>

#include <queue>

#include "edgeroute/responder.hpp"
#include "oracles.hpp"

namespace edgeroute {
namespace {

// 0 incident, 1 service. Direct road 1-2-0 (3 + 4), detour 2-3-0 (2 + 6).
std::shared_ptr<const CityGraph> road() {
  return std::make_shared<const CityGraph>(
      load_graph("graph 4\nnode 0 surveillance\nnode 1 service:fire\n"
                 "edge 1 2 3\nedge 2 0 4\nedge 2 3 2\nedge 3 0 6\n"));
}

InterventionOrder order(std::vector<NodeId> path, bool awaiting = true) {
  InterventionOrder o;
  o.incident_id = "sas-a-1";
  o.service = path.front();
  o.service_type = "fire";
  o.location = path.back();
  o.path = std::move(path);
  o.rank = awaiting ? 1 : 3;
  o.awaiting_confirmation = awaiting;
  o.server = "es-1";
  o.severity = Severity::High;
  return o;
}

Message to(const ActorId& receiver, Payload p, const std::string& incident = "sas-a-1") {
  return {incident, "es-1", receiver, 0, std::move(p)};
}

// Runs an actor's timers to quiescence and records notes and messages with
// their times. Messages are not delivered back.
struct Driver {
  struct Item {
    Cost at;
    int seq;
    Timer timer;
    bool operator>(const Item& o) const { return std::tie(at, seq) > std::tie(o.at, o.seq); }
  };
  ResponderActor& actor;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<std::pair<Cost, Note>> notes;
  std::vector<std::pair<Cost, Message>> sent;
  int seq = 0;
  Cost now = 0;

  void absorb(Effects fx) {
    for (auto& n : fx.notes) notes.emplace_back(now, std::move(n));
    for (auto& m : fx.messages) sent.emplace_back(now + m.delay, std::move(m.message));
    for (auto& t : fx.timers) queue.push({now + t.delay, seq++, std::move(t.timer)});
  }
  void deliver(const Message& m, Cost at) {
    now = at;
    absorb(actor.on_message(m, now));
  }
  void run(Cost until = 1'000'000'000) {
    while (!queue.empty() && queue.top().at <= until) {
      auto item = queue.top();
      queue.pop();
      now = item.at;
      absorb(actor.on_timer(item.timer, now));
    }
  }
  std::optional<Cost> first(std::string_view event) const {
    for (const auto& [t, n] : notes)
      if (n.event == event) return t;
    return std::nullopt;
  }
  template <typename T>
  std::vector<std::pair<Cost, T>> messages() const {
    std::vector<std::pair<Cost, T>> out;
    for (const auto& [t, m] : sent)
      if (const auto* p = m.template as<T>()) out.emplace_back(t, *p);
    return out;
  }
};

ResponderActor actor(ServicePolicy policy, std::shared_ptr<const CityGraph> g, std::set<EdgeKey>* blocks = nullptr) {
  return ResponderActor(
      std::move(policy), 7, [g](std::uint64_t) { return g; },
      [blocks](NodeId u, NodeId v) { return blocks && blocks->contains(edge_key(u, v)); });
}

ServicePolicy policy(double p = 1.0) {
  ServicePolicy pol;
  pol.service = 1;
  pol.accept_probability = {p, p, p};
  return pol;
}

TEST(IopsDecideTest, Rules) {
  const auto o = order({1, 2, 0});
  EXPECT_EQ(iops_decide(policy(1.0), o, 0.999), Decision::Confirm);
  EXPECT_EQ(iops_decide(policy(0.0), o, 0.0), Decision::Decline);
  EXPECT_EQ(iops_decide(policy(1.0), order({1, 2, 0}, false), 0.0), Decision::Standby);
  EXPECT_EQ(iops_decide(policy(1.0), o, 0.0, true), Decision::Decline);
  auto pol = policy();
  pol.accept_probability = {1.0, 1.0, 0.25};
  EXPECT_EQ(iops_decide(pol, o, 0.2), Decision::Confirm);
  EXPECT_EQ(iops_decide(pol, o, 0.3), Decision::Decline);
}

TEST(IopsDecideTest, PolicyValidation) {
  auto pol = policy(1.5);
  EXPECT_THROW(pol.validate(), ValidationError);
}

TEST(ItgsStartTest, TwoHops) {
  const auto g = road();
  const auto t = itgs_start(1, order({1, 2, 0}), *g);
  EXPECT_EQ(t.current, 1);
  EXPECT_EQ(t.status, TeamStatus::EnRoute);
  EXPECT_EQ(t.remaining.size() - 1, 2u);
  EXPECT_EQ(t.legs, (std::vector<Cost>{3000, 4000}));
  EXPECT_EQ(t.origin, RouteOrigin::ServerGiven);
}

TEST(ItgsStartTest, CoLocatedServiceIsOnSite) {
  const auto t = itgs_start(1, order({1}), *road());
  EXPECT_EQ(t.status, TeamStatus::OnSite);
}

TEST(ItgsStartTest, WrongTeamOrBadPathRejected) {
  const auto g = road();
  EXPECT_THROW(itgs_start(3, order({1, 2, 0}), *g), ValidationError);
  EXPECT_THROW(itgs_start(1, order({1, 0}), *g), ValidationError);  // not an edge
}

TEST(ResponderTest, StandbyOrderProducesNoMessage) {
  auto a = actor(policy(), road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0}, false)), 0);
  d.run();
  EXPECT_TRUE(d.sent.empty());
  EXPECT_TRUE(d.first("standby").has_value());
}

TEST(ResponderTest, ArrivalTimeEqualsPathCost) {
  auto pol = policy();
  pol.decision_latency = 1000;
  auto a = actor(pol, road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 5000);
  d.run();
  const auto confirms = d.messages<Confirmation>();
  ASSERT_EQ(confirms.size(), 1u);
  EXPECT_EQ(confirms[0].first, 6000);
  EXPECT_EQ(d.first("team_arrived"), std::optional<Cost>(6000 + 7000));
  EXPECT_EQ(a.team().walk, (std::vector<NodeId>{1, 2, 0}));
}

TEST(ResponderTest, DeclineWithZeroProbability) {
  auto a = actor(policy(0.0), road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run();
  EXPECT_EQ(d.messages<Decline>().size(), 1u);
  EXPECT_TRUE(d.messages<Confirmation>().empty());
  EXPECT_FALSE(a.busy());
}

TEST(ResponderTest, LocalRerouteMatchesPrunedOracle) {
  const auto g = road();
  std::set<EdgeKey> blocks{edge_key(2, 0)};
  auto pol = policy();
  pol.local_compute = true;
  auto a = actor(pol, g, &blocks);
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run();

  std::vector<Edge> edges;
  for (const auto& e : g->edges())
    if (!blocks.contains(edge_key(e.u, e.v))) edges.push_back(e);
  const auto pruned = CityGraph::from_edges(g->size(), edges, {g->roles().begin(), g->roles().end()});
  const Cost detour = oracle::floyd_warshall(pruned)[2][0];
  ASSERT_EQ(detour, 8000);

  EXPECT_EQ(a.team().walk, (std::vector<NodeId>{1, 2, 3, 0}));
  EXPECT_EQ(a.team().origin, RouteOrigin::LocalRecompute);
  EXPECT_EQ(a.local_recomputes(), 1u);
  EXPECT_EQ(d.first("block_discovered"), std::optional<Cost>(3000));
  EXPECT_EQ(d.first("team_arrived"), std::optional<Cost>(3000 + detour));
  for (std::size_t k = 0; k + 1 < a.team().walk.size(); ++k)
    EXPECT_TRUE(g->has_edge(a.team().walk[k], a.team().walk[k + 1]));
}

TEST(ResponderTest, ServerRerouteRequestedWithoutLocalCompute) {
  std::set<EdgeKey> blocks{edge_key(2, 0)};
  auto a = actor(policy(), road(), &blocks);
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(3000);
  const auto reqs = d.messages<RerouteRequest>();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].second.current, 2);
  EXPECT_EQ(reqs[0].second.destination, 0);
  EXPECT_EQ(reqs[0].second.blocked, (std::vector<EdgeKey>{edge_key(0, 2)}));
  EXPECT_EQ(a.team().status, TeamStatus::Rerouting);

  d.deliver(to("team-1", RerouteReply{1, {2, 3, 0}, {2000, 6000}, reqs[0].second.request}), 4000);
  d.run();
  EXPECT_EQ(a.team().origin, RouteOrigin::ServerRecompute);
  EXPECT_EQ(d.first("team_arrived"), std::optional<Cost>(12000));
}

TEST(ResponderTest, UnansweredRerouteIsRetried) {
  std::set<EdgeKey> blocks{edge_key(2, 0)};
  auto pol = policy();
  pol.max_retransmissions = 3;
  auto a = actor(pol, road(), &blocks);
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(3000 + 2 * pol.ack_timeout);
  EXPECT_EQ(d.messages<RerouteRequest>().size(), 3u);
  d.run();
  EXPECT_TRUE(d.first("team_aborted").has_value());
}

TEST(ResponderTest, IsolatedIncidentAborts) {
  std::set<EdgeKey> blocks{edge_key(2, 0), edge_key(3, 0)};
  auto pol = policy();
  pol.local_compute = true;
  auto a = actor(pol, road(), &blocks);
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(20000);
  EXPECT_TRUE(d.first("team_aborted").has_value());
  const auto notices = d.messages<CompletionNotice>();
  ASSERT_FALSE(notices.empty());
  EXPECT_TRUE(notices[0].second.aborted);
}

TEST(ResponderTest, CompletionAfterServiceDuration) {
  // Arrival at t=12 with service_duration=5 gives the notice at t=17.
  auto pol = policy();
  pol.service_duration = 5000;
  pol.decision_latency = 5000;
  auto a = actor(pol, road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(20000);
  EXPECT_EQ(d.first("team_arrived"), std::optional<Cost>(12000));
  const auto notices = d.messages<CompletionNotice>();
  ASSERT_EQ(notices.size(), 1u);
  EXPECT_EQ(notices[0].first, 17000);
  EXPECT_FALSE(notices[0].second.aborted);
}

TEST(ResponderTest, LostCompletionIsRetransmitted) {
  auto pol = policy();
  auto a = actor(pol, road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(7000 + pol.service_duration + pol.ack_timeout);
  auto notices = d.messages<CompletionNotice>();
  ASSERT_EQ(notices.size(), 2u);
  EXPECT_EQ(notices[1].first - notices[0].first, pol.ack_timeout);
  EXPECT_EQ(notices[1].second.transmission, 2);
  d.deliver(to("team-1", CompletionAck{1}), d.now + 1);
  d.run();
  EXPECT_EQ(d.messages<CompletionNotice>().size(), 2u);
  EXPECT_EQ(a.team().status, TeamStatus::Idle);
}

TEST(ResponderTest, OnSiteRequestsSentOnArrival) {
  auto pol = policy();
  pol.on_site_requests = {"medical"};
  auto a = actor(pol, road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(7000);
  const auto reqs = d.messages<ResourceRequest>();
  ASSERT_EQ(reqs.size(), 1u);
  EXPECT_EQ(reqs[0].second.requested_type, "medical");
  EXPECT_EQ(reqs[0].second.site, 0);
}

TEST(ResponderTest, BusyTeamDeclinesOtherIncident) {
  auto a = actor(policy(), road());
  Driver d{a};
  d.deliver(to("svc-1", order({1, 2, 0})), 0);
  d.run(1000);
  auto other = order({1, 2, 0});
  other.incident_id = "sas-b-1";
  d.deliver(to("svc-1", other, "sas-b-1"), 1000);
  d.run(1000);
  const auto declines = d.messages<Decline>();
  ASSERT_EQ(declines.size(), 1u);
}

}  // namespace
}  // namespace edgeroute
