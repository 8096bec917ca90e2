// Intervention services and their mobile teams. A ResponderActor answers to
// both svc-<n> (order processing) and team-<n> (route following).
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "edgeroute/graph.hpp"
#include "edgeroute/protocol.hpp"

namespace edgeroute {

struct ServicePolicy {
  NodeId service = kNoNode;
  std::array<double, 3> accept_probability{1.0, 1.0, 1.0};  // by Severity
  bool local_compute = false;
  Cost decision_latency = 0;
  Cost service_duration = 5 * kCostScale;
  Cost ack_timeout = 20 * kCostScale;
  int max_retransmissions = 10;
  std::vector<std::string> on_site_requests;

  void validate() const;
};

enum class Decision { Confirm, Decline, Standby };
std::string_view to_string(Decision d);

/// `draw` is uniform in [0, 1).
Decision iops_decide(const ServicePolicy& policy, const InterventionOrder& order, double draw, bool busy = false);

enum class TeamStatus { Idle, EnRoute, Rerouting, OnSite, Returning };
enum class RouteOrigin { ServerGiven, LocalRecompute, ServerRecompute };
std::string_view to_string(TeamStatus s);
std::string_view to_string(RouteOrigin o);

struct TeamState {
  NodeId service = kNoNode;
  std::string incident_id;
  std::string server;
  NodeId destination = kNoNode;
  NodeId current = kNoNode;
  std::vector<NodeId> remaining;  // head == current while travelling
  std::vector<Cost> legs;         // legs[k] = cost of remaining[k] -> remaining[k+1]
  TeamStatus status = TeamStatus::Idle;
  RouteOrigin origin = RouteOrigin::ServerGiven;
  std::set<EdgeKey> known_blocks;
  std::vector<NodeId> walk;  // every node visited, in order
  bool from_request = false;
  std::uint64_t graph_version = 0;
  int reroutes = 0;
};

/// Starts a team on an order addressed to `service`. Throws ValidationError on
/// a wrong addressee or a path that does not run service -> incident.
TeamState itgs_start(NodeId service, const InterventionOrder& order, const CityGraph& snapshot);

/// Shortest route from team.current to the destination on `snapshot` without
/// the team's known blocks; empty when unreachable.
std::vector<NodeId> local_reroute(const TeamState& team, const CityGraph& snapshot);

class ResponderActor {
 public:
  using GraphLookup = std::function<std::shared_ptr<const CityGraph>(std::uint64_t version)>;
  using BlockProbe = std::function<bool(NodeId, NodeId)>;

  ResponderActor(ServicePolicy policy, std::uint64_t seed, GraphLookup graphs, BlockProbe blocked);

  NodeId service() const { return policy_.service; }
  const ActorId& service_id() const { return service_id_; }
  const ActorId& team_id() const { return team_id_; }
  const ServicePolicy& policy() const { return policy_; }
  const TeamState& team() const { return team_; }
  bool busy() const;
  std::size_t local_recomputes() const { return local_recomputes_; }

  Effects on_message(const Message& message, Cost now);
  Effects on_timer(const Timer& timer, Cost now);

 private:
  struct PendingOrder {
    InterventionOrder order;
    int token = 0;
  };

  Effects decide(const InterventionOrder& order, Cost now);
  void depart(Cost now, Effects& fx);
  void blocked_ahead(Cost now, Effects& fx);
  void adopt_route(std::vector<NodeId> path, std::vector<Cost> legs, RouteOrigin origin, Effects& fx);
  void send_reroute(Effects& fx);
  void arrive(Cost now, Effects& fx);
  void abort(std::string_view reason, Effects& fx);
  void send_completion(bool aborted, Effects& fx);
  Message envelope(const ActorId& from, const std::string& incident_id, const ActorId& to, Payload payload) const;

  ServicePolicy policy_;
  ActorId service_id_;
  ActorId team_id_;
  std::mt19937_64 rng_;
  GraphLookup graphs_;
  BlockProbe blocked_;

  std::map<std::string, PendingOrder> orders_;  // by incident, awaiting a decision
  int next_token_ = 0;

  TeamState team_;
  std::shared_ptr<const CityGraph> snapshot_;
  int tick_token_ = 0;
  int reroute_request_ = 0;
  int reroute_attempts_ = 0;

  struct PendingCompletion {
    std::string incident_id;
    std::string server;
    bool aborted = false;
    int transmission = 0;
  };
  std::optional<PendingCompletion> completion_;
  std::size_t local_recomputes_ = 0;
};

}  // namespace edgeroute
