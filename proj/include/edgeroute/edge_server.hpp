// Edge server: answers pings, turns incident alerts into ranked intervention
// orders (cache lookup -> parallel Dijkstra -> ranking -> broadcast), and
// coordinates confirmation, decline redirect, resource requests and
// completion for every incident it owns.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edgeroute/graph.hpp"
#include "edgeroute/path_cache.hpp"
#include "edgeroute/protocol.hpp"
#include "edgeroute/sssp.hpp"

namespace edgeroute {

struct ServerConfig {
  std::string id;
  int p_workers = 4;
  std::size_t cache_capacity = PathCache::kDefaultCapacity;
  bool cache_enabled = true;
  Cost processing_latency = 1 * kCostScale;  // alert/request reception to orders leaving
  Cost confirm_timeout = 30 * kCostScale;
};

enum class ServiceState { Idle, Alerted, Confirmed, Declined, Engaged, Done };
std::string_view to_string(ServiceState s);

/// Dispatch progress for one slot of an incident: a required service type
/// from the alert, or one on-site resource request.
struct SlotDispatch {
  enum class Phase { Awaiting, Engaged, Exhausted, Completed };

  std::string service_type;
  std::vector<RankedService> ranked;
  std::size_t cursor = 0;       // index into ranked of the awaited / engaged service
  Phase phase = Phase::Awaiting;
  bool standby_broadcast = true;  // false for resource requests: only the cursor gets an order
  int token = 0;                  // matches the pending ConfirmTimeout
};

struct IncidentDispatch {
  IncidentAlert alert;
  std::map<std::string, SlotDispatch> slots;
  std::set<NodeId> alerted;  // every service that received an order
  std::set<NodeId> engaged;
  std::set<NodeId> done;
  std::set<NodeId> declined;
  int requests = 0;
  bool unserved = false;
};

class EdgeServer {
 public:
  EdgeServer(ServerConfig config, std::shared_ptr<const CityGraph> graph);

  const std::string& id() const { return config_.id; }
  const ServerConfig& config() const { return config_; }
  bool online() const { return online_; }
  void set_online(bool online) { online_ = online; }

  /// Pong iff online.
  std::optional<Message> handle_ping(const ActorId& from, const Ping& ping) const;

  Effects handle_alert(const IncidentAlert& alert, const ActorId& from, Cost now);
  Effects handle_confirmation(const std::string& incident_id, NodeId service, Cost now);
  /// Redirects the slot served by `service` (a Decline) to the next candidate.
  Effects handle_decline(const std::string& incident_id, NodeId service, Cost now);
  /// Same redirect, triggered by the confirm timer of `slot`.
  Effects handle_timeout(const std::string& incident_id, const std::string& slot, int token, Cost now);
  Effects handle_resource_request(const std::string& incident_id, const std::string& requested_type, NodeId site,
                                  Cost now);
  Effects handle_completion(const std::string& incident_id, NodeId service, bool aborted, Cost now);
  Effects handle_reroute(const std::string& incident_id, const RerouteRequest& request, const ActorId& from,
                         Cost now);

  /// Dispatches any delivered message; offline servers ignore everything.
  Effects on_message(const Message& message, Cost now);
  Effects on_timer(const Timer& timer, Cost now);

  /// Installs a newer graph and drops stale cache entries.
  Effects apply_graph_update(std::shared_ptr<const CityGraph> graph);

  const CityGraph& graph() const { return *graph_; }
  const PathCache& cache() const { return cache_; }
  std::uint64_t engine_runs() const { return engine_runs_; }
  std::uint64_t reroute_runs() const { return reroute_runs_; }
  const std::optional<SsspResult>& last_result() const { return last_result_; }
  ServiceState service_state(NodeId service) const;
  const std::map<std::string, IncidentDispatch>& pending() const { return pending_; }

 private:
  SsspResult routes_from(NodeId source, Cost now, Effects& fx);
  InterventionOrder make_order(const IncidentDispatch& incident, const SlotDispatch& slot, std::size_t index,
                               bool awaiting) const;
  void await_cursor(const std::string& incident_id, IncidentDispatch& incident, const std::string& slot_name,
                    SlotDispatch& slot, Cost delay, Effects& fx);
  Effects advance(const std::string& incident_id, IncidentDispatch& incident, const std::string& slot_name,
                  SlotDispatch& slot, Cost now, bool timeout);
  void maybe_close(const std::string& incident_id, Cost now, Effects& fx);
  Message envelope(const std::string& incident_id, const ActorId& to, Payload payload) const;

  ServerConfig config_;
  std::shared_ptr<const CityGraph> graph_;
  PathCache cache_;
  std::optional<SsspResult> last_result_;  // distance and predecessor memory
  std::map<NodeId, ServiceState> roster_;
  std::map<NodeId, std::string> assignment_;  // service -> incident holding it
  std::map<std::string, IncidentDispatch> pending_;
  std::set<std::string> closed_;
  bool online_ = true;
  std::uint64_t engine_runs_ = 0;
  std::uint64_t reroute_runs_ = 0;
  int next_token_ = 0;
};

}  // namespace edgeroute
