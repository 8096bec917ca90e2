#include "edgeroute/responder.hpp"

#include <numeric>

#include "edgeroute/sssp.hpp"

namespace edgeroute {

void ServicePolicy::validate() const {
  for (const double p : accept_probability)
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("accept probability must lie in [0, 1]");
  if (decision_latency < 0 || service_duration < 0) throw ValidationError("latencies must be non-negative");
  if (ack_timeout <= 0) throw ValidationError("ack_timeout must be positive");
  if (max_retransmissions < 1) throw ValidationError("max_retransmissions must be at least 1");
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Confirm: return "confirm";
    case Decision::Decline: return "decline";
    case Decision::Standby: return "standby";
  }
  return "standby";
}

std::string_view to_string(TeamStatus s) {
  switch (s) {
    case TeamStatus::Idle: return "idle";
    case TeamStatus::EnRoute: return "en_route";
    case TeamStatus::Rerouting: return "rerouting";
    case TeamStatus::OnSite: return "on_site";
    case TeamStatus::Returning: return "returning";
  }
  return "idle";
}

std::string_view to_string(RouteOrigin o) {
  switch (o) {
    case RouteOrigin::ServerGiven: return "server_given";
    case RouteOrigin::LocalRecompute: return "local_recompute";
    case RouteOrigin::ServerRecompute: return "server_recompute";
  }
  return "server_given";
}

Decision iops_decide(const ServicePolicy& policy, const InterventionOrder& order, double draw, bool busy) {
  if (!order.awaiting_confirmation) return Decision::Standby;
  if (busy) return Decision::Decline;
  const double p = policy.accept_probability[static_cast<std::size_t>(order.severity)];
  return draw < p ? Decision::Confirm : Decision::Decline;
}

TeamState itgs_start(NodeId service, const InterventionOrder& order, const CityGraph& snapshot) {
  if (order.service != service) throw ValidationError("order addressed to another service");
  if (order.path.empty() || order.path.front() != service || order.path.back() != order.location)
    throw ValidationError("order path must run from the service to the incident");
  if (!snapshot.path_cost(order.path)) throw ValidationError("order path is not a walk in the graph");
  TeamState t;
  t.service = service;
  t.incident_id = order.incident_id;
  t.server = order.server;
  t.destination = order.location;
  t.current = service;
  t.remaining = order.path;
  for (std::size_t k = 0; k + 1 < order.path.size(); ++k)
    t.legs.push_back(snapshot.weight(order.path[k], order.path[k + 1]));
  t.status = order.path.size() == 1 ? TeamStatus::OnSite : TeamStatus::EnRoute;
  t.walk = {service};
  t.from_request = order.from_request;
  t.graph_version = order.graph_version;
  return t;
}

std::vector<NodeId> local_reroute(const TeamState& team, const CityGraph& snapshot) {
  WeightMatrix view = snapshot.weights();
  for (const auto& [u, v] : team.known_blocks) {
    view(u, v) = kNoEdge;
    view(v, u) = kNoEdge;
  }
  return extract_path(dijkstra_sequential(view, team.current), team.destination);
}

ResponderActor::ResponderActor(ServicePolicy policy, std::uint64_t seed, GraphLookup graphs, BlockProbe blocked)
    : policy_(std::move(policy)),
      service_id_(service_actor(policy_.service)),
      team_id_(team_actor(policy_.service)),
      rng_(seed),
      graphs_(std::move(graphs)),
      blocked_(std::move(blocked)) {
  policy_.validate();
}

bool ResponderActor::busy() const {
  return team_.status == TeamStatus::EnRoute || team_.status == TeamStatus::Rerouting ||
         team_.status == TeamStatus::OnSite;
}

Message ResponderActor::envelope(const ActorId& from, const std::string& incident_id, const ActorId& to,
                                 Payload payload) const {
  return Message{incident_id, from, to, 0, std::move(payload)};
}

Effects ResponderActor::on_message(const Message& message, Cost now) {
  Effects fx;
  const auto& id = message.incident_id;
  if (const auto* order = message.as<InterventionOrder>()) {
    if (!order->awaiting_confirmation) {
      fx.note("standby", {{"incident", id}, {"service", policy_.service}, {"rank", order->rank}});
      return fx;
    }
    const int token = ++next_token_;
    orders_[id] = PendingOrder{*order, token};
    fx.schedule(policy_.decision_latency, Timer{TimerKind::DecisionDue, id, {}, token});
    return fx;
  }
  if (message.as<StandDown>()) {
    orders_.erase(id);
    fx.note("stood_down", {{"incident", id}, {"service", policy_.service}});
    if (busy() && team_.incident_id == id) {
      ++tick_token_;
      team_.status = TeamStatus::Idle;
      fx.note("team_recalled", {{"incident", id}, {"service", policy_.service}, {"at", team_.current}});
    }
    return fx;
  }
  if (message.as<CompletionBroadcast>()) {
    fx.note("incident_concluded", {{"incident", id}, {"service", policy_.service}});
    return fx;
  }
  if (const auto* reply = message.as<RerouteReply>()) {
    if (team_.status != TeamStatus::Rerouting || team_.incident_id != id || reply->request != reroute_request_)
      return fx;
    if (reply->path.empty() || reply->path.front() != team_.current) {
      abort("unreachable", fx);
      return fx;
    }
    adopt_route(reply->path, reply->legs, RouteOrigin::ServerRecompute, fx);
    depart(now, fx);
    return fx;
  }
  if (message.as<CompletionAck>()) {
    if (completion_ && completion_->incident_id == id) {
      completion_.reset();
      if (team_.status == TeamStatus::Returning) team_.status = TeamStatus::Idle;
      fx.note("team_idle", {{"incident", id}, {"service", policy_.service}});
    }
    return fx;
  }
  fx.note("unexpected_message", {{"kind", kind_name(message.payload)}, {"from", message.sender}});
  return fx;
}

Effects ResponderActor::decide(const InterventionOrder& order, Cost now) {
  Effects fx;
  const bool was_busy = busy() && team_.incident_id != order.incident_id;
  const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  const Decision d = iops_decide(policy_, order, draw, was_busy);
  fx.note("decision", {{"incident", order.incident_id},
                       {"service", policy_.service},
                       {"rank", order.rank},
                       {"decision", to_string(d)},
                       {"busy", was_busy}});
  if (d == Decision::Decline) {
    fx.send(envelope(service_id_, order.incident_id, order.server, Decline{policy_.service, order.service_type}));
    return fx;
  }
  if (d == Decision::Standby) return fx;

  fx.send(envelope(service_id_, order.incident_id, order.server, Confirmation{policy_.service, order.service_type}));
  snapshot_ = graphs_(order.graph_version);
  if (!snapshot_) throw ValidationError("no graph snapshot for version " + std::to_string(order.graph_version));
  team_ = itgs_start(policy_.service, order, *snapshot_);
  completion_.reset();
  fx.note("team_dispatched", {{"incident", order.incident_id},
                              {"service", policy_.service},
                              {"path", order.path},
                              {"cost", order.cost}});
  if (team_.status == TeamStatus::OnSite)
    arrive(now, fx);
  else
    depart(now, fx);
  return fx;
}

void ResponderActor::depart(Cost now, Effects& fx) {
  team_.status = TeamStatus::EnRoute;
  const NodeId next = team_.remaining[1];
  if (blocked_ && blocked_(team_.current, next)) {
    team_.known_blocks.insert(edge_key(team_.current, next));
    fx.note("block_discovered", {{"incident", team_.incident_id},
                                 {"service", policy_.service},
                                 {"at", team_.current},
                                 {"edge", Json::array({team_.current, next})}});
    blocked_ahead(now, fx);
    return;
  }
  fx.schedule(team_.legs.front(), Timer{TimerKind::TeamTick, team_.incident_id, {}, ++tick_token_});
}

void ResponderActor::blocked_ahead(Cost now, Effects& fx) {
  if (policy_.local_compute) {
    ++local_recomputes_;
    auto path = local_reroute(team_, *snapshot_);
    fx.note("local_recompute",
            {{"incident", team_.incident_id}, {"service", policy_.service}, {"source", team_.current}});
    if (path.empty()) {
      abort("unreachable", fx);
      return;
    }
    std::vector<Cost> legs;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) legs.push_back(snapshot_->weight(path[k], path[k + 1]));
    adopt_route(std::move(path), std::move(legs), RouteOrigin::LocalRecompute, fx);
    depart(now, fx);
    return;
  }
  team_.status = TeamStatus::Rerouting;
  reroute_attempts_ = 0;
  send_reroute(fx);
}

void ResponderActor::send_reroute(Effects& fx) {
  ++reroute_attempts_;
  RerouteRequest req{policy_.service, team_.current, team_.destination,
                     {team_.known_blocks.begin(), team_.known_blocks.end()}, ++reroute_request_};
  fx.send(envelope(team_id_, team_.incident_id, team_.server, std::move(req)));
  fx.schedule(policy_.ack_timeout, Timer{TimerKind::RerouteRetry, team_.incident_id, {}, reroute_request_});
}

void ResponderActor::adopt_route(std::vector<NodeId> path, std::vector<Cost> legs, RouteOrigin origin, Effects& fx) {
  team_.remaining = std::move(path);
  team_.legs = std::move(legs);
  team_.origin = origin;
  ++team_.reroutes;
  fx.note("reroute", {{"incident", team_.incident_id},
                      {"service", policy_.service},
                      {"at", team_.current},
                      {"origin", to_string(origin)},
                      {"path", team_.remaining},
                      {"cost", std::accumulate(team_.legs.begin(), team_.legs.end(), Cost{0})}});
}

void ResponderActor::arrive(Cost now, Effects& fx) {
  team_.status = TeamStatus::OnSite;
  fx.note("team_arrived",
          {{"incident", team_.incident_id}, {"service", policy_.service}, {"node", team_.current}, {"at", now}});
  fx.schedule(policy_.service_duration, Timer{TimerKind::ServiceDone, team_.incident_id, {}, ++tick_token_});
  if (team_.from_request) return;
  for (const auto& type : policy_.on_site_requests)
    fx.send(envelope(team_id_, team_.incident_id, team_.server, ResourceRequest{policy_.service, type, team_.current}));
}

void ResponderActor::abort(std::string_view reason, Effects& fx) {
  ++tick_token_;
  fx.note("team_aborted",
          {{"incident", team_.incident_id}, {"service", policy_.service}, {"at", team_.current}, {"reason", reason}});
  team_.status = TeamStatus::Returning;
  send_completion(true, fx);
}

void ResponderActor::send_completion(bool aborted, Effects& fx) {
  completion_ = PendingCompletion{team_.incident_id, team_.server, aborted, 1};
  fx.send(envelope(team_id_, team_.incident_id, team_.server, CompletionNotice{policy_.service, aborted, 1}));
  fx.schedule(policy_.ack_timeout, Timer{TimerKind::CompletionRetry, team_.incident_id, {}, 1});
}

Effects ResponderActor::on_timer(const Timer& timer, Cost now) {
  Effects fx;
  switch (timer.kind) {
    case TimerKind::DecisionDue: {
      const auto it = orders_.find(timer.incident_id);
      if (it == orders_.end() || it->second.token != timer.token) break;
      const auto order = it->second.order;
      orders_.erase(it);
      return decide(order, now);
    }
    case TimerKind::TeamTick: {
      if (timer.token != tick_token_ || team_.status != TeamStatus::EnRoute) break;
      const NodeId from = team_.current;
      const Cost leg = team_.legs.front();
      team_.remaining.erase(team_.remaining.begin());
      team_.legs.erase(team_.legs.begin());
      team_.current = team_.remaining.front();
      team_.walk.push_back(team_.current);
      fx.note("team_moved", {{"incident", team_.incident_id},
                             {"service", policy_.service},
                             {"from", from},
                             {"to", team_.current},
                             {"cost", leg}});
      if (team_.current == team_.destination)
        arrive(now, fx);
      else
        depart(now, fx);
      break;
    }
    case TimerKind::RerouteRetry:
      if (timer.token != reroute_request_ || team_.status != TeamStatus::Rerouting) break;
      if (reroute_attempts_ >= policy_.max_retransmissions)
        abort("reroute unanswered", fx);
      else
        send_reroute(fx);
      break;
    case TimerKind::ServiceDone:
      if (timer.token != tick_token_ || team_.status != TeamStatus::OnSite) break;
      team_.status = TeamStatus::Returning;
      fx.note("service_completed", {{"incident", team_.incident_id}, {"service", policy_.service}, {"at", now}});
      send_completion(false, fx);
      break;
    case TimerKind::CompletionRetry: {
      if (!completion_ || completion_->incident_id != timer.incident_id || completion_->transmission != timer.token)
        break;
      if (completion_->transmission >= policy_.max_retransmissions) {
        fx.note("completion_unacknowledged", {{"incident", completion_->incident_id}, {"service", policy_.service}});
        completion_.reset();
        if (team_.status == TeamStatus::Returning) team_.status = TeamStatus::Idle;
        break;
      }
      const int n = ++completion_->transmission;
      fx.send(envelope(team_id_, completion_->incident_id, completion_->server,
                       CompletionNotice{policy_.service, completion_->aborted, n}));
      fx.schedule(policy_.ack_timeout, Timer{TimerKind::CompletionRetry, completion_->incident_id, {}, n});
      break;
    }
    default:
      break;
  }
  return fx;
}

}  // namespace edgeroute
