#include "edgeroute/edge_server.hpp"

#include <algorithm>

namespace edgeroute {

std::string_view to_string(ServiceState s) {
  switch (s) {
    case ServiceState::Idle: return "idle";
    case ServiceState::Alerted: return "alerted";
    case ServiceState::Confirmed: return "confirmed";
    case ServiceState::Declined: return "declined";
    case ServiceState::Engaged: return "engaged";
    case ServiceState::Done: return "done";
  }
  return "idle";
}

EdgeServer::EdgeServer(ServerConfig config, std::shared_ptr<const CityGraph> graph)
    : config_(std::move(config)), graph_(std::move(graph)), cache_(config_.cache_capacity) {
  if (!graph_) throw ValidationError("edge server needs a graph");
  if (config_.p_workers < 1) throw ValidationError("p_workers must be at least 1");
  for (NodeId v = 0; v < graph_->size(); ++v)
    if (graph_->role(v).is_service()) roster_[v] = ServiceState::Idle;
}

ServiceState EdgeServer::service_state(NodeId service) const {
  const auto it = roster_.find(service);
  return it == roster_.end() ? ServiceState::Idle : it->second;
}

Message EdgeServer::envelope(const std::string& incident_id, const ActorId& to, Payload payload) const {
  return Message{incident_id, config_.id, to, 0, std::move(payload)};
}

std::optional<Message> EdgeServer::handle_ping(const ActorId& from, const Ping& ping) const {
  if (!online_) return std::nullopt;
  return envelope({}, from, Pong{ping.attempt});
}

SsspResult EdgeServer::routes_from(NodeId source, Cost now, Effects& fx) {
  const auto version = graph_->version();
  if (config_.cache_enabled) {
    if (const auto* hit = cache_.lookup(source, version, now)) {
      fx.note("cache_hit", {{"source", source}, {"graph_version", version}});
      return hit->result;
    }
    fx.note("cache_miss", {{"source", source}, {"graph_version", version}});
  }
  const int workers = std::min<int>(config_.p_workers, graph_->size());
  auto result = dijkstra_parallel(*graph_, source, workers);
  ++engine_runs_;
  fx.note("engine_run", {{"source", source}, {"graph_version", version}, {"workers", workers}});
  if (config_.cache_enabled) cache_.insert({source, result, version, now});
  last_result_ = result;
  return result;
}

InterventionOrder EdgeServer::make_order(const IncidentDispatch& incident, const SlotDispatch& slot,
                                         std::size_t index, bool awaiting) const {
  const auto& svc = slot.ranked[index];
  InterventionOrder order;
  order.incident_id = incident.alert.incident_id;
  order.service = svc.node;
  order.service_type = svc.service_type;
  order.location = svc.path.back();
  order.path = svc.path;
  order.cost = svc.cost;
  order.rank = static_cast<int>(index) + 1;
  order.awaiting_confirmation = awaiting;
  order.from_request = !slot.standby_broadcast;
  order.server = config_.id;
  order.graph_version = graph_->version();
  order.severity = incident.alert.severity;
  return order;
}

void EdgeServer::await_cursor(const std::string& incident_id, IncidentDispatch& incident, const std::string& slot_name,
                              SlotDispatch& slot, Cost delay, Effects& fx) {
  (void)incident;
  slot.phase = SlotDispatch::Phase::Awaiting;
  slot.token = ++next_token_;
  fx.schedule(delay + config_.confirm_timeout, Timer{TimerKind::ConfirmTimeout, incident_id, slot_name, slot.token});
}

Effects EdgeServer::handle_alert(const IncidentAlert& alert, const ActorId& from, Cost now) {
  Effects fx;
  if (!online_) {
    fx.note("ignored_offline", {{"kind", "IncidentAlert"}});
    return fx;
  }
  const auto& id = alert.incident_id;
  fx.send(envelope(id, from, AlertAck{alert.attempt}));
  if (pending_.contains(id) || closed_.contains(id)) {
    fx.note("duplicate_alert", {{"incident", id}});
    return fx;
  }
  const bool known = graph_->valid_node(alert.location);
  if (!known || graph_->role(alert.location).kind != RoleKind::SurveillancePoint || alert.required_types.empty()) {
    fx.note("alert_rejected", {{"incident", id},
                               {"location", alert.location},
                               {"reason", !known ? "unknown location"
                                          : alert.required_types.empty() ? "no required types"
                                                                         : "not a surveillance point"}});
    return fx;
  }

  const auto result = routes_from(alert.location, now, fx);
  const auto ranked = rank_services(result, *graph_, alert.required_types);

  IncidentDispatch incident{alert, {}, {}, {}, {}, {}, 0, false};
  std::size_t orders = 0;
  for (const auto& type : alert.required_types) {
    SlotDispatch slot;
    slot.service_type = type;
    bool reachable = false;
    for (const auto& svc : ranked) {
      if (svc.service_type != type) continue;
      reachable = true;
      if (service_state(svc.node) == ServiceState::Idle) slot.ranked.push_back(svc);
    }
    if (slot.ranked.empty()) {
      fx.note("warning", {{"incident", id},
                          {"service_type", type},
                          {"reason", reachable ? "no idle service" : "type unreachable"}});
      fx.note("unserved", {{"incident", id}, {"slot", type}, {"service_type", type}});
      slot.phase = SlotDispatch::Phase::Exhausted;
      incident.unserved = true;
      incident.slots.emplace(type, std::move(slot));
      continue;
    }
    for (std::size_t k = 0; k < slot.ranked.size(); ++k) {
      const NodeId node = slot.ranked[k].node;
      roster_[node] = ServiceState::Alerted;
      assignment_[node] = id;
      incident.alerted.insert(node);
      fx.send(envelope(id, service_actor(node), make_order(incident, slot, k, k == 0)), config_.processing_latency);
      ++orders;
    }
    await_cursor(id, incident, type, slot, config_.processing_latency, fx);
    incident.slots.emplace(type, std::move(slot));
  }
  fx.note("orders_dispatched", {{"incident", id}, {"location", alert.location}, {"orders", orders}});
  pending_.emplace(id, std::move(incident));
  maybe_close(id, now, fx);
  return fx;
}

Effects EdgeServer::handle_confirmation(const std::string& incident_id, NodeId service, Cost now) {
  (void)now;
  Effects fx;
  const auto it = pending_.find(incident_id);
  if (it == pending_.end()) {
    fx.note("protocol_violation", {{"incident", incident_id}, {"service", service}, {"reason", "unknown incident"}});
    fx.send(envelope(incident_id, service_actor(service), StandDown{service}));
    return fx;
  }
  auto& incident = it->second;
  for (auto& [name, slot] : incident.slots) {
    if (slot.phase == SlotDispatch::Phase::Exhausted || slot.ranked.empty()) continue;
    if (slot.ranked[slot.cursor].node != service) continue;
    if (slot.phase == SlotDispatch::Phase::Engaged || slot.phase == SlotDispatch::Phase::Completed) {
      fx.note("duplicate_confirmation", {{"incident", incident_id}, {"service", service}});
      return fx;
    }
    roster_[service] = ServiceState::Engaged;
    slot.phase = SlotDispatch::Phase::Engaged;
    incident.engaged.insert(service);
    fx.note("service_engaged", {{"incident", incident_id}, {"slot", name}, {"service", service},
                                {"rank", slot.cursor + 1}});
    for (std::size_t k = 0; k < slot.ranked.size(); ++k) {
      const NodeId other = slot.ranked[k].node;
      if (k == slot.cursor || service_state(other) != ServiceState::Alerted) continue;
      roster_[other] = ServiceState::Idle;
      assignment_.erase(other);
      fx.send(envelope(incident_id, service_actor(other), StandDown{other}));
    }
    return fx;
  }
  fx.note("protocol_violation", {{"incident", incident_id}, {"service", service}, {"reason", "not awaited"}});
  fx.send(envelope(incident_id, service_actor(service), StandDown{service}));
  return fx;
}

Effects EdgeServer::advance(const std::string& incident_id, IncidentDispatch& incident, const std::string& slot_name,
                            SlotDispatch& slot, Cost now, bool timeout) {
  Effects fx;
  const NodeId current = slot.ranked[slot.cursor].node;
  roster_[current] = ServiceState::Declined;
  incident.declined.insert(current);
  fx.note(timeout ? "confirm_timeout" : "declined",
          {{"incident", incident_id}, {"slot", slot_name}, {"service", current}, {"rank", slot.cursor + 1}});

  for (++slot.cursor; slot.cursor < slot.ranked.size(); ++slot.cursor) {
    const auto state = service_state(slot.ranked[slot.cursor].node);
    const bool eligible = slot.standby_broadcast
                              ? state == ServiceState::Alerted && incident.alerted.contains(slot.ranked[slot.cursor].node)
                              : state == ServiceState::Idle;
    if (eligible) break;
  }
  if (slot.cursor < slot.ranked.size()) {
    const NodeId next = slot.ranked[slot.cursor].node;
    roster_[next] = ServiceState::Alerted;
    assignment_[next] = incident_id;
    incident.alerted.insert(next);
    fx.send(envelope(incident_id, service_actor(next), make_order(incident, slot, slot.cursor, true)));
    fx.note("redirected", {{"incident", incident_id}, {"slot", slot_name}, {"service", next},
                           {"rank", slot.cursor + 1}});
    await_cursor(incident_id, incident, slot_name, slot, 0, fx);
    return fx;
  }
  slot.cursor = slot.ranked.size() - 1;
  slot.phase = SlotDispatch::Phase::Exhausted;
  incident.unserved = true;
  fx.note("unserved", {{"incident", incident_id}, {"slot", slot_name}, {"service_type", slot.service_type}});
  maybe_close(incident_id, now, fx);
  return fx;
}

Effects EdgeServer::handle_decline(const std::string& incident_id, NodeId service, Cost now) {
  const auto it = pending_.find(incident_id);
  if (it != pending_.end()) {
    for (auto& [name, slot] : it->second.slots) {
      if (slot.phase == SlotDispatch::Phase::Awaiting && slot.ranked[slot.cursor].node == service)
        return advance(incident_id, it->second, name, slot, now, false);
    }
  }
  Effects fx;
  fx.note("stale_decline", {{"incident", incident_id}, {"service", service}});
  return fx;
}

Effects EdgeServer::handle_timeout(const std::string& incident_id, const std::string& slot_name, int token, Cost now) {
  const auto it = pending_.find(incident_id);
  if (it == pending_.end()) return {};
  const auto slot = it->second.slots.find(slot_name);
  if (slot == it->second.slots.end() || slot->second.phase != SlotDispatch::Phase::Awaiting ||
      slot->second.token != token)
    return {};
  return advance(incident_id, it->second, slot_name, slot->second, now, true);
}

Effects EdgeServer::handle_resource_request(const std::string& incident_id, const std::string& requested_type,
                                            NodeId site, Cost now) {
  Effects fx;
  const auto it = pending_.find(incident_id);
  if (it == pending_.end() || !graph_->valid_node(site)) {
    fx.note("request_rejected", {{"incident", incident_id},
                                 {"service_type", requested_type},
                                 {"reason", it == pending_.end() ? "unknown incident" : "unknown site"}});
    return fx;
  }
  auto& incident = it->second;
  const auto result = routes_from(site, now, fx);
  SlotDispatch slot;
  slot.service_type = requested_type;
  slot.standby_broadcast = false;
  for (auto& svc : rank_services(result, *graph_, {requested_type}))
    if (service_state(svc.node) == ServiceState::Idle) slot.ranked.push_back(std::move(svc));
  if (slot.ranked.empty()) {
    fx.note("unmet_request", {{"incident", incident_id}, {"service_type", requested_type}, {"site", site}});
    return fx;
  }
  const std::string name = requested_type + "#req" + std::to_string(++incident.requests);
  const NodeId chosen = slot.ranked.front().node;
  roster_[chosen] = ServiceState::Alerted;
  assignment_[chosen] = incident_id;
  incident.alerted.insert(chosen);
  fx.send(envelope(incident_id, service_actor(chosen), make_order(incident, slot, 0, true)),
          config_.processing_latency);
  fx.note("resource_dispatched", {{"incident", incident_id}, {"slot", name}, {"service", chosen},
                                  {"cost", slot.ranked.front().cost}});
  await_cursor(incident_id, incident, name, slot, config_.processing_latency, fx);
  incident.slots.emplace(name, std::move(slot));
  return fx;
}

Effects EdgeServer::handle_completion(const std::string& incident_id, NodeId service, bool aborted, Cost now) {
  Effects fx;
  fx.send(envelope(incident_id, team_actor(service), CompletionAck{service}));
  const auto it = pending_.find(incident_id);
  if (it == pending_.end()) {
    fx.note("warning", {{"incident", incident_id}, {"service", service}, {"reason", "completion for closed incident"}});
    return fx;
  }
  auto& incident = it->second;
  if (incident.done.contains(service)) {
    fx.note("duplicate_completion", {{"incident", incident_id}, {"service", service}});
    return fx;
  }
  if (!incident.engaged.contains(service)) {
    fx.note("protocol_violation", {{"incident", incident_id}, {"service", service}, {"reason", "not engaged"}});
    return fx;
  }
  roster_[service] = ServiceState::Done;
  incident.done.insert(service);
  for (auto& [name, slot] : incident.slots)
    if (slot.phase == SlotDispatch::Phase::Engaged && slot.ranked[slot.cursor].node == service)
      slot.phase = SlotDispatch::Phase::Completed;
  fx.note("service_done", {{"incident", incident_id}, {"service", service}, {"aborted", aborted}});
  roster_[service] = ServiceState::Idle;
  assignment_.erase(service);
  maybe_close(incident_id, now, fx);
  return fx;
}

void EdgeServer::maybe_close(const std::string& incident_id, Cost now, Effects& fx) {
  (void)now;
  const auto it = pending_.find(incident_id);
  if (it == pending_.end()) return;
  auto& incident = it->second;
  for (const auto& [name, slot] : incident.slots)
    if (slot.phase == SlotDispatch::Phase::Awaiting || slot.phase == SlotDispatch::Phase::Engaged) return;

  if (!incident.engaged.empty()) {
    for (const NodeId svc : incident.alerted)
      fx.send(envelope(incident_id, service_actor(svc), CompletionBroadcast{}));
    fx.send(envelope(incident_id, incident.alert.origin, CompletionBroadcast{}));
  }
  for (const NodeId svc : incident.alerted) {
    const auto owner = assignment_.find(svc);
    if (owner == assignment_.end() || owner->second != incident_id) continue;
    roster_[svc] = ServiceState::Idle;
    assignment_.erase(owner);
  }
  fx.note("incident_closed", {{"incident", incident_id},
                              {"served", !incident.unserved},
                              {"engaged", incident.engaged.size()},
                              {"broadcast", !incident.engaged.empty()}});
  closed_.insert(incident_id);
  pending_.erase(it);
}

Effects EdgeServer::handle_reroute(const std::string& incident_id, const RerouteRequest& request, const ActorId& from,
                                   Cost now) {
  (void)now;
  Effects fx;
  RerouteReply reply{request.service, {}, {}, request.request};
  if (graph_->valid_node(request.current) && graph_->valid_node(request.destination)) {
    WeightMatrix pruned = graph_->weights();
    for (const auto& [u, v] : request.blocked) {
      if (!graph_->valid_node(u) || !graph_->valid_node(v) || u == v) continue;
      pruned(u, v) = kNoEdge;
      pruned(v, u) = kNoEdge;
    }
    const int workers = std::min<int>(config_.p_workers, graph_->size());
    const auto result = dijkstra_parallel(pruned, request.current, workers);
    ++reroute_runs_;
    reply.path = extract_path(result, request.destination);
    for (std::size_t k = 0; k + 1 < reply.path.size(); ++k) reply.legs.push_back(pruned(reply.path[k], reply.path[k + 1]));
    fx.note("reroute_run", {{"incident", incident_id},
                            {"service", request.service},
                            {"source", request.current},
                            {"reachable", !reply.path.empty()}});
  }
  fx.send(envelope(incident_id, from, std::move(reply)));
  return fx;
}

Effects EdgeServer::on_message(const Message& message, Cost now) {
  if (!online_) {
    Effects fx;
    fx.note("ignored_offline", {{"kind", kind_name(message.payload)}, {"from", message.sender}});
    return fx;
  }
  const auto& id = message.incident_id;
  if (const auto* ping = message.as<Ping>()) {
    Effects fx;
    if (auto pong = handle_ping(message.sender, *ping)) {
      pong->incident_id = id;
      fx.send(std::move(*pong));
    }
    return fx;
  }
  if (const auto* alert = message.as<IncidentAlert>()) return handle_alert(*alert, message.sender, now);
  if (const auto* c = message.as<Confirmation>()) return handle_confirmation(id, c->service, now);
  if (const auto* d = message.as<Decline>()) return handle_decline(id, d->service, now);
  if (const auto* r = message.as<ResourceRequest>()) return handle_resource_request(id, r->requested_type, r->site, now);
  if (const auto* c = message.as<CompletionNotice>()) return handle_completion(id, c->service, c->aborted, now);
  if (const auto* r = message.as<RerouteRequest>()) return handle_reroute(id, *r, message.sender, now);
  Effects fx;
  fx.note("unexpected_message", {{"kind", kind_name(message.payload)}, {"from", message.sender}});
  return fx;
}

Effects EdgeServer::on_timer(const Timer& timer, Cost now) {
  if (timer.kind != TimerKind::ConfirmTimeout) return {};
  if (!online_) {
    // Frozen while offline; re-check once the outage could be over.
    Effects fx;
    fx.schedule(config_.confirm_timeout, timer);
    return fx;
  }
  return handle_timeout(timer.incident_id, timer.key, timer.token, now);
}

Effects EdgeServer::apply_graph_update(std::shared_ptr<const CityGraph> graph) {
  if (!graph || graph->version() < graph_->version()) throw ValidationError("graph update must not regress version");
  if (graph->size() != graph_->size()) throw ValidationError("graph update must keep the vertex set");
  graph_ = std::move(graph);
  Effects fx;
  const auto dropped = cache_.invalidate_all(graph_->version());
  fx.note("cache_invalidated", {{"server", config_.id}, {"graph_version", graph_->version()}, {"evicted", dropped}});
  return fx;
}

}  // namespace edgeroute
