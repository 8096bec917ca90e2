#include "edgeroute/sas.hpp"

#include <algorithm>

namespace edgeroute {

void SasConfig::validate() const {
  if (id.empty()) throw ValidationError("sas id must not be empty");
  if (servers.empty()) throw ValidationError("sas " + id + ": server list must not be empty");
  if (threshold <= 0) throw ValidationError("sas " + id + ": threshold must be positive");
  if (ping_timeout <= 0 || ack_timeout.value_or(1) <= 0) throw ValidationError("sas " + id + ": timeouts must be positive");
  if (max_retries < 1) throw ValidationError("sas " + id + ": max_retries must be at least 1");
  if (dedup_window < 0) throw ValidationError("sas " + id + ": dedup_window must be non-negative");
}

std::set<std::string> required_types_for(const HazardTable& table, const std::string& hazard) {
  const auto it = table.find(hazard);
  if (it != table.end() && !it->second.empty()) return it->second;
  return {hazard};
}

Severity severity_band(Cost magnitude, Cost threshold) {
  if (magnitude >= 4 * threshold) return Severity::High;
  if (magnitude >= 2 * threshold) return Severity::Medium;
  return Severity::Low;
}

std::optional<Detection> detect(const SasConfig& config, std::span<const SensorReading> readings) {
  const SensorReading* best = nullptr;
  for (const auto& r : readings) {
    if (r.magnitude < 0) throw ValidationError("sensor magnitude must be non-negative");
    if (!best || r.magnitude > best->magnitude) best = &r;
  }
  if (!best || best->magnitude < config.threshold) return std::nullopt;
  const NodeId where = best->location == kNoNode ? config.location : best->location;
  return Detection{where, best->hazard, severity_band(best->magnitude, config.threshold), best->magnitude,
                   best->timestamp};
}

std::vector<Detection> aggregate(const SasConfig& config, std::span<const Detection> detections) {
  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection& a, const Detection& b) { return a.timestamp < b.timestamp; });
  std::vector<Detection> out;
  std::map<std::pair<NodeId, std::string>, std::size_t> open;
  for (const auto& d : sorted) {
    const auto key = std::pair(d.location, d.hazard);
    const auto it = open.find(key);
    if (it != open.end() && d.timestamp - out[it->second].timestamp <= config.dedup_window) {
      auto& alert = out[it->second];
      alert.severity = std::max(alert.severity, d.severity);
      alert.magnitude = std::max(alert.magnitude, d.magnitude);
      continue;
    }
    open[key] = out.size();
    out.push_back(d);
  }
  return out;
}

SasActor::SasActor(SasConfig config, HazardTable hazards) : config_(std::move(config)), hazards_(std::move(hazards)) {
  config_.validate();
}

Message SasActor::envelope(const std::string& incident_id, const std::string& to, Payload payload) const {
  return Message{incident_id, config_.id, to, 0, std::move(payload)};
}

Effects SasActor::on_readings(std::span<const SensorReading> readings, Cost now) {
  Effects fx;
  const auto found = detect(config_, readings);
  if (!found) {
    fx.note("below_threshold", {{"sas", config_.id}, {"readings", readings.size()}});
    return fx;
  }
  const auto key = std::pair(found->location, found->hazard);
  const auto it = windows_.find(key);
  if (it != windows_.end() && now - it->second.opened <= config_.dedup_window) {
    auto& d = deliveries_.at(it->second.incident_id);
    if (!it->second.flushed) {
      d.alert.severity = std::max(d.alert.severity, found->severity);
      fx.note("detection_merged", {{"incident", it->second.incident_id}, {"severity", to_string(d.alert.severity)}});
    } else {
      fx.note("detection_absorbed", {{"incident", it->second.incident_id}, {"severity", to_string(found->severity)}});
    }
    return fx;
  }

  const std::string incident = config_.id + "-" + std::to_string(++next_incident_);
  windows_[key] = Window{incident, now, false};
  ++windows_opened_;
  Delivery d;
  d.alert.incident_id = incident;
  d.alert.location = found->location;
  d.alert.hazard = found->hazard;
  d.alert.severity = found->severity;
  d.alert.required_types = required_types_for(hazards_, found->hazard);
  d.alert.origin = config_.id;
  d.alert.timestamp = now;
  deliveries_[incident] = std::move(d);
  fx.note("incident_detected", {{"incident", incident},
                                {"sas", config_.id},
                                {"location", found->location},
                                {"hazard", found->hazard},
                                {"severity", to_string(found->severity)},
                                {"detected_at", now}});
  fx.schedule(0, Timer{TimerKind::AlertFlush, incident, {}, 0});
  return fx;
}

void SasActor::start_attempt(Delivery& d, Effects& fx) {
  d.stage = Delivery::Stage::Pinging;
  ++d.attempt;
  const auto& server = config_.servers[d.server];
  fx.send(envelope(d.alert.incident_id, server, Ping{d.attempt}));
  fx.schedule(config_.ping_timeout, Timer{TimerKind::PingTimeout, d.alert.incident_id, server, d.attempt});
}

void SasActor::fail_over(Delivery& d, Effects& fx, std::string_view reason) {
  const auto& from = config_.servers[d.server];
  if (++d.server == config_.servers.size()) {
    d.server = 0;
    ++d.pass;
  }
  if (d.pass >= config_.max_retries) {
    d.stage = Delivery::Stage::Failed;
    ++failures_;
    fx.note("alert_failed", {{"incident", d.alert.incident_id}, {"passes", d.pass}, {"attempts", d.attempt}});
    return;
  }
  ++failovers_;
  fx.note("failover", {{"incident", d.alert.incident_id},
                       {"from", from},
                       {"to", config_.servers[d.server]},
                       {"reason", reason}});
  start_attempt(d, fx);
}

Effects SasActor::on_message(const Message& message, Cost now) {
  (void)now;
  Effects fx;
  const auto it = deliveries_.find(message.incident_id);
  if (const auto* b = message.as<CompletionBroadcast>(); b) {
    fx.note("incident_completed", {{"incident", message.incident_id}, {"server", message.sender}});
    return fx;
  }
  if (it == deliveries_.end()) {
    fx.note("unexpected_message", {{"kind", kind_name(message.payload)}, {"from", message.sender}});
    return fx;
  }
  auto& d = it->second;
  const bool current = message.sender == config_.servers[d.server];
  if (const auto* pong = message.as<Pong>()) {
    if (!current || pong->attempt != d.attempt || d.stage != Delivery::Stage::Pinging) {
      fx.note("late_pong", {{"incident", d.alert.incident_id}, {"from", message.sender}, {"attempt", pong->attempt}});
      return fx;
    }
    d.stage = Delivery::Stage::Sending;
    d.alert.attempt = d.attempt;
    fx.send(envelope(d.alert.incident_id, message.sender, d.alert));
    fx.schedule(config_.ack_timeout.value_or(config_.ping_timeout),
                Timer{TimerKind::AckTimeout, d.alert.incident_id, message.sender, d.attempt});
    return fx;
  }
  if (const auto* ack = message.as<AlertAck>()) {
    if (!current || ack->attempt != d.attempt || d.stage != Delivery::Stage::Sending) return fx;
    d.stage = Delivery::Stage::Delivered;
    ++delivered_;
    fx.note("alert_delivered",
            {{"incident", d.alert.incident_id}, {"server", message.sender}, {"attempts", d.attempt}});
    return fx;
  }
  fx.note("unexpected_message", {{"kind", kind_name(message.payload)}, {"from", message.sender}});
  return fx;
}

Effects SasActor::on_timer(const Timer& timer, Cost now) {
  (void)now;
  Effects fx;
  const auto it = deliveries_.find(timer.incident_id);
  if (it == deliveries_.end()) return fx;
  auto& d = it->second;
  switch (timer.kind) {
    case TimerKind::AlertFlush:
      for (auto& [key, w] : windows_)
        if (w.incident_id == timer.incident_id) w.flushed = true;
      start_attempt(d, fx);
      break;
    case TimerKind::PingTimeout:
      if (d.stage == Delivery::Stage::Pinging && timer.token == d.attempt) fail_over(d, fx, "ping timeout");
      break;
    case TimerKind::AckTimeout:
      if (d.stage == Delivery::Stage::Sending && timer.token == d.attempt) fail_over(d, fx, "ack timeout");
      break;
    default:
      break;
  }
  return fx;
}

}  // namespace edgeroute
