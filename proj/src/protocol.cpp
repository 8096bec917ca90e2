#include "edgeroute/protocol.hpp"

#include <algorithm>
#include <stdexcept>

namespace edgeroute {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Low: return "low";
    case Severity::Medium: return "medium";
    case Severity::High: return "high";
  }
  return "low";
}

Severity parse_severity(std::string_view text) {
  if (text == "low") return Severity::Low;
  if (text == "medium") return Severity::Medium;
  if (text == "high") return Severity::High;
  throw std::invalid_argument("unknown severity '" + std::string(text) + "'");
}

ActorId service_actor(NodeId service) { return "svc-" + std::to_string(service); }
ActorId team_actor(NodeId service) { return "team-" + std::to_string(service); }

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Json edges_json(const std::vector<EdgeKey>& edges) {
  Json out = Json::array();
  for (const auto& [u, v] : edges) out.push_back(Json::array({u, v}));
  return out;
}

}  // namespace

std::string_view kind_name(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const Ping&) { return std::string_view("Ping"); },
                        [](const Pong&) { return std::string_view("Pong"); },
                        [](const IncidentAlert&) { return std::string_view("IncidentAlert"); },
                        [](const AlertAck&) { return std::string_view("AlertAck"); },
                        [](const InterventionOrder&) { return std::string_view("InterventionOrder"); },
                        [](const StandDown&) { return std::string_view("StandDown"); },
                        [](const Confirmation&) { return std::string_view("Confirmation"); },
                        [](const Decline&) { return std::string_view("Decline"); },
                        [](const ResourceRequest&) { return std::string_view("ResourceRequest"); },
                        [](const CompletionNotice&) { return std::string_view("CompletionNotice"); },
                        [](const CompletionAck&) { return std::string_view("CompletionAck"); },
                        [](const CompletionBroadcast&) { return std::string_view("CompletionBroadcast"); },
                        [](const RerouteRequest&) { return std::string_view("RerouteRequest"); },
                        [](const RerouteReply&) { return std::string_view("RerouteReply"); },
                    },
                    payload);
}

Json payload_json(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const Ping& p) { return Json{{"attempt", p.attempt}}; },
          [](const Pong& p) { return Json{{"attempt", p.attempt}}; },
          [](const IncidentAlert& a) {
            return Json{{"location", a.location},       {"hazard", a.hazard},
                        {"severity", to_string(a.severity)}, {"required_types", a.required_types},
                        {"origin", a.origin},           {"detected_at", a.timestamp},
                        {"attempt", a.attempt}};
          },
          [](const AlertAck& a) { return Json{{"attempt", a.attempt}}; },
          [](const InterventionOrder& o) {
            return Json{{"service", o.service},
                        {"service_type", o.service_type},
                        {"location", o.location},
                        {"path", o.path},
                        {"cost", o.cost},
                        {"rank", o.rank},
                        {"awaiting_confirmation", o.awaiting_confirmation},
                        {"from_request", o.from_request},
                        {"server", o.server},
                        {"graph_version", o.graph_version},
                        {"severity", to_string(o.severity)}};
          },
          [](const StandDown& s) { return Json{{"service", s.service}}; },
          [](const Confirmation& c) { return Json{{"service", c.service}, {"service_type", c.service_type}}; },
          [](const Decline& d) { return Json{{"service", d.service}, {"service_type", d.service_type}}; },
          [](const ResourceRequest& r) {
            return Json{{"requester", r.requester}, {"requested_type", r.requested_type}, {"site", r.site}};
          },
          [](const CompletionNotice& c) {
            return Json{{"service", c.service}, {"aborted", c.aborted}, {"transmission", c.transmission}};
          },
          [](const CompletionAck& c) { return Json{{"service", c.service}}; },
          [](const CompletionBroadcast&) { return Json::object(); },
          [](const RerouteRequest& r) {
            return Json{{"service", r.service}, {"current", r.current}, {"destination", r.destination}, {"blocked", edges_json(r.blocked)},
                        {"request", r.request}};
          },
          [](const RerouteReply& r) {
            return Json{{"service", r.service}, {"path", r.path}, {"legs", r.legs}, {"request", r.request}};
          },
      },
      payload);
}

Json to_json(const Message& message) {
  Json out;
  out["kind"] = kind_name(message.payload);
  out["incident"] = message.incident_id;
  out["from"] = message.sender;
  out["to"] = message.receiver;
  out["sent"] = message.timestamp;
  out["body"] = payload_json(message.payload);
  return out;
}

std::string_view to_string(TimerKind kind) {
  switch (kind) {
    case TimerKind::AlertFlush: return "AlertFlush";
    case TimerKind::PingTimeout: return "PingTimeout";
    case TimerKind::AckTimeout: return "AckTimeout";
    case TimerKind::ConfirmTimeout: return "ConfirmTimeout";
    case TimerKind::DecisionDue: return "DecisionDue";
    case TimerKind::TeamTick: return "TeamTick";
    case TimerKind::ServiceDone: return "ServiceDone";
    case TimerKind::CompletionRetry: return "CompletionRetry";
    case TimerKind::RerouteRetry: return "RerouteRetry";
  }
  return "?";
}

void Effects::append(Effects&& other) {
  std::move(other.messages.begin(), other.messages.end(), std::back_inserter(messages));
  std::move(other.timers.begin(), other.timers.end(), std::back_inserter(timers));
  std::move(other.notes.begin(), other.notes.end(), std::back_inserter(notes));
}

bool Effects::has_note(std::string_view event) const {
  return std::any_of(notes.begin(), notes.end(), [&](const Note& n) { return n.event == event; });
}

}  // namespace edgeroute
