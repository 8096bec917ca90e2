// Simulated wire records exchanged between surveillance systems, edge
// servers, intervention services and their teams, plus the Effects bundle
// every actor handler returns to the event loop.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "edgeroute/types.hpp"

namespace edgeroute {

using ActorId = std::string;
using Json = nlohmann::ordered_json;

enum class Severity { Low = 0, Medium = 1, High = 2 };
std::string_view to_string(Severity s);
Severity parse_severity(std::string_view text);

/// Undirected edge key with u < v.
using EdgeKey = std::pair<NodeId, NodeId>;
inline EdgeKey edge_key(NodeId a, NodeId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

ActorId service_actor(NodeId service);
ActorId team_actor(NodeId service);

struct Ping {
  int attempt = 0;
};
struct Pong {
  int attempt = 0;
};

struct IncidentAlert {
  std::string incident_id;
  NodeId location = kNoNode;
  std::string hazard;
  Severity severity = Severity::Low;
  std::set<std::string> required_types;
  std::string origin;   // SAS id
  Cost timestamp = 0;   // detection time
  int attempt = 0;      // delivery attempt that carried it
};

struct AlertAck {
  int attempt = 0;
};

struct InterventionOrder {
  std::string incident_id;
  NodeId service = kNoNode;
  std::string service_type;
  NodeId location = kNoNode;
  std::vector<NodeId> path;  // service node ... incident location
  Cost cost = 0;
  int rank = 1;                      // 1-based priority within the service type
  bool awaiting_confirmation = false;  // the server expects Confirmation/Decline
  bool from_request = false;           // dispatched for an on-site resource request
  std::string server;
  std::uint64_t graph_version = 0;
  Severity severity = Severity::Low;
};

struct StandDown {
  NodeId service = kNoNode;
};
struct Confirmation {
  NodeId service = kNoNode;
  std::string service_type;
};
struct Decline {
  NodeId service = kNoNode;
  std::string service_type;
};
struct ResourceRequest {
  NodeId requester = kNoNode;
  std::string requested_type;
  NodeId site = kNoNode;
};
struct CompletionNotice {
  NodeId service = kNoNode;
  bool aborted = false;
  int transmission = 1;
};
struct CompletionAck {
  NodeId service = kNoNode;
};
struct CompletionBroadcast {};
struct RerouteRequest {
  NodeId service = kNoNode;
  NodeId current = kNoNode;
  NodeId destination = kNoNode;
  std::vector<EdgeKey> blocked;
  int request = 0;
};
struct RerouteReply {
  NodeId service = kNoNode;
  std::vector<NodeId> path;  // empty when the incident is unreachable
  std::vector<Cost> legs;    // per-hop travel costs along path
  int request = 0;
};

using Payload = std::variant<Ping, Pong, IncidentAlert, AlertAck, InterventionOrder, StandDown, Confirmation,
                             Decline, ResourceRequest, CompletionNotice, CompletionAck, CompletionBroadcast,
                             RerouteRequest, RerouteReply>;

std::string_view kind_name(const Payload& payload);

struct Message {
  std::string incident_id;
  ActorId sender;
  ActorId receiver;
  Cost timestamp = 0;  // send time, set by the event loop
  Payload payload;

  template <typename T>
  const T* as() const { return std::get_if<T>(&payload); }
};

/// Stable-order JSON for the trace log.
Json to_json(const Message& message);
Json payload_json(const Payload& payload);

// ---------------------------------------------------------------------------
// Effects

enum class TimerKind {
  AlertFlush,       // SAS: end of the detection instant, emit the aggregated alert
  PingTimeout,      // SAS: no Pong for an attempt
  AckTimeout,       // SAS: no AlertAck for an attempt
  ConfirmTimeout,   // server: rank-1 service silent
  DecisionDue,      // service: decision latency elapsed
  TeamTick,         // team: reached the next node of its path
  ServiceDone,      // team: on-site work finished
  CompletionRetry,  // team: CompletionNotice not acknowledged
  RerouteRetry,     // team: RerouteReply not received
};
std::string_view to_string(TimerKind kind);

struct Timer {
  TimerKind kind = TimerKind::AlertFlush;
  std::string incident_id;
  std::string key;
  int token = 0;
};

struct OutgoingMessage {
  Message message;
  Cost delay = 0;  // local processing time before the message leaves
};

struct TimerRequest {
  Cost delay = 0;
  Timer timer;
};

struct Note {
  std::string event;
  Json fields;
};

struct Effects {
  std::vector<OutgoingMessage> messages;
  std::vector<TimerRequest> timers;
  std::vector<Note> notes;

  void send(Message m, Cost delay = 0) { messages.push_back({std::move(m), delay}); }
  void schedule(Cost delay, Timer t) { timers.push_back({delay, std::move(t)}); }
  void note(std::string event, Json fields = Json::object()) { notes.push_back({std::move(event), std::move(fields)}); }
  void append(Effects&& other);

  bool has_note(std::string_view event) const;
  template <typename T>
  std::vector<const T*> sent() const {
    std::vector<const T*> out;
    for (const auto& m : messages)
      if (const auto* p = m.message.as<T>()) out.push_back(p);
    return out;
  }
};

}  // namespace edgeroute
