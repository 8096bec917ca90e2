// Surveillance and alerting system: threshold detection over sensor batches,
// per-incident deduplication and ping-based edge-server selection.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "edgeroute/protocol.hpp"

namespace edgeroute {

struct SensorReading {
  std::string sas_id;
  std::string sensor_id;
  NodeId location = kNoNode;
  std::string hazard;
  Cost magnitude = 0;  // milli-units
  Cost timestamp = 0;
};

struct SasConfig {
  std::string id;
  NodeId location = kNoNode;
  Cost threshold = kCostScale;
  std::vector<std::string> servers;  // proximity order
  Cost ping_timeout = 5 * kCostScale;
  std::optional<Cost> ack_timeout;  // defaults to ping_timeout
  int max_retries = 2;              // full passes over the server list
  Cost dedup_window = 10 * kCostScale;

  void validate() const;
};

/// Hazard -> service types to request; unknown hazards map to {hazard}.
using HazardTable = std::map<std::string, std::set<std::string>>;
std::set<std::string> required_types_for(const HazardTable& table, const std::string& hazard);

Severity severity_band(Cost magnitude, Cost threshold);

struct Detection {
  NodeId location = kNoNode;
  std::string hazard;
  Severity severity = Severity::Low;
  Cost magnitude = 0;
  Cost timestamp = 0;
};

/// Incident iff the strongest reading reaches the threshold.
std::optional<Detection> detect(const SasConfig& config, std::span<const SensorReading> readings);

/// Collapses detections sharing (location, hazard) whose time falls within
/// dedup_window of the window's first detection. Output is in window-open order.
std::vector<Detection> aggregate(const SasConfig& config, std::span<const Detection> detections);

class SasActor {
 public:
  SasActor(SasConfig config, HazardTable hazards);

  const std::string& id() const { return config_.id; }
  const SasConfig& config() const { return config_; }

  Effects on_readings(std::span<const SensorReading> readings, Cost now);
  Effects on_message(const Message& message, Cost now);
  Effects on_timer(const Timer& timer, Cost now);

  std::size_t alerts_opened() const { return windows_opened_; }
  std::size_t delivered() const { return delivered_; }
  std::size_t failures() const { return failures_; }
  std::size_t failovers() const { return failovers_; }

 private:
  struct Window {
    std::string incident_id;
    Cost opened = 0;
    bool flushed = false;
  };
  struct Delivery {
    enum class Stage { Pinging, Sending, Delivered, Failed };
    IncidentAlert alert;
    std::size_t server = 0;
    int pass = 0;
    int attempt = 0;
    Stage stage = Stage::Pinging;
  };

  void start_attempt(Delivery& d, Effects& fx);
  void fail_over(Delivery& d, Effects& fx, std::string_view reason);
  Message envelope(const std::string& incident_id, const std::string& to, Payload payload) const;

  SasConfig config_;
  HazardTable hazards_;
  std::map<std::pair<NodeId, std::string>, Window> windows_;
  std::map<std::string, Delivery> deliveries_;
  std::size_t next_incident_ = 0;
  std::size_t windows_opened_ = 0;
  std::size_t delivered_ = 0;
  std::size_t failures_ = 0;
  std::size_t failovers_ = 0;
};

}  // namespace edgeroute
