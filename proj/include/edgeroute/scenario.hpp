// Scenario files (JSON) for the discrete-event simulator. All times and
// magnitudes are written as decimals in time units and stored as ticks.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgeroute/edge_server.hpp"
#include "edgeroute/graph.hpp"
#include "edgeroute/responder.hpp"
#include "edgeroute/sas.hpp"

namespace edgeroute {

/// Schema or reference error; `pointer` locates the offending value.
class ScenarioError : public ValidationError {
 public:
  ScenarioError(std::string pointer, const std::string& what)
      : ValidationError(pointer.empty() ? what : pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

struct Interval {
  Cost from = 0;
  Cost to = 0;  // exclusive
};

struct ServerSpec {
  ServerConfig config;
  std::vector<Interval> outages;
};

struct SasSpec {
  SasConfig config;
  std::vector<SensorReading> readings;
};

struct LinkSpec {
  ActorId a;
  ActorId b;
  std::optional<Cost> latency;
  std::optional<double> drop_probability;
};

struct NetworkSpec {
  Cost latency = kCostScale;
  double drop_probability = 0.0;
  std::vector<LinkSpec> links;
};

struct BlockSpec {
  Cost at = 0;
  NodeId u = kNoNode;
  NodeId v = kNoNode;
  std::optional<Cost> until;
};

struct GraphUpdateSpec {
  Cost at = 0;
  std::vector<EdgeEdit> edits;
};

struct Limits {
  Cost confirm_timeout = 30 * kCostScale;
  Cost ack_timeout = 20 * kCostScale;
  Cost processing_latency = 1 * kCostScale;
  Cost horizon = 100000 * kCostScale;
};

struct Scenario {
  std::uint64_t seed = 1;
  std::shared_ptr<const CityGraph> graph;
  std::vector<ServerSpec> servers;
  std::vector<SasSpec> sas;
  HazardTable hazards;
  std::map<NodeId, ServicePolicy> services;  // every service node of the graph
  NetworkSpec network;
  std::vector<BlockSpec> blocks;
  std::vector<GraphUpdateSpec> graph_updates;
  Limits limits;
};

/// Relative graph file references resolve against `base_dir`.
Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario_text(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace edgeroute
