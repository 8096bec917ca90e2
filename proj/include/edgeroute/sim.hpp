// Deterministic discrete-event simulation binding SAS, edge servers and
// responders over a lossy simulated network.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "edgeroute/scenario.hpp"

namespace edgeroute {

/// Seed of the substream named `label`; independent of every other label.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view label);

class Network {
 public:
  struct Verdict {
    bool delivered = true;
    Cost latency = 0;
  };

  Network(NetworkSpec spec, std::uint64_t seed);

  /// Draws from the sender's own substream.
  Verdict transmit(const ActorId& from, const ActorId& to);
  void mark_delivered() { ++delivered_; }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  using LinkKey = std::pair<ActorId, ActorId>;
  static LinkKey key(const ActorId& a, const ActorId& b) { return a < b ? LinkKey{a, b} : LinkKey{b, a}; }

  NetworkSpec spec_;
  std::uint64_t seed_;
  std::map<LinkKey, LinkSpec> links_;
  std::map<ActorId, std::mt19937_64> streams_;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
};

struct SimOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::optional<bool> cache_enabled;  // overrides every server
};

struct RunResult {
  Json metrics;
  std::vector<std::string> trace;  // one JSON object per line
};

RunResult run_scenario(const Scenario& scenario, const SimOptions& options = {});

/// Rebuilds the metrics document from trace lines alone.
Json metrics_from_trace(const std::vector<std::string>& trace);

}  // namespace edgeroute
