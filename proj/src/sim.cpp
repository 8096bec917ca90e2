#include "edgeroute/sim.hpp"

#include <deque>
#include <memory>
#include <queue>
#include <variant>

namespace edgeroute {

std::uint64_t substream_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ h;  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Network::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  if (spec_.latency < 1) throw ValidationError("network latency must be at least one tick");
  for (const auto& l : spec_.links) links_[key(l.a, l.b)] = l;
}

Network::Verdict Network::transmit(const ActorId& from, const ActorId& to) {
  ++sent_;
  Cost latency = spec_.latency;
  double drop = spec_.drop_probability;
  if (const auto it = links_.find(key(from, to)); it != links_.end()) {
    latency = it->second.latency.value_or(latency);
    drop = it->second.drop_probability.value_or(drop);
  }
  auto stream = streams_.find(from);
  if (stream == streams_.end())
    stream = streams_.emplace(from, std::mt19937_64(substream_seed(seed_, "net:" + from))).first;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(stream->second);
  if (u < drop) {
    ++dropped_;
    return {false, latency};
  }
  return {true, latency};
}

namespace {

// -------------------------------------------------------------------------
// Metrics, shared by the live run and the trace replay.

struct IncidentRecord {
  std::string sas;
  NodeId location = kNoNode;
  std::string hazard;
  std::string severity;
  Cost detected_at = 0;
  std::optional<Cost> delivered_at;
  std::string server;
  std::optional<Cost> dispatched_at;
  std::optional<Cost> first_arrival;
  std::optional<Cost> closed_at;
  int failovers = 0;
  int reroutes = 0;
  bool unserved = false;
  bool alert_failed = false;
};

struct GlobalCounts {
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t parallel_runs = 0;
  std::uint64_t sequential_runs = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

Json optional_json(const std::optional<Cost>& v) { return v ? Json(*v) : Json(nullptr); }

class MetricsBuilder {
 public:
  void note(const std::string& event, const Json& f, Cost t) {
    if (event == "incident_detected") {
      auto& r = incidents_[f.at("incident").get<std::string>()];
      r.sas = f.at("sas").get<std::string>();
      r.location = f.at("location").get<NodeId>();
      r.hazard = f.at("hazard").get<std::string>();
      r.severity = f.at("severity").get<std::string>();
      r.detected_at = f.at("detected_at").get<Cost>();
      return;
    }
    if (!f.contains("incident")) return;
    const auto it = incidents_.find(f.at("incident").get<std::string>());
    if (it == incidents_.end()) return;
    auto& r = it->second;
    if (event == "failover") {
      ++r.failovers;
    } else if (event == "alert_delivered") {
      r.delivered_at = t;
      r.server = f.at("server").get<std::string>();
    } else if (event == "alert_failed") {
      r.alert_failed = true;
    } else if (event == "team_arrived") {
      if (!r.first_arrival) r.first_arrival = t;
    } else if (event == "reroute") {
      ++r.reroutes;
    } else if (event == "unserved") {
      r.unserved = true;
    } else if (event == "incident_closed") {
      if (!r.closed_at) r.closed_at = t;
    }
  }

  void order_sent(const std::string& incident, Cost t) {
    const auto it = incidents_.find(incident);
    if (it != incidents_.end() && !it->second.dispatched_at) it->second.dispatched_at = t;
  }

  Json finish(std::uint64_t seed, const GlobalCounts& g) const {
    Json out;
    out["seed"] = seed;
    out["ticks_per_time_unit"] = kCostScale;
    Json list = Json::array();
    std::uint64_t unserved = 0;
    std::uint64_t failed = 0;
    for (const auto& [id, r] : incidents_) {
      Json j;
      j["id"] = id;
      j["sas"] = r.sas;
      j["location"] = r.location;
      j["hazard"] = r.hazard;
      j["severity"] = r.severity;
      j["detected_at"] = r.detected_at;
      j["delivered_at"] = optional_json(r.delivered_at);
      j["server"] = r.server.empty() ? Json(nullptr) : Json(r.server);
      j["dispatched_at"] = optional_json(r.dispatched_at);
      j["first_arrival"] = optional_json(r.first_arrival);
      j["closed_at"] = optional_json(r.closed_at);
      j["detection_to_dispatch"] =
          r.dispatched_at ? Json(*r.dispatched_at - r.detected_at) : Json(nullptr);
      j["dispatch_to_arrival"] =
          r.dispatched_at && r.first_arrival ? Json(*r.first_arrival - *r.dispatched_at) : Json(nullptr);
      j["failovers"] = r.failovers;
      j["reroutes"] = r.reroutes;
      j["unserved"] = r.unserved || r.alert_failed;
      j["alert_failed"] = r.alert_failed;
      unserved += (r.unserved || r.alert_failed) ? 1 : 0;
      failed += r.alert_failed ? 1 : 0;
      list.push_back(std::move(j));
    }
    out["incidents"] = std::move(list);
    const auto lookups = g.cache_hits + g.cache_misses;
    out["cache"] = {{"hits", g.cache_hits},
                    {"misses", g.cache_misses},
                    {"hit_ratio", lookups ? static_cast<double>(g.cache_hits) / static_cast<double>(lookups) : 0.0}};
    out["engine_runs"] = {{"parallel", g.parallel_runs}, {"sequential", g.sequential_runs}};
    out["messages"] = {{"sent", g.sent}, {"delivered", g.delivered}, {"dropped", g.dropped},
                       {"in_flight", g.sent - g.delivered - g.dropped}};
    out["unserved_incidents"] = unserved;
    out["alert_failures"] = failed;
    return out;
  }

 private:
  std::map<std::string, IncidentRecord> incidents_;
};

// -------------------------------------------------------------------------
// Event loop

struct SensorEv {
  std::size_t sas;
  std::vector<SensorReading> readings;
};
struct SendEv {
  Message message;
};
struct DeliverEv {
  Message message;
};
struct TimerEv {
  ActorId actor;
  Timer timer;
};
struct OutageEv {
  std::string server;
  bool online;
};
struct BlockEv {
  EdgeKey edge;
  bool blocked;
};
struct UpdateEv {
  std::size_t index;
};
using EventBody = std::variant<SensorEv, SendEv, DeliverEv, TimerEv, OutageEv, BlockEv, UpdateEv>;

struct Event {
  Cost time;
  std::uint64_t seq;
  EventBody body;
};
struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

class Simulation {
 public:
  Simulation(const Scenario& sc, const SimOptions& opt)
      : sc_(sc), seed_(opt.seed.value_or(sc.seed)), network_(sc.network, seed_), graph_(sc.graph) {
    versions_[graph_->version()] = graph_;
    for (const auto& spec : sc.servers) {
      auto cfg = spec.config;
      if (opt.cache_enabled) cfg.cache_enabled = *opt.cache_enabled;
      servers_.push_back(std::make_unique<EdgeServer>(cfg, graph_));
      actors_[cfg.id] = servers_.back().get();
    }
    for (const auto& spec : sc.sas) {
      sas_.push_back(std::make_unique<SasActor>(spec.config, sc.hazards));
      actors_[spec.config.id] = sas_.back().get();
    }
    for (const auto& [node, policy] : sc.services) {
      responders_.push_back(std::make_unique<ResponderActor>(
          policy, substream_seed(seed_, service_actor(node)),
          [this](std::uint64_t v) {
            const auto it = versions_.find(v);
            return it == versions_.end() ? nullptr : it->second;
          },
          [this](NodeId u, NodeId v) { return blocked_.contains(edge_key(u, v)); }));
      actors_[service_actor(node)] = responders_.back().get();
      actors_[team_actor(node)] = responders_.back().get();
    }

    for (const auto& spec : sc.servers)
      for (const auto& o : spec.outages) {
        push(o.from, OutageEv{spec.config.id, false});
        push(o.to, OutageEv{spec.config.id, true});
      }
    for (const auto& b : sc.blocks) {
      push(b.at, BlockEv{edge_key(b.u, b.v), true});
      if (b.until) push(*b.until, BlockEv{edge_key(b.u, b.v), false});
    }
    for (std::size_t k = 0; k < sc.graph_updates.size(); ++k) push(sc.graph_updates[k].at, UpdateEv{k});
    for (std::size_t s = 0; s < sc.sas.size(); ++s) {
      std::map<Cost, std::vector<SensorReading>> batches;
      for (const auto& r : sc.sas[s].readings) batches[r.timestamp].push_back(r);
      for (auto& [t, rs] : batches) push(t, SensorEv{s, std::move(rs)});
    }
  }

  RunResult run() {
    Json start;
    start["t"] = 0;
    start["event"] = "run_start";
    start["seed"] = seed_;
    start["nodes"] = graph_->size();
    start["edges"] = graph_->edge_count();
    start["graph_version"] = graph_->version();
    Json servers = Json::array();
    for (const auto& s : servers_) servers.push_back(s->id());
    start["servers"] = std::move(servers);
    Json sas = Json::array();
    for (const auto& s : sas_) sas.push_back(s->id());
    start["sas"] = std::move(sas);
    emit(std::move(start));

    Cost now = 0;
    while (!queue_.empty()) {
      if (queue_.top().time > sc_.limits.horizon) {
        emit({{"t", sc_.limits.horizon}, {"event", "horizon_reached"}, {"pending", queue_.size()}});
        break;
      }
      Event ev = queue_.top();
      queue_.pop();
      now = ev.time;
      std::visit([&](auto& body) { handle(body, now); }, ev.body);
    }
    emit({{"t", now}, {"event", "run_end"}});

    GlobalCounts g;
    for (const auto& s : servers_) {
      g.cache_hits += s->cache().stats().hits;
      g.cache_misses += s->cache().stats().misses;
      g.parallel_runs += s->engine_runs() + s->reroute_runs();
    }
    for (const auto& r : responders_) g.sequential_runs += r->local_recomputes();
    g.sent = network_.sent();
    g.delivered = network_.delivered();
    g.dropped = network_.dropped();
    return {metrics_.finish(seed_, g), std::move(trace_)};
  }

 private:
  using Target = std::variant<SasActor*, EdgeServer*, ResponderActor*>;

  void push(Cost t, EventBody body) { queue_.push(Event{t, seq_++, std::move(body)}); }
  void emit(Json line) { trace_.push_back(line.dump()); }

  void apply(const ActorId& actor, Effects fx, Cost now) {
    for (auto& n : fx.notes) {
      metrics_.note(n.event, n.fields, now);
      Json line;
      line["t"] = now;
      line["event"] = n.event;
      line["actor"] = actor;
      for (auto& [k, v] : n.fields.items()) line[k] = v;
      emit(std::move(line));
    }
    for (auto& m : fx.messages) {
      if (m.delay > 0)
        push(now + m.delay, SendEv{std::move(m.message)});
      else
        transmit(std::move(m.message), now);
    }
    for (auto& t : fx.timers) push(now + t.delay, TimerEv{actor, std::move(t.timer)});
  }

  void transmit(Message m, Cost now) {
    if (!actors_.contains(m.receiver)) throw std::logic_error("message to unknown actor " + m.receiver);
    m.timestamp = now;
    Json line;
    line["t"] = now;
    line["event"] = "send";
    line["kind"] = kind_name(m.payload);
    line["incident"] = m.incident_id;
    line["from"] = m.sender;
    line["to"] = m.receiver;
    line["body"] = payload_json(m.payload);
    emit(std::move(line));
    if (m.as<InterventionOrder>()) metrics_.order_sent(m.incident_id, now);
    const auto verdict = network_.transmit(m.sender, m.receiver);
    if (!verdict.delivered) {
      emit({{"t", now}, {"event", "drop"}, {"kind", kind_name(m.payload)}, {"incident", m.incident_id},
            {"from", m.sender}, {"to", m.receiver}});
      return;
    }
    push(now + verdict.latency, DeliverEv{std::move(m)});
  }

  void handle(SensorEv& ev, Cost now) {
    auto& sas = *sas_[ev.sas];
    Cost peak = 0;
    for (const auto& r : ev.readings) peak = std::max(peak, r.magnitude);
    emit({{"t", now}, {"event", "sensor"}, {"sas", sas.id()}, {"readings", ev.readings.size()}, {"peak", peak}});
    apply(sas.id(), sas.on_readings(ev.readings, now), now);
  }

  void handle(SendEv& ev, Cost now) { transmit(std::move(ev.message), now); }

  void handle(DeliverEv& ev, Cost now) {
    const auto& m = ev.message;
    network_.mark_delivered();
    emit({{"t", now}, {"event", "deliver"}, {"kind", kind_name(m.payload)}, {"incident", m.incident_id},
          {"from", m.sender}, {"to", m.receiver}, {"sent", m.timestamp}});
    const auto target = actors_.at(m.receiver);
    std::visit([&](auto* actor) { apply(m.receiver, actor->on_message(m, now), now); }, target);
  }

  void handle(TimerEv& ev, Cost now) {
    emit({{"t", now}, {"event", "timer"}, {"actor", ev.actor}, {"kind", to_string(ev.timer.kind)},
          {"incident", ev.timer.incident_id}, {"token", ev.timer.token}});
    const auto target = actors_.at(ev.actor);
    std::visit([&](auto* actor) { apply(ev.actor, actor->on_timer(ev.timer, now), now); }, target);
  }

  void handle(OutageEv& ev, Cost now) {
    emit({{"t", now}, {"event", ev.online ? "server_online" : "server_offline"}, {"server", ev.server}});
    std::get<EdgeServer*>(actors_.at(ev.server))->set_online(ev.online);
  }

  void handle(BlockEv& ev, Cost now) {
    emit({{"t", now},
          {"event", ev.blocked ? "edge_blocked" : "edge_unblocked"},
          {"edge", Json::array({ev.edge.first, ev.edge.second})}});
    if (ev.blocked)
      blocked_.insert(ev.edge);
    else
      blocked_.erase(ev.edge);
  }

  void handle(UpdateEv& ev, Cost now) {
    const auto& spec = sc_.graph_updates[ev.index];
    graph_ = std::make_shared<const CityGraph>(update_graph(*graph_, spec.edits));
    versions_[graph_->version()] = graph_;
    Json edits = Json::array();
    for (const auto& e : spec.edits) edits.push_back({e.u, e.v, e.weight ? Json(*e.weight) : Json(nullptr)});
    emit({{"t", now}, {"event", "graph_update"}, {"version", graph_->version()}, {"edits", std::move(edits)}});
    for (auto& s : servers_) apply(s->id(), s->apply_graph_update(graph_), now);
  }

  const Scenario& sc_;
  std::uint64_t seed_;
  Network network_;
  std::shared_ptr<const CityGraph> graph_;
  std::map<std::uint64_t, std::shared_ptr<const CityGraph>> versions_;
  std::set<EdgeKey> blocked_;
  std::vector<std::unique_ptr<EdgeServer>> servers_;
  std::vector<std::unique_ptr<SasActor>> sas_;
  std::vector<std::unique_ptr<ResponderActor>> responders_;
  std::map<ActorId, Target> actors_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::vector<std::string> trace_;
  MetricsBuilder metrics_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const SimOptions& options) {
  return Simulation(scenario, options).run();
}

Json metrics_from_trace(const std::vector<std::string>& trace) {
  MetricsBuilder metrics;
  GlobalCounts g;
  std::uint64_t seed = 0;
  for (const auto& text : trace) {
    const auto line = Json::parse(text);
    const auto& event = line.at("event").get_ref<const std::string&>();
    const Cost t = line.at("t").get<Cost>();
    if (event == "run_start") {
      seed = line.at("seed").get<std::uint64_t>();
    } else if (event == "send") {
      ++g.sent;
      if (line.at("kind") == "InterventionOrder") metrics.order_sent(line.at("incident").get<std::string>(), t);
    } else if (event == "deliver") {
      ++g.delivered;
    } else if (event == "drop") {
      ++g.dropped;
    } else if (line.contains("actor") && event != "timer") {
      if (event == "cache_hit") ++g.cache_hits;
      if (event == "cache_miss") ++g.cache_misses;
      if (event == "engine_run" || event == "reroute_run") ++g.parallel_runs;
      if (event == "local_recompute") ++g.sequential_runs;
      metrics.note(event, line, t);
    }
  }
  return metrics.finish(seed, g);
}

}  // namespace edgeroute
