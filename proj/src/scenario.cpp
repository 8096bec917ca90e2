#include "edgeroute/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace edgeroute {
namespace {

std::string child(const std::string& ptr, std::string_view key) { return ptr + "/" + std::string(key); }
std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

[[noreturn]] void fail(const std::string& ptr, const std::string& what) { throw ScenarioError(ptr, what); }

void expect_object(const Json& j, const std::string& ptr, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) fail(ptr, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto a : allowed) ok = ok || key == a;
    if (!ok) fail(child(ptr, key), "unknown key");
  }
}

const Json& array_at(const Json& j, std::string_view key, const std::string& ptr) {
  static const Json kEmpty = Json::array();
  if (!j.contains(key)) return kEmpty;
  const auto& a = j.at(std::string(key));
  if (!a.is_array()) fail(child(ptr, key), "expected an array");
  return a;
}

Cost as_ticks(const Json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  try {
    return parse_milli(j.dump());
  } catch (const std::invalid_argument&) {
    fail(ptr, "at most three decimal places are supported");
  }
}

Cost ticks(const Json& j, std::string_view key, const std::string& ptr, std::optional<Cost> fallback = std::nullopt,
           bool allow_zero = true) {
  if (!j.contains(key)) {
    if (!fallback) fail(child(ptr, key), "required");
    return *fallback;
  }
  const Cost v = as_ticks(j.at(std::string(key)), child(ptr, key));
  if (v < 0 || (!allow_zero && v == 0)) fail(child(ptr, key), allow_zero ? "must be non-negative" : "must be positive");
  return v;
}

std::int64_t integer(const Json& j, std::string_view key, const std::string& ptr,
                     std::optional<std::int64_t> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) fail(child(ptr, key), "required");
    return *fallback;
  }
  const auto& v = j.at(std::string(key));
  if (!v.is_number_integer()) fail(child(ptr, key), "expected an integer");
  return v.get<std::int64_t>();
}

double probability(const Json& v, const std::string& ptr) {
  if (!v.is_number()) fail(ptr, "expected a number");
  const double p = v.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) fail(ptr, "probability must lie in [0, 1]");
  return p;
}

std::string text(const Json& j, std::string_view key, const std::string& ptr,
                 std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) fail(child(ptr, key), "required");
    return *fallback;
  }
  const auto& v = j.at(std::string(key));
  if (!v.is_string() || v.get<std::string>().empty()) fail(child(ptr, key), "expected a non-empty string");
  return v.get<std::string>();
}

bool flag(const Json& j, std::string_view key, const std::string& ptr, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(std::string(key));
  if (!v.is_boolean()) fail(child(ptr, key), "expected a boolean");
  return v.get<bool>();
}

NodeId node(const Json& j, std::string_view key, const std::string& ptr, const CityGraph& g) {
  const auto v = integer(j, key, ptr);
  if (v < 0 || v >= g.size()) fail(child(ptr, key), "unknown node " + std::to_string(v));
  return static_cast<NodeId>(v);
}

std::vector<std::string> strings(const Json& j, std::string_view key, const std::string& ptr) {
  std::vector<std::string> out;
  const auto& a = array_at(j, key, ptr);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].is_string()) fail(child(child(ptr, key), k), "expected a string");
    out.push_back(a[k].get<std::string>());
  }
  return out;
}

CityGraph read_graph(const Json& j, const std::filesystem::path& base_dir) {
  const std::string ptr = "/graph";
  expect_object(j, ptr, {"file", "inline", "generate"});
  if (j.size() != 1) fail(ptr, "exactly one of file, inline or generate is required");
  try {
    if (j.contains("file")) {
      std::filesystem::path p = text(j, "file", ptr);
      if (p.is_relative()) p = base_dir / p;
      return load_graph_file(p);
    }
    if (j.contains("inline")) return load_graph(text(j, "inline", ptr));
  } catch (const ParseError& e) {
    fail(ptr, e.what());
  } catch (const ValidationError& e) {
    fail(ptr, e.what());
  } catch (const std::runtime_error& e) {
    fail(ptr, e.what());
  }
  const auto& g = j.at("generate");
  const std::string gp = child(ptr, "generate");
  expect_object(g, gp, {"n", "density", "seed", "services", "surveillance_fraction"});
  CityOptions opt;
  opt.n = static_cast<NodeId>(integer(g, "n", gp));
  if (!g.contains("density") || !g.at("density").is_number()) fail(child(gp, "density"), "expected a number");
  opt.density = g.at("density").get<double>();
  opt.seed = static_cast<std::uint64_t>(integer(g, "seed", gp, 0));
  if (g.contains("surveillance_fraction"))
    opt.surveillance_fraction = probability(g.at("surveillance_fraction"), child(gp, "surveillance_fraction"));
  if (g.contains("services")) {
    const auto& s = g.at("services");
    if (!s.is_object()) fail(child(gp, "services"), "expected an object");
    for (const auto& [type, count] : s.items()) {
      if (!count.is_number_integer()) fail(child(child(gp, "services"), type), "expected an integer");
      opt.service_counts[type] = count.get<int>();
    }
  }
  try {
    return generate_city(opt);
  } catch (const std::exception& e) {
    fail(gp, e.what());
  }
}

ServicePolicy read_policy(const Json& j, const std::string& ptr, const CityGraph& g, Cost ack_timeout) {
  expect_object(j, ptr,
                {"node", "accept", "local_compute", "decision_latency", "service_duration", "on_site_requests",
                 "max_retransmissions"});
  ServicePolicy p;
  p.service = node(j, "node", ptr, g);
  if (!g.role(p.service).is_service()) fail(child(ptr, "node"), "node is not an intervention service");
  if (j.contains("accept")) {
    const auto& a = j.at("accept");
    const auto ap = child(ptr, "accept");
    if (a.is_number()) {
      p.accept_probability.fill(probability(a, ap));
    } else {
      expect_object(a, ap, {"low", "medium", "high"});
      for (const auto s : {Severity::Low, Severity::Medium, Severity::High}) {
        const std::string key(to_string(s));
        if (a.contains(key)) p.accept_probability[static_cast<std::size_t>(s)] = probability(a.at(key), child(ap, key));
      }
    }
  }
  p.local_compute = flag(j, "local_compute", ptr, false);
  p.decision_latency = ticks(j, "decision_latency", ptr, p.decision_latency);
  p.service_duration = ticks(j, "service_duration", ptr, p.service_duration);
  p.max_retransmissions = static_cast<int>(integer(j, "max_retransmissions", ptr, p.max_retransmissions));
  if (p.max_retransmissions < 1) fail(child(ptr, "max_retransmissions"), "must be at least 1");
  p.on_site_requests = strings(j, "on_site_requests", ptr);
  p.ack_timeout = ack_timeout;
  return p;
}

void check_actor_id(const std::string& id, const std::string& ptr, std::set<std::string>& seen) {
  if (id.starts_with("svc-") || id.starts_with("team-")) fail(ptr, "ids starting with svc- or team- are reserved");
  if (!seen.insert(id).second) fail(ptr, "duplicate actor id '" + id + "'");
}

}  // namespace

Scenario parse_scenario(const Json& doc, const std::filesystem::path& base_dir) {
  expect_object(doc, "", {"seed", "graph", "servers", "sas", "hazards", "services", "network", "faults", "limits"});
  Scenario sc;
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) fail("/seed", "expected a non-negative integer");
    sc.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (!doc.contains("graph")) fail("/graph", "required");
  sc.graph = std::make_shared<const CityGraph>(read_graph(doc.at("graph"), base_dir));
  const CityGraph& g = *sc.graph;

  if (doc.contains("limits")) {
    const auto& l = doc.at("limits");
    expect_object(l, "/limits", {"confirm_timeout", "ack_timeout", "processing_latency", "horizon"});
    sc.limits.confirm_timeout = ticks(l, "confirm_timeout", "/limits", sc.limits.confirm_timeout, false);
    sc.limits.ack_timeout = ticks(l, "ack_timeout", "/limits", sc.limits.ack_timeout, false);
    sc.limits.processing_latency = ticks(l, "processing_latency", "/limits", sc.limits.processing_latency);
    sc.limits.horizon = ticks(l, "horizon", "/limits", sc.limits.horizon);
  }

  std::set<std::string> ids;
  const auto& servers = array_at(doc, "servers", "");
  for (std::size_t k = 0; k < servers.size(); ++k) {
    const auto ptr = child("/servers", k);
    const auto& s = servers[k];
    expect_object(s, ptr, {"id", "p_workers", "cache_capacity", "cache", "outages"});
    ServerSpec spec;
    spec.config.id = text(s, "id", ptr);
    check_actor_id(spec.config.id, child(ptr, "id"), ids);
    spec.config.p_workers = static_cast<int>(integer(s, "p_workers", ptr, spec.config.p_workers));
    if (spec.config.p_workers < 1) fail(child(ptr, "p_workers"), "must be at least 1");
    const auto cap = integer(s, "cache_capacity", ptr, static_cast<std::int64_t>(spec.config.cache_capacity));
    if (cap < 1) fail(child(ptr, "cache_capacity"), "must be at least 1");
    spec.config.cache_capacity = static_cast<std::size_t>(cap);
    spec.config.cache_enabled = flag(s, "cache", ptr, true);
    spec.config.processing_latency = sc.limits.processing_latency;
    spec.config.confirm_timeout = sc.limits.confirm_timeout;
    const auto& outages = array_at(s, "outages", ptr);
    for (std::size_t o = 0; o < outages.size(); ++o) {
      const auto op = child(child(ptr, "outages"), o);
      expect_object(outages[o], op, {"from", "to"});
      Interval iv{ticks(outages[o], "from", op), ticks(outages[o], "to", op)};
      if (iv.to <= iv.from) fail(op, "outage must end after it starts");
      spec.outages.push_back(iv);
    }
    sc.servers.push_back(std::move(spec));
  }
  std::set<std::string> server_ids;
  for (const auto& s : sc.servers) server_ids.insert(s.config.id);

  if (doc.contains("hazards")) {
    const auto& h = doc.at("hazards");
    if (!h.is_object()) fail("/hazards", "expected an object");
    for (const auto& [hazard, types] : h.items()) {
      const auto hp = child("/hazards", hazard);
      if (!types.is_array() || types.empty()) fail(hp, "expected a non-empty array of service types");
      for (std::size_t k = 0; k < types.size(); ++k) {
        if (!types[k].is_string()) fail(child(hp, k), "expected a string");
        sc.hazards[hazard].insert(types[k].get<std::string>());
      }
    }
  }

  const auto& sas = array_at(doc, "sas", "");
  for (std::size_t k = 0; k < sas.size(); ++k) {
    const auto ptr = child("/sas", k);
    const auto& s = sas[k];
    expect_object(s, ptr,
                  {"id", "location", "threshold", "servers", "ping_timeout", "ack_timeout", "max_retries",
                   "dedup_window", "readings"});
    SasSpec spec;
    auto& c = spec.config;
    c.id = text(s, "id", ptr);
    check_actor_id(c.id, child(ptr, "id"), ids);
    c.location = node(s, "location", ptr, g);
    if (g.role(c.location).kind != RoleKind::SurveillancePoint)
      fail(child(ptr, "location"), "node is not a surveillance point");
    c.threshold = ticks(s, "threshold", ptr, c.threshold, false);
    c.servers = strings(s, "servers", ptr);
    if (c.servers.empty()) fail(child(ptr, "servers"), "must list at least one edge server");
    for (std::size_t i = 0; i < c.servers.size(); ++i)
      if (!server_ids.contains(c.servers[i])) fail(child(child(ptr, "servers"), i), "unknown server '" + c.servers[i] + "'");
    c.ping_timeout = ticks(s, "ping_timeout", ptr, c.ping_timeout, false);
    if (s.contains("ack_timeout")) c.ack_timeout = ticks(s, "ack_timeout", ptr, std::nullopt, false);
    c.max_retries = static_cast<int>(integer(s, "max_retries", ptr, c.max_retries));
    if (c.max_retries < 1) fail(child(ptr, "max_retries"), "must be at least 1");
    c.dedup_window = ticks(s, "dedup_window", ptr, c.dedup_window);
    const auto& readings = array_at(s, "readings", ptr);
    for (std::size_t r = 0; r < readings.size(); ++r) {
      const auto rp = child(child(ptr, "readings"), r);
      expect_object(readings[r], rp, {"t", "sensor", "hazard", "magnitude"});
      SensorReading sr;
      sr.sas_id = c.id;
      sr.sensor_id = text(readings[r], "sensor", rp, "s" + std::to_string(r));
      sr.location = c.location;
      sr.hazard = text(readings[r], "hazard", rp);
      sr.magnitude = ticks(readings[r], "magnitude", rp);
      sr.timestamp = ticks(readings[r], "t", rp);
      spec.readings.push_back(std::move(sr));
    }
    sc.sas.push_back(std::move(spec));
  }

  for (NodeId v = 0; v < g.size(); ++v) {
    if (!g.role(v).is_service()) continue;
    ServicePolicy p;
    p.service = v;
    p.ack_timeout = sc.limits.ack_timeout;
    sc.services[v] = p;
  }
  const auto& services = array_at(doc, "services", "");
  std::set<NodeId> configured;
  for (std::size_t k = 0; k < services.size(); ++k) {
    const auto ptr = child("/services", k);
    auto p = read_policy(services[k], ptr, g, sc.limits.ack_timeout);
    if (!configured.insert(p.service).second) fail(child(ptr, "node"), "service configured twice");
    sc.services[p.service] = std::move(p);
  }

  std::set<std::string> actors = ids;
  for (const auto& [v, p] : sc.services) {
    actors.insert(service_actor(v));
    actors.insert(team_actor(v));
  }
  if (doc.contains("network")) {
    const auto& n = doc.at("network");
    expect_object(n, "/network", {"latency", "drop_probability", "links"});
    sc.network.latency = ticks(n, "latency", "/network", sc.network.latency, false);
    if (n.contains("drop_probability"))
      sc.network.drop_probability = probability(n.at("drop_probability"), "/network/drop_probability");
    const auto& links = array_at(n, "links", "/network");
    for (std::size_t k = 0; k < links.size(); ++k) {
      const auto lp = child("/network/links", k);
      expect_object(links[k], lp, {"a", "b", "latency", "drop_probability"});
      LinkSpec l;
      l.a = text(links[k], "a", lp);
      l.b = text(links[k], "b", lp);
      if (!actors.contains(l.a)) fail(child(lp, "a"), "unknown actor '" + l.a + "'");
      if (!actors.contains(l.b)) fail(child(lp, "b"), "unknown actor '" + l.b + "'");
      if (links[k].contains("latency")) l.latency = ticks(links[k], "latency", lp, std::nullopt, false);
      if (links[k].contains("drop_probability"))
        l.drop_probability = probability(links[k].at("drop_probability"), child(lp, "drop_probability"));
      sc.network.links.push_back(std::move(l));
    }
  }

  if (doc.contains("faults")) {
    const auto& f = doc.at("faults");
    expect_object(f, "/faults", {"blocks", "graph_updates"});
    const auto& blocks = array_at(f, "blocks", "/faults");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto bp = child("/faults/blocks", k);
      expect_object(blocks[k], bp, {"t", "u", "v", "until"});
      BlockSpec b{ticks(blocks[k], "t", bp), node(blocks[k], "u", bp, g), node(blocks[k], "v", bp, g), std::nullopt};
      if (!g.has_edge(b.u, b.v)) fail(bp, "no such edge");
      if (blocks[k].contains("until")) {
        b.until = ticks(blocks[k], "until", bp);
        if (*b.until <= b.at) fail(child(bp, "until"), "must be after t");
      }
      sc.blocks.push_back(b);
    }
    const auto& updates = array_at(f, "graph_updates", "/faults");
    CityGraph check = g;
    Cost last = 0;
    for (std::size_t k = 0; k < updates.size(); ++k) {
      const auto up = child("/faults/graph_updates", k);
      expect_object(updates[k], up, {"t", "edits"});
      GraphUpdateSpec u;
      u.at = ticks(updates[k], "t", up);
      if (u.at < last) fail(child(up, "t"), "graph updates must be in time order");
      last = u.at;
      const auto& edits = array_at(updates[k], "edits", up);
      for (std::size_t e = 0; e < edits.size(); ++e) {
        const auto ep = child(child(up, "edits"), e);
        expect_object(edits[e], ep, {"u", "v", "weight", "remove"});
        EdgeEdit edit{node(edits[e], "u", ep, g), node(edits[e], "v", ep, g), std::nullopt};
        const bool remove = flag(edits[e], "remove", ep, false);
        if (remove == edits[e].contains("weight")) fail(ep, "give either weight or remove: true");
        if (!remove) edit.weight = ticks(edits[e], "weight", ep);
        u.edits.push_back(edit);
      }
      try {
        check = update_graph(check, u.edits);
      } catch (const std::exception& e) {
        fail(up, e.what());
      }
      sc.graph_updates.push_back(std::move(u));
    }
  }
  return sc;
}

Scenario load_scenario_text(std::string_view text, const std::filesystem::path& base_dir) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_scenario(doc, base_dir);
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario_text(buf.str(), path.parent_path());
}

}  // namespace edgeroute
