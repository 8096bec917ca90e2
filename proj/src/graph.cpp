#include "edgeroute/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace edgeroute {

std::string to_string(const NodeRole& role) {
  switch (role.kind) {
    case RoleKind::SurveillancePoint: return "surveillance";
    case RoleKind::InterventionService: return "service:" + role.service_type;
    case RoleKind::Landmark: return "landmark";
  }
  return "landmark";
}

NodeRole parse_role(std::string_view token) {
  if (token == "surveillance") return NodeRole::surveillance();
  if (token == "landmark") return NodeRole::landmark();
  constexpr std::string_view prefix = "service:";
  if (token.starts_with(prefix) && token.size() > prefix.size())
    return NodeRole::service(std::string(token.substr(prefix.size())));
  throw std::invalid_argument("unknown role '" + std::string(token) + "'");
}

// ---------------------------------------------------------------------------
// CityGraph

CityGraph::CityGraph(WeightMatrix weights, std::vector<NodeRole> roles, std::uint64_t version)
    : weights_(std::move(weights)), roles_(std::move(roles)), version_(version) {
  const auto n = weights_.rows();
  if (n == 0) throw ValidationError("graph must have at least one vertex");
  if (weights_.cols() != n) throw ValidationError("weight matrix must be square");
  if (roles_.empty()) roles_.assign(static_cast<std::size_t>(n), NodeRole::landmark());
  if (static_cast<Eigen::Index>(roles_.size()) != n)
    throw ValidationError("role table size does not match vertex count");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights_(i, i) != 0) throw ValidationError("diagonal entry (" + std::to_string(i) + ") must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Cost w = weights_(i, j);
      if (w != weights_(j, i))
        throw ValidationError("asymmetric weight between " + std::to_string(i) + " and " + std::to_string(j));
      if (w < 0 && w != kNoEdge)
        throw ValidationError("negative weight between " + std::to_string(i) + " and " + std::to_string(j));
    }
  }
  for (const auto& role : roles_) {
    if (role.is_service() == role.service_type.empty())
      throw ValidationError("service_type must be present exactly for intervention services");
  }
}

CityGraph CityGraph::from_edges(NodeId n, std::span<const Edge> edges, std::vector<NodeRole> roles) {
  if (n <= 0) throw ValidationError("vertex count must be positive");
  WeightMatrix w = WeightMatrix::Constant(n, n, kNoEdge);
  w.diagonal().setZero();
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
      throw ValidationError("edge references unknown node");
    if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
    if (e.weight < 0) throw ValidationError("negative weight");
    const Cost existing = w(e.u, e.v);
    if (existing != kNoEdge && existing != e.weight)
      throw ValidationError("duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                            " with conflicting weight");
    w(e.u, e.v) = e.weight;
    w(e.v, e.u) = e.weight;
  }
  return CityGraph(std::move(w), std::move(roles));
}

std::vector<NodeId> CityGraph::neighbors(NodeId u) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v)
    if (has_edge(u, v)) out.push_back(v);
  return out;
}

std::vector<Edge> CityGraph::edges() const {
  std::vector<Edge> out;
  for (NodeId u = 0; u < size(); ++u)
    for (NodeId v = u + 1; v < size(); ++v)
      if (weights_(u, v) != kNoEdge) out.push_back({u, v, weights_(u, v)});
  return out;
}

std::size_t CityGraph::edge_count() const {
  const auto off_diagonal = (weights_.array() != kNoEdge).count() - size();
  return static_cast<std::size_t>(off_diagonal / 2);
}

std::vector<NodeId> CityGraph::services_of_type(std::string_view type) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v)
    if (roles_[static_cast<std::size_t>(v)].is_service() && roles_[static_cast<std::size_t>(v)].service_type == type)
      out.push_back(v);
  return out;
}

std::set<std::string> CityGraph::service_types() const {
  std::set<std::string> out;
  for (const auto& role : roles_)
    if (role.is_service()) out.insert(role.service_type);
  return out;
}

std::optional<Cost> CityGraph::path_cost(std::span<const NodeId> path) const {
  Cost total = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!valid_node(path[i]) || !valid_node(path[i + 1]) || !has_edge(path[i], path[i + 1]))
      return std::nullopt;
    total += weights_(path[i], path[i + 1]);
  }
  if (!path.empty() && !valid_node(path.front())) return std::nullopt;
  return total;
}

// ---------------------------------------------------------------------------
// Partition

Partition::Partition(NodeId n, int workers) : n_(n), workers_(workers) {
  if (workers <= 0) throw ValidationError("worker count must be positive");
  if (workers > n) throw ValidationError("worker count " + std::to_string(workers) +
                                         " exceeds vertex count " + std::to_string(n));
  base_ = n / workers;
  remainder_ = n % workers;
}

NodeId Partition::begin(int worker) const {
  return worker * base_ + std::min<NodeId>(worker, remainder_);
}

int Partition::owner(NodeId v) const {
  const NodeId wide = remainder_ * (base_ + 1);
  if (v < wide) return v / (base_ + 1);
  return remainder_ + (v - wide) / base_;
}

Partition partition(const CityGraph& graph, int workers) { return Partition(graph.size(), workers); }

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

NodeId parse_index(std::string_view token, std::size_t line_no) {
  NodeId value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value < 0)
    throw ParseError(line_no, "expected non-negative integer, got '" + std::string(token) + "'");
  return value;
}

}  // namespace

CityGraph load_graph(std::string_view text) {
  std::optional<NodeId> n;
  std::vector<std::optional<NodeRole>> roles;
  std::vector<Edge> edges;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;

    const auto keyword = tokens[0];
    if (!n) {
      if (keyword != "graph" || tokens.size() != 2) throw ParseError(line_no, "expected header 'graph <n>'");
      n = parse_index(tokens[1], line_no);
      if (*n == 0) throw ParseError(line_no, "graph must have at least one vertex");
      roles.assign(static_cast<std::size_t>(*n), std::nullopt);
      continue;
    }
    if (keyword == "node") {
      if (tokens.size() != 3) throw ParseError(line_no, "expected 'node <id> <role>'");
      const NodeId id = parse_index(tokens[1], line_no);
      if (id >= *n) throw ValidationError("line " + std::to_string(line_no) + ": role on unknown node " + std::to_string(id));
      NodeRole role;
      try {
        role = parse_role(tokens[2]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
      auto& slot = roles[static_cast<std::size_t>(id)];
      if (slot && *slot != role)
        throw ValidationError("line " + std::to_string(line_no) + ": conflicting role for node " + std::to_string(id));
      slot = std::move(role);
    } else if (keyword == "edge") {
      if (tokens.size() != 4) throw ParseError(line_no, "expected 'edge <u> <v> <weight>'");
      const NodeId u = parse_index(tokens[1], line_no);
      const NodeId v = parse_index(tokens[2], line_no);
      Cost w = 0;
      try {
        w = parse_milli(tokens[3]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
      if (u >= *n || v >= *n)
        throw ValidationError("line " + std::to_string(line_no) + ": edge references unknown node");
      if (w < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative weight " + std::string(tokens[3]));
      if (u == v) throw ValidationError("line " + std::to_string(line_no) + ": self-loop on node " + std::to_string(u));
      edges.push_back({u, v, w});
    } else if (keyword == "graph") {
      throw ParseError(line_no, "duplicate header");
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(keyword) + "'");
    }
  }
  if (!n) throw ParseError(line_no, "missing 'graph <n>' header");

  std::vector<NodeRole> resolved;
  resolved.reserve(roles.size());
  for (auto& r : roles) resolved.push_back(r.value_or(NodeRole::landmark()));
  return CityGraph::from_edges(*n, edges, std::move(resolved));
}

CityGraph load_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_graph(buffer.str());
}

std::string to_graph_text(const CityGraph& graph) {
  std::ostringstream out;
  out << "graph " << graph.size() << '\n';
  for (NodeId v = 0; v < graph.size(); ++v)
    if (graph.role(v).kind != RoleKind::Landmark) out << "node " << v << ' ' << to_string(graph.role(v)) << '\n';
  for (const auto& e : graph.edges()) out << "edge " << e.u << ' ' << e.v << ' ' << format_milli(e.weight) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Generation and editing

CityGraph generate_city(const CityOptions& options) {
  const NodeId n = options.n;
  if (n <= 0) throw ValidationError("n must be positive");
  if (!(options.density > 0.0 && options.density <= 1.0)) throw ValidationError("density must be in (0, 1]");
  if (options.min_weight < 0 || options.max_weight < options.min_weight)
    throw ValidationError("invalid weight range");
  long long services = 0;
  for (const auto& [type, count] : options.service_counts) {
    if (count < 0 || type.empty()) throw ValidationError("invalid service count for '" + type + "'");
    services += count;
  }
  if (services + 1 > n)
    throw ValidationError("infeasible counts: " + std::to_string(services) + " services need more than " +
                          std::to_string(n) + " nodes");

  std::mt19937_64 rng(options.seed);
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<NodeRole> roles(static_cast<std::size_t>(n), NodeRole::landmark());
  std::size_t next = 0;
  for (const auto& [type, count] : options.service_counts)
    for (int k = 0; k < count; ++k) roles[static_cast<std::size_t>(order[next++])] = NodeRole::service(type);
  const auto rest = static_cast<std::size_t>(n) - next;
  const auto surveillance = std::clamp<std::size_t>(
      static_cast<std::size_t>(options.surveillance_fraction * static_cast<double>(rest)), 1, rest);
  for (std::size_t k = 0; k < surveillance; ++k)
    roles[static_cast<std::size_t>(order[next++])] = NodeRole::surveillance();

  std::uniform_int_distribution<Cost> weight_dist(options.min_weight, options.max_weight);
  WeightMatrix w = WeightMatrix::Constant(n, n, kNoEdge);
  w.diagonal().setZero();

  // Random spanning tree over a fresh permutation guarantees connectivity.
  std::shuffle(order.begin(), order.end(), rng);
  for (NodeId k = 1; k < n; ++k) {
    std::uniform_int_distribution<NodeId> parent_dist(0, k - 1);
    const NodeId a = order[static_cast<std::size_t>(k)];
    const NodeId b = order[static_cast<std::size_t>(parent_dist(rng))];
    const Cost weight = weight_dist(rng);
    w(a, b) = weight;
    w(b, a) = weight;
  }

  // Fill remaining pairs so the expected edge fraction matches density.
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double tree = static_cast<double>(n - 1);
  const double extra = pairs > tree ? std::max(0.0, (options.density * pairs - tree) / (pairs - tree)) : 0.0;
  if (extra > 0.0) {
    std::bernoulli_distribution coin(std::min(1.0, extra));
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (w(u, v) != kNoEdge) continue;
        if (!coin(rng)) continue;
        const Cost weight = weight_dist(rng);
        w(u, v) = weight;
        w(v, u) = weight;
      }
    }
  }
  return CityGraph(std::move(w), std::move(roles));
}

CityGraph update_graph(const CityGraph& graph, std::span<const EdgeEdit> edits) {
  WeightMatrix w = graph.weights();
  for (const auto& edit : edits) {
    if (!graph.valid_node(edit.u) || !graph.valid_node(edit.v))
      throw ValidationError("edit references invalid node " + std::to_string(edit.u) + "-" + std::to_string(edit.v));
    if (edit.u == edit.v) throw ValidationError("edit on self-loop " + std::to_string(edit.u));
    const Cost value = edit.weight.value_or(kNoEdge);
    if (edit.weight && *edit.weight < 0) throw ValidationError("negative weight in edit");
    w(edit.u, edit.v) = value;
    w(edit.v, edit.u) = value;
  }
  return CityGraph(std::move(w), std::vector<NodeRole>(graph.roles().begin(), graph.roles().end()),
                   graph.version() + 1);
}

}  // namespace edgeroute
