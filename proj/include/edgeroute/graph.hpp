// City graph: adjacency-matrix world model, node roles, worker partitioning,
// text format I/O and random city generation.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeroute/types.hpp"

namespace edgeroute {

/// Row-major so that row u restricted to a worker's column block is contiguous.
template <typename Scalar>
using WeightMatrixOf = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMatrix = WeightMatrixOf<Cost>;

enum class RoleKind { SurveillancePoint, InterventionService, Landmark };

struct NodeRole {
  RoleKind kind = RoleKind::Landmark;
  std::string service_type;  // non-empty iff kind == InterventionService

  static NodeRole surveillance() { return {RoleKind::SurveillancePoint, {}}; }
  static NodeRole landmark() { return {RoleKind::Landmark, {}}; }
  static NodeRole service(std::string type) { return {RoleKind::InterventionService, std::move(type)}; }

  bool is_service() const { return kind == RoleKind::InterventionService; }
  friend bool operator==(const NodeRole&, const NodeRole&) = default;
};

/// Graph file token: "surveillance", "landmark" or "service:<type>".
std::string to_string(const NodeRole& role);
NodeRole parse_role(std::string_view token);

struct Edge {
  NodeId u;
  NodeId v;
  Cost weight;
};

/// Immutable undirected weighted graph. Construction validates symmetry,
/// the zero diagonal and non-negative weights.
class CityGraph {
 public:
  CityGraph(WeightMatrix weights, std::vector<NodeRole> roles, std::uint64_t version = 0);

  /// Builds an n-vertex graph from undirected edges; each edge is mirrored.
  static CityGraph from_edges(NodeId n, std::span<const Edge> edges,
                              std::vector<NodeRole> roles = {});

  NodeId size() const { return static_cast<NodeId>(weights_.rows()); }
  std::uint64_t version() const { return version_; }
  const WeightMatrix& weights() const { return weights_; }

  Cost weight(NodeId u, NodeId v) const { return weights_(u, v); }
  bool has_edge(NodeId u, NodeId v) const { return u != v && weights_(u, v) != kNoEdge; }
  bool valid_node(NodeId v) const { return v >= 0 && v < size(); }

  const NodeRole& role(NodeId v) const { return roles_.at(static_cast<std::size_t>(v)); }
  std::span<const NodeRole> roles() const { return roles_; }

  std::vector<NodeId> neighbors(NodeId u) const;
  std::vector<Edge> edges() const;  // u < v, ascending
  std::size_t edge_count() const;
  std::vector<NodeId> services_of_type(std::string_view type) const;
  std::set<std::string> service_types() const;

  /// Sum of edge weights along a walk; nullopt if a consecutive pair is not an edge.
  std::optional<Cost> path_cost(std::span<const NodeId> path) const;

 private:
  WeightMatrix weights_;
  std::vector<NodeRole> roles_;
  std::uint64_t version_;
};

/// Contiguous near-equal vertex blocks, one per worker. The first n mod p
/// blocks hold one extra vertex.
class Partition {
 public:
  Partition(NodeId n, int workers);

  int workers() const { return workers_; }
  NodeId vertex_count() const { return n_; }
  NodeId begin(int worker) const;
  NodeId end(int worker) const { return begin(worker + 1); }
  NodeId block_size(int worker) const { return end(worker) - begin(worker); }
  int owner(NodeId v) const;

 private:
  NodeId n_;
  int workers_;
  NodeId base_;       // floor(n / p)
  NodeId remainder_;  // n mod p
};

Partition partition(const CityGraph& graph, int workers);

// Graph text format
//   graph <n>
//   node <id> <surveillance|service:<type>|landmark>
//   edge <u> <v> <weight>
// '#' starts a comment. Weights are decimals with at most three fractional digits.
CityGraph load_graph(std::string_view text);
CityGraph load_graph_file(const std::filesystem::path& path);
std::string to_graph_text(const CityGraph& graph);

struct CityOptions {
  NodeId n = 10;
  double density = 0.3;
  std::map<std::string, int> service_counts;
  std::uint64_t seed = 0;
  /// Share of the non-service vertices that become surveillance points (at least one).
  double surveillance_fraction = 0.5;
  Cost min_weight = 1 * kCostScale;
  Cost max_weight = 20 * kCostScale;
};

/// Connected random city. Deterministic for a fixed seed.
CityGraph generate_city(const CityOptions& options);

/// A weight change, or a removal when weight is empty.
struct EdgeEdit {
  NodeId u;
  NodeId v;
  std::optional<Cost> weight;
};

/// Returns the edited graph with version + 1.
CityGraph update_graph(const CityGraph& graph, std::span<const EdgeEdit> edits);

}  // namespace edgeroute
