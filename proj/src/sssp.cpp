#include "edgeroute/sssp.hpp"

namespace edgeroute {

SsspResult dijkstra_sequential(const CityGraph& graph, NodeId source) {
  auto r = dijkstra_sequential(graph.weights(), source);
  r.graph_version = graph.version();
  return r;
}

SsspResult dijkstra_parallel(const CityGraph& graph, NodeId source, int workers, Execution mode) {
  if (!graph.valid_node(source)) throw ValidationError("invalid source " + std::to_string(source));
  auto r = dijkstra_parallel(graph.weights(), source, workers, mode);
  r.graph_version = graph.version();
  return r;
}

std::vector<RankedService> rank_services(const SsspResult& result, const CityGraph& graph,
                                         const std::set<std::string>& required_types) {
  if (result.graph_version != graph.version())
    throw ValidationError("result computed on graph version " + std::to_string(result.graph_version) +
                          ", graph is at version " + std::to_string(graph.version()));
  if (result.size() != graph.size()) throw ValidationError("result size does not match graph");

  std::vector<RankedService> out;
  for (const auto& type : required_types) {
    std::vector<RankedService> group;
    for (const NodeId node : graph.services_of_type(type)) {
      if (!result.reachable(node)) continue;
      auto path = extract_path(result, node);
      std::reverse(path.begin(), path.end());
      group.push_back({node, type, result.distance(node), std::move(path)});
    }
    std::sort(group.begin(), group.end(), [](const RankedService& a, const RankedService& b) {
      return a.cost < b.cost || (a.cost == b.cost && a.node < b.node);
    });
    std::move(group.begin(), group.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace edgeroute
