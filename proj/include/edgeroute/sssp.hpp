// Single-source shortest paths over the adjacency matrix.
//
// Two engines share one selection rule (smallest distance, lowest NodeId on
// ties) so their settling traces are identical:
//
//   dijkstra_sequential  - the textbook O(n^2) matrix Dijkstra.
//   dijkstra_parallel    - p workers, each owning a contiguous vertex block
//                          and the matching column block of the matrix.
//                          Every round: local minimum per worker, reduce at
//                          worker 0, broadcast (u, d[u]), owner settles u,
//                          every worker relaxes its unsettled vertices.
//
// Both are templated on the matrix scalar and accept any dense Eigen
// expression; the CityGraph overloads at the bottom are what the rest of
// the project uses.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <barrier>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "edgeroute/graph.hpp"
#include "edgeroute/types.hpp"

namespace edgeroute {

template <typename Scalar>
struct BasicSsspResult {
  NodeId source = kNoNode;
  std::vector<Scalar> dist;
  std::vector<NodeId> pred;          // kNoNode where absent
  std::vector<NodeId> settle_order;  // globally selected vertices, in order
  std::uint64_t graph_version = 0;

  NodeId size() const { return static_cast<NodeId>(dist.size()); }
  bool reachable(NodeId v) const { return dist[static_cast<std::size_t>(v)] != kInfinityOf<Scalar>; }
  Scalar distance(NodeId v) const { return dist[static_cast<std::size_t>(v)]; }
  NodeId predecessor(NodeId v) const { return pred[static_cast<std::size_t>(v)]; }
};
using SsspResult = BasicSsspResult<Cost>;

template <typename Scalar>
struct FrontierCandidate {
  NodeId vertex = kNoNode;
  Scalar distance = kInfinityOf<Scalar>;

  bool empty() const { return vertex == kNoNode; }

  /// Strict order used by both the local and the global minimum:
  /// smaller distance first, then lower NodeId; the empty candidate is last.
  friend bool operator<(const FrontierCandidate& a, const FrontierCandidate& b) {
    if (a.empty()) return false;
    if (b.empty()) return true;
    return a.distance < b.distance || (a.distance == b.distance && a.vertex < b.vertex);
  }
};

namespace detail {

template <typename Derived>
void check_square(const Eigen::MatrixBase<Derived>& weights, NodeId source) {
  if (weights.rows() != weights.cols()) throw ValidationError("weight matrix must be square");
  if (source < 0 || source >= weights.rows())
    throw ValidationError("invalid source " + std::to_string(source));
}

}  // namespace detail

template <typename Derived>
BasicSsspResult<typename Derived::Scalar> dijkstra_sequential(const Eigen::MatrixBase<Derived>& weights,
                                                              NodeId source) {
  using Scalar = typename Derived::Scalar;
  static_assert(std::is_arithmetic_v<Scalar>);
  detail::check_square(weights, source);
  const auto& w = weights.derived();
  const auto n = static_cast<NodeId>(w.rows());
  constexpr Scalar inf = kInfinityOf<Scalar>;
  constexpr Scalar no_edge = kNoEdgeOf<Scalar>;

  BasicSsspResult<Scalar> r;
  r.source = source;
  r.dist.assign(static_cast<std::size_t>(n), inf);
  r.pred.assign(static_cast<std::size_t>(n), kNoNode);
  r.settle_order.reserve(static_cast<std::size_t>(n));
  std::vector<char> settled(static_cast<std::size_t>(n), 0);

  for (NodeId v = 0; v < n; ++v) {
    if (v == source) {
      r.dist[v] = 0;
    } else if (const Scalar ws = w(source, v); ws != no_edge) {
      r.dist[v] = ws;
      r.pred[v] = source;
    }
  }

  for (;;) {
    FrontierCandidate<Scalar> best;
    for (NodeId v = 0; v < n; ++v)
      if (!settled[v] && r.dist[v] != inf && FrontierCandidate<Scalar>{v, r.dist[v]} < best) best = {v, r.dist[v]};
    if (best.empty()) break;

    const NodeId u = best.vertex;
    settled[u] = 1;
    r.settle_order.push_back(u);
    for (NodeId v = 0; v < n; ++v) {
      if (settled[v]) continue;
      const Scalar wuv = w(u, v);
      if (wuv == no_edge) continue;
      if (r.dist[v] > best.distance + wuv) {
        r.dist[v] = best.distance + wuv;
        r.pred[v] = u;
      }
    }
  }
  return r;
}

/// One worker's share of the parallel engine: its vertex block, the local
/// slices of d and pred, and a view of the weight columns it owns.
template <typename Derived>
class WorkerView {
 public:
  using Scalar = typename Derived::Scalar;
  using ColumnBlock = Eigen::Block<const Derived>;

  WorkerView(int index, const Partition& part, const Derived& weights, NodeId source)
      : index_(index),
        begin_(part.begin(index)),
        end_(part.end(index)),
        columns_(weights.middleCols(begin_, end_ - begin_)),
        dist_(static_cast<std::size_t>(end_ - begin_), kInfinityOf<Scalar>),
        pred_(static_cast<std::size_t>(end_ - begin_), kNoNode),
        settled_(static_cast<std::size_t>(end_ - begin_), 0) {
    const auto source_row = columns_.row(source);
    for (NodeId v = begin_; v < end_; ++v) {
      const auto k = local(v);
      if (v == source) {
        dist_[k] = 0;
      } else if (const Scalar ws = source_row(k); ws != kNoEdgeOf<Scalar>) {
        dist_[k] = ws;
        pred_[k] = source;
      }
    }
  }

  int index() const { return index_; }
  NodeId begin() const { return begin_; }
  NodeId end() const { return end_; }
  bool owns(NodeId v) const { return v >= begin_ && v < end_; }
  const ColumnBlock& columns() const { return columns_; }
  std::span<const Scalar> dist() const { return dist_; }
  std::span<const NodeId> pred() const { return pred_; }

  FrontierCandidate<Scalar> local_min() const {
    FrontierCandidate<Scalar> best;
    for (std::size_t k = 0; k < dist_.size(); ++k) {
      if (settled_[k] || dist_[k] == kInfinityOf<Scalar>) continue;
      const FrontierCandidate<Scalar> c{begin_ + static_cast<NodeId>(k), dist_[k]};
      if (c < best) best = c;
    }
    return best;
  }

  void settle(NodeId u) {
    if (owns(u)) settled_[local(u)] = 1;
  }

  /// Relaxes every unsettled owned vertex through the broadcast pair (u, d[u]).
  void relax(NodeId u, Scalar du) {
    const auto row = columns_.row(u);
    for (std::size_t k = 0; k < dist_.size(); ++k) {
      if (settled_[k]) continue;
      const Scalar wuv = row(static_cast<Eigen::Index>(k));
      if (wuv == kNoEdgeOf<Scalar>) continue;
      if (dist_[k] > du + wuv) {
        dist_[k] = du + wuv;
        pred_[k] = u;
      }
    }
  }

 private:
  std::size_t local(NodeId v) const { return static_cast<std::size_t>(v - begin_); }

  int index_;
  NodeId begin_;
  NodeId end_;
  ColumnBlock columns_;
  std::vector<Scalar> dist_;
  std::vector<NodeId> pred_;
  std::vector<char> settled_;
};

enum class Execution {
  Threads,   // one std::jthread per worker, rounds separated by a std::barrier
  Lockstep,  // the same rounds executed round-robin on the calling thread
};

template <typename Derived>
BasicSsspResult<typename Derived::Scalar> dijkstra_parallel(const Eigen::MatrixBase<Derived>& weights,
                                                            NodeId source, int workers,
                                                            Execution mode = Execution::Threads) {
  using Scalar = typename Derived::Scalar;
  static_assert(std::is_arithmetic_v<Scalar>);
  detail::check_square(weights, source);
  const auto& w = weights.derived();
  const auto n = static_cast<NodeId>(w.rows());
  const Partition part(n, workers);

  std::vector<WorkerView<Derived>> views;
  views.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) views.emplace_back(i, part, w, source);

  std::vector<FrontierCandidate<Scalar>> candidates(static_cast<std::size_t>(workers));
  FrontierCandidate<Scalar> broadcast;
  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(n));

  // Runs once per round on worker 0's behalf, after every local minimum is in.
  auto reduce_at_root = [&]() noexcept {
    broadcast = *std::min_element(candidates.begin(), candidates.end());
    if (!broadcast.empty()) order.push_back(broadcast.vertex);
  };
  auto apply_broadcast = [&](WorkerView<Derived>& view) {
    view.settle(broadcast.vertex);
    view.relax(broadcast.vertex, broadcast.distance);
  };

  if (mode == Execution::Lockstep || workers == 1) {
    for (;;) {
      for (auto& view : views) candidates[static_cast<std::size_t>(view.index())] = view.local_min();
      reduce_at_root();
      if (broadcast.empty()) break;
      for (auto& view : views) apply_broadcast(view);
    }
  } else {
    std::barrier sync(workers, reduce_at_root);
    {
      std::vector<std::jthread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (auto& view : views) {
        pool.emplace_back([&sync, &candidates, &broadcast, &apply_broadcast, &view] {
          for (;;) {
            candidates[static_cast<std::size_t>(view.index())] = view.local_min();
            sync.arrive_and_wait();
            if (broadcast.empty()) return;
            apply_broadcast(view);
          }
        });
      }
    }
  }

  BasicSsspResult<Scalar> r;
  r.source = source;
  r.dist.reserve(static_cast<std::size_t>(n));
  r.pred.reserve(static_cast<std::size_t>(n));
  for (const auto& view : views) {
    r.dist.insert(r.dist.end(), view.dist().begin(), view.dist().end());
    r.pred.insert(r.pred.end(), view.pred().begin(), view.pred().end());
  }
  r.settle_order = std::move(order);
  return r;
}

/// Route from the result's source to target, inclusive. Empty when target is
/// unreachable.
template <typename Scalar>
std::vector<NodeId> extract_path(const BasicSsspResult<Scalar>& result, NodeId target) {
  if (target < 0 || target >= result.size()) throw ValidationError("invalid target " + std::to_string(target));
  if (!result.reachable(target)) return {};
  std::vector<NodeId> path;
  for (NodeId v = target; v != kNoNode; v = result.predecessor(v)) {
    path.push_back(v);
    if (path.size() > static_cast<std::size_t>(result.size()))
      throw std::logic_error("predecessor chain contains a cycle");
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// CityGraph entry points; results carry the graph version.
SsspResult dijkstra_sequential(const CityGraph& graph, NodeId source);
SsspResult dijkstra_parallel(const CityGraph& graph, NodeId source, int workers,
                             Execution mode = Execution::Threads);

struct RankedService {
  NodeId node;
  std::string service_type;
  Cost cost;
  std::vector<NodeId> path;  // service node first, result source last
};

/// Reachable services of every required type, grouped by type (ascending
/// type name) and sorted by cost then NodeId within each group.
/// Throws ValidationError when result and graph versions differ.
std::vector<RankedService> rank_services(const SsspResult& result, const CityGraph& graph,
                                         const std::set<std::string>& required_types);

}  // namespace edgeroute
