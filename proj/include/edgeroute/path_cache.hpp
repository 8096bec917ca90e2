// Per-server LRU cache of SSSP results keyed by incident location.
// An entry is only valid for the graph version it was computed on.
#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <unordered_map>

#include "edgeroute/sssp.hpp"

namespace edgeroute {

struct CacheEntry {
  NodeId key = kNoNode;
  SsspResult result;
  std::uint64_t graph_version = 0;
  Cost last_used = 0;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;      // capacity evictions
  std::uint64_t invalidations = 0;  // stale entries dropped (lookup or invalidate_all)

  std::uint64_t lookups() const { return hits + misses; }
  double hit_ratio() const { return lookups() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(lookups()); }
};

class PathCache {
 public:
  static constexpr std::size_t kDefaultCapacity = 1024;

  explicit PathCache(std::size_t capacity = kDefaultCapacity);

  /// Hit iff an entry for key exists at current_version. A stale entry is
  /// dropped and reported as a miss.
  const CacheEntry* lookup(NodeId key, std::uint64_t current_version, Cost now = 0);

  /// Inserts or replaces the entry for entry.key, evicting the least recently
  /// used entry when full. Throws ValidationError if the entry is inconsistent.
  void insert(CacheEntry entry);

  /// Drops entries older than new_version. Throws ValidationError on a
  /// version regression.
  std::size_t invalidate_all(std::uint64_t new_version);

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool contains(NodeId key) const { return index_.contains(key); }
  const CacheStats& stats() const { return stats_; }

 private:
  using List = std::list<CacheEntry>;  // most recently used at the front

  std::size_t capacity_;
  List entries_;
  std::unordered_map<NodeId, List::iterator> index_;
  std::uint64_t max_version_ = 0;
  CacheStats stats_;
};

}  // namespace edgeroute
