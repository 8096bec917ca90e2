#include "edgeroute/path_cache.hpp"

namespace edgeroute {

PathCache::PathCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("cache capacity must be positive");
}

const CacheEntry* PathCache::lookup(NodeId key, std::uint64_t current_version, Cost now) {
  const auto it = index_.find(key);
  if (it == index_.end()) {
    ++stats_.misses;
    return nullptr;
  }
  if (it->second->graph_version != current_version) {
    entries_.erase(it->second);
    index_.erase(it);
    ++stats_.invalidations;
    ++stats_.misses;
    return nullptr;
  }
  entries_.splice(entries_.begin(), entries_, it->second);
  it->second->last_used = now;
  ++stats_.hits;
  return &*it->second;
}

void PathCache::insert(CacheEntry entry) {
  if (entry.result.graph_version != entry.graph_version)
    throw ValidationError("cache entry version does not match its result");
  if (entry.result.source != entry.key) throw ValidationError("cache entry key does not match result source");
  max_version_ = std::max(max_version_, entry.graph_version);

  if (const auto it = index_.find(entry.key); it != index_.end()) {
    entries_.erase(it->second);
    index_.erase(it);
  } else if (entries_.size() == capacity_) {
    index_.erase(entries_.back().key);
    entries_.pop_back();
    ++stats_.evictions;
  }
  const NodeId key = entry.key;
  entries_.push_front(std::move(entry));
  index_[key] = entries_.begin();
}

std::size_t PathCache::invalidate_all(std::uint64_t new_version) {
  if (new_version < max_version_)
    throw ValidationError("cache version regression: " + std::to_string(new_version) + " < " +
                          std::to_string(max_version_));
  max_version_ = new_version;
  std::size_t dropped = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->graph_version < new_version) {
      index_.erase(it->key);
      it = entries_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  stats_.invalidations += dropped;
  return dropped;
}

}  // namespace edgeroute
