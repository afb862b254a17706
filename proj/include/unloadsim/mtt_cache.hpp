// Copyright 2026 The unloadsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "unloadsim/core_model.hpp"

namespace unloadsim {

enum class CacheOutcome : uint8_t { kHit, kMiss };

inline constexpr std::size_t kDefaultMttCapacity = 4096;

// Translation cache of the target RNIC, one entry per page, LRU eviction.
// The cache starts cold.
class MttCache {
 public:
  // capacity must be >= 1.
  explicit MttCache(std::size_t capacity = kDefaultMttCapacity);

  // Looks up `page` and makes it the most recently used entry, inserting it
  // (and evicting the LRU entry when full) on a miss.
  CacheOutcome access(PageId page);

  // Pure lookup; recency and counters are left alone.
  bool contains(PageId page) const;

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return index_.size(); }
  uint64_t hits() const { return hits_; }
  uint64_t misses() const { return misses_; }
  uint64_t accesses() const { return hits_ + misses_; }

  // Entries from most to least recently used.
  std::vector<PageId> recency_order() const;

 private:
  std::size_t capacity_;
  std::list<uint64_t> lru_;  // front = most recent
  std::unordered_map<uint64_t, std::list<uint64_t>::iterator> index_;
  uint64_t hits_ = 0;
  uint64_t misses_ = 0;
};

}  // namespace unloadsim
