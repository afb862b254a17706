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

#include "unloadsim/mtt_cache.hpp"

#include <iterator>
#include <stdexcept>

namespace unloadsim {

MttCache::MttCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("MTT cache capacity must be >= 1");
  }
  index_.reserve(capacity_);
}

CacheOutcome MttCache::access(PageId page) {
  auto it = index_.find(page.value);
  if (it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    ++hits_;
    return CacheOutcome::kHit;
  }
  ++misses_;
  if (index_.size() == capacity_) {
    // Reuse the evicted node instead of reallocating.
    auto victim = std::prev(lru_.end());
    index_.erase(*victim);
    *victim = page.value;
    lru_.splice(lru_.begin(), lru_, victim);
  } else {
    lru_.push_front(page.value);
  }
  index_.emplace(page.value, lru_.begin());
  return CacheOutcome::kMiss;
}

bool MttCache::contains(PageId page) const {
  return index_.find(page.value) != index_.end();
}

std::vector<PageId> MttCache::recency_order() const {
  std::vector<PageId> out;
  out.reserve(lru_.size());
  for (uint64_t v : lru_) out.push_back(PageId{v});
  return out;
}

}  // namespace unloadsim
